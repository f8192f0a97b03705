//! Effective permittivity and long-wave dispersion of rectangular lattices of
//! dielectric cylinders (TE polarization).
//!
//! * [`elliptic`]: lattice sums, Weierstrass zeta, quasi-period constants.
//! * [`fieldexp`]: multipole coefficients and the first field correctors.
//! * [`homog`]: effective tensor and dispersion relation in closed form.
//! * [`oracle`]: plane-wave Bloch eigensolver and quadrature cross-checks.
//! * [`validate`]: the acceptance criteria as callable checks.
//! * [`config`], [`cli`]: run configuration and the command runner behind `emh`.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod elliptic;
pub mod error;
pub mod fieldexp;
pub mod homog;
pub mod lattice;
pub mod oracle;
pub mod report;
pub mod stats;
pub mod validate;

pub use elliptic::{EllipticData, ZetaValue};
pub use error::{EmhError, Result};
pub use lattice::LatticeSpec;
