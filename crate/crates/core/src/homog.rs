//! Effective dielectric tensor and long-wave dispersion in closed form.

use std::f64::consts::PI;

use crate::elliptic::EllipticData;
use crate::error::{EmhError, Result};
use crate::fieldexp::BlochParams;
use crate::lattice::LatticeSpec;

/// Which closed form produced a tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorForm {
    FullRational,
    Asymptotic,
    SquareIsotropic,
}

impl TensorForm {
    pub fn label(&self) -> &'static str {
        match self {
            TensorForm::FullRational => "full_rational",
            TensorForm::Asymptotic => "asymptotic",
            TensorForm::SquareIsotropic => "square_isotropic",
        }
    }
}

/// Diagonal effective tensor in the lattice axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveTensor {
    pub eps1_star: f64,
    pub eps2_star: f64,
    pub form: TensorForm,
    /// Remainder is `O((q^2 + a^2)^(p/2))` with `p = remainder_order`.
    pub remainder_order: u32,
}

/// Where a dispersion value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DispersionSource {
    Asymptotic,
    PlanewaveOracle,
    QuadratureOracle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionSample {
    pub q: f64,
    pub theta: f64,
    pub nu_squared: f64,
    pub lambda2: f64,
    pub source: DispersionSource,
}

/// `lambda2 = 1 - 2 pi alpha a^2 / (tau1 tau2)`.
pub fn lambda2_closed_form(lattice: &LatticeSpec) -> f64 {
    1.0 - 2.0 * PI * lattice.alpha() * lattice.radius().powi(2) / lattice.area()
}

/// `tau1^2 cos^2 theta + tau2^2 sin^2 theta`.
fn directional_extent(lattice: &LatticeSpec, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    (lattice.tau1() * c).powi(2) + (lattice.tau2() * s).powi(2)
}

/// Rational tensor entries with the `a^2` corrections kept in the
/// denominators. `eps1` uses `eta2~ / tau2`, `eps2` uses `eta1 / tau1`.
pub fn effective_tensor_full(
    lattice: &LatticeSpec,
    elliptic: &EllipticData,
    bloch: &BlochParams,
) -> Result<EffectiveTensor> {
    let alpha = lattice.alpha();
    let a2 = lattice.radius().powi(2);
    let s = lattice.area();
    let ext = directional_extent(lattice, bloch.theta());
    let q2 = bloch.q().powi(2);

    let entry = |ratio: f64| -> Result<f64> {
        let p = 1.0 - 2.0 * alpha * a2 * ratio;
        let num = 2.0 * PI * alpha * a2 * p;
        let den = s - num;
        if !(den > 0.0) {
            return Err(EmhError::DegenerateGeometry(den));
        }
        Ok(1.0 + num / den + q2 / 12.0 * PI * alpha * a2 * s * p * ext / (den * den))
    };
    Ok(EffectiveTensor {
        eps1_star: entry(elliptic.eta2_tilde() / lattice.tau2())?,
        eps2_star: entry(elliptic.eta1() / lattice.tau1())?,
        form: TensorForm::FullRational,
        remainder_order: 5,
    })
}

/// Expanded form: isotropic part with the `q^2` correction plus the `a^4`
/// anisotropy `diag(eta1 tau2, eta2~ tau1)`.
pub fn effective_tensor_asymptotic(
    lattice: &LatticeSpec,
    elliptic: &EllipticData,
    bloch: &BlochParams,
) -> EffectiveTensor {
    let alpha = lattice.alpha();
    let a2 = lattice.radius().powi(2);
    let s = lattice.area();
    let iso = 1.0
        + 2.0 * PI * alpha * a2 / s
        + PI * alpha * a2 * bloch.q().powi(2) / (12.0 * s) * directional_extent(lattice, bloch.theta());
    let aniso = 4.0 * PI * alpha * alpha * a2 * a2 / (s * s);
    EffectiveTensor {
        eps1_star: iso + aniso * elliptic.eta1() * lattice.tau2(),
        eps2_star: iso + aniso * elliptic.eta2_tilde() * lattice.tau1(),
        form: TensorForm::Asymptotic,
        remainder_order: 5,
    }
}

/// Scalar `eps* = 1 + 2 alpha f + 2 alpha^2 f^2 + pi alpha a^2 q^2 / 12`,
/// `f = pi a^2 / tau^2`, for the square lattice.
pub fn effective_isotropic_square(lattice: &LatticeSpec, bloch: &BlochParams) -> Result<f64> {
    if !lattice.is_square() {
        return Err(EmhError::Domain(format!(
            "isotropic formula needs tau1 = tau2, got ({}, {})",
            lattice.tau1(),
            lattice.tau2()
        )));
    }
    let alpha = lattice.alpha();
    let a2 = lattice.radius().powi(2);
    let f = PI * a2 / lattice.area();
    Ok(1.0 + 2.0 * alpha * f + 2.0 * (alpha * f).powi(2) + PI * alpha * a2 * bloch.q().powi(2) / 12.0)
}

/// `nu^2 = q^2 lambda2`; independent of the direction.
pub fn dispersion(lattice: &LatticeSpec, bloch: &BlochParams) -> DispersionSample {
    let lambda2 = lambda2_closed_form(lattice);
    DispersionSample {
        q: bloch.q(),
        theta: bloch.theta(),
        nu_squared: bloch.q().powi(2) * lambda2,
        lambda2,
        source: DispersionSource::Asymptotic,
    }
}

/// Maxwell-Garnett value `(1 + alpha f) / (1 - alpha f)`.
pub fn maxwell_garnett(lattice: &LatticeSpec) -> f64 {
    let af = lattice.alpha() * lattice.fill_fraction();
    (1.0 + af) / (1.0 - af)
}
