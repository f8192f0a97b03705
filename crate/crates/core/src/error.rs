use thiserror::Error;

/// Errors raised by the library.
///
/// Variants are grouped so the CLI can map them onto exit codes: input
/// problems (`Normalization`, `Domain`, `Config`) versus numerical failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmhError {
    /// Lattice periods violate `min(tau1, tau2) = 1`.
    #[error("lattice normalization violated: min(tau1, tau2) = {0}, expected 1")]
    Normalization(f64),

    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A quantity that symmetry forces to be real came out complex.
    #[error("symmetry residual too large: {what} has imaginary part {residual:e}")]
    Symmetry { what: &'static str, residual: f64 },

    /// Evaluation point on (or within 1e-12 of) a lattice node.
    #[error("pole: point {re} + {im}i coincides with a lattice node")]
    Pole { re: f64, im: f64 },

    /// A truncated series did not settle within its allowed length.
    #[error("series did not converge: {0}")]
    Convergence(String),

    /// `tau1 tau2 - 2 pi alpha a^2 (...)` is not positive.
    #[error("degenerate geometry: tensor denominator {0:e} is not positive")]
    DegenerateGeometry(f64),

    /// Assembled oracle matrix failed the symmetry check.
    #[error("assembled matrix is not Hermitian: max |M - M^T| = {0:e}")]
    NonHermitian(f64),

    /// Eigensolver exceeded its sweep budget.
    #[error("eigensolver did not converge after {0} iterations")]
    Iteration(usize),

    /// Least-squares extraction of lambda2 left a large residual.
    #[error("ill-conditioned lambda2 fit: relative residual {0:e}")]
    IllConditionedFit(f64),

    /// Quadrature changed under refinement by more than the target.
    #[error("quadrature not resolved: relative change {0:e} under refinement")]
    Resolution(f64),

    /// Invalid run configuration (CLI).
    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, EmhError>;

impl EmhError {
    /// True for errors caused by bad input rather than failed numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            EmhError::Normalization(_) | EmhError::Domain(_) | EmhError::Config(_)
        )
    }
}
