//! Independent checks of the closed forms: a plane-wave Bloch eigensolver
//! for the exact transmission problem and a quadrature of the energy
//! integral defining `lambda2`.

pub mod bessel;
pub mod dense;
pub mod eigen;
pub mod planewave;
pub mod quadrature;

use rayon::prelude::*;

pub use planewave::{
    bloch_eigenvalues, eps_fourier, inv_eps_fourier, EigenResult, Factorization, OracleSettings,
    PlaneWaveBasis, PlaneWaveOperator,
};
pub use quadrature::{exterior_zeta_prime_integral, lambda2_quadrature};

use crate::error::{EmhError, Result};
use crate::fieldexp::BlochParams;
use crate::homog::{DispersionSample, DispersionSource};
use crate::lattice::LatticeSpec;

/// Quasimomenta used for the `lambda2` fit.
pub const DEFAULT_Q_LIST: [f64; 4] = [0.02, 0.04, 0.06, 0.08];

/// Largest relative residual accepted by the fit.
pub const FIT_TOL: f64 = 1e-6;

/// Least-squares fit `nu^2 = lambda2 q^2 + lambda4 q^4`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lambda2Fit {
    pub lambda2: f64,
    pub lambda4: f64,
    pub relative_residual: f64,
    pub samples: Vec<DispersionSample>,
}

/// Fits `lambda2` from the lowest plane-wave eigenvalue at each `q`.
pub fn lambda2_from_oracle(
    lattice: &LatticeSpec,
    theta: f64,
    q_list: &[f64],
    settings: OracleSettings,
) -> Result<Lambda2Fit> {
    let op = PlaneWaveOperator::new(lattice, settings)?;
    lambda2_fit(&op, theta, q_list)
}

/// As [`lambda2_from_oracle`] with a prebuilt operator.
pub fn lambda2_fit(op: &PlaneWaveOperator, theta: f64, q_list: &[f64]) -> Result<Lambda2Fit> {
    if q_list.len() < 3 {
        return Err(EmhError::Domain(format!(
            "lambda2 fit needs at least 3 quasimomenta, got {}",
            q_list.len()
        )));
    }
    if let Some(q) = q_list.iter().find(|&&q| !(q > 0.0 && q <= 0.1)) {
        return Err(EmhError::Domain(format!(
            "lambda2 fit quasimomenta must lie in (0, 0.1], got {q}"
        )));
    }
    let nu2 = q_list
        .par_iter()
        .map(|&q| {
            let b = BlochParams::new(q, theta)?;
            Ok(op.eigenvalues(&b, 1)?.eigenvalues[0])
        })
        .collect::<Result<Vec<f64>>>()?;

    // nu^2 / q^2 = lambda2 + lambda4 q^2: ordinary linear regression.
    let xs: Vec<f64> = q_list.iter().map(|q| q * q).collect();
    let ys: Vec<f64> = nu2.iter().zip(&xs).map(|(v, x)| v / x).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let lambda4 = sxy / sxx;
    let lambda2 = my - lambda4 * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - lambda2 - lambda4 * x).powi(2))
        .sum();
    let scale: f64 = ys.iter().map(|y| y * y).sum();
    let relative_residual = (rss / scale).sqrt();
    if !(relative_residual <= FIT_TOL) {
        return Err(EmhError::IllConditionedFit(relative_residual));
    }
    let samples = q_list
        .iter()
        .zip(&nu2)
        .map(|(&q, &v)| DispersionSample {
            q,
            theta,
            nu_squared: v,
            lambda2,
            source: DispersionSource::PlanewaveOracle,
        })
        .collect();
    Ok(Lambda2Fit {
        lambda2,
        lambda4,
        relative_residual,
        samples,
    })
}
