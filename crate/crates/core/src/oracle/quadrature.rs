//! Cell quadrature of the energy integral `(1/S) int eps^-1 |grad u1|^2`.
//!
//! The cylinder uses a polar Gauss-trapezoid rule. The exterior is split
//! into four angular panels at the cell-corner directions; on each ray the
//! radius runs from `a` to the cell edge on a logarithmic scale.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::elliptic::EllipticData;
use crate::error::{EmhError, Result};
use crate::fieldexp::{FirstCorrector, MultipoleCoeffs, Point, Region, Variant};
use crate::lattice::LatticeSpec;

/// Default nodes per panel direction.
pub const DEFAULT_RESOLUTION: usize = 24;

/// Relative change allowed when the resolution is doubled.
pub const REFINEMENT_TOL: f64 = 1e-8;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn mapped(n: usize, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (hi - lo);
    x.iter()
        .zip(&w)
        .map(|(&t, &wt)| (lo + half * (t + 1.0), half * wt))
        .collect()
}

/// Distance from the origin to the cell boundary along direction `phi`.
fn edge_distance(lattice: &LatticeSpec, phi: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    let rx = if c.abs() > 0.0 { 0.5 * lattice.tau1() / c.abs() } else { f64::INFINITY };
    let ry = if s.abs() > 0.0 { 0.5 * lattice.tau2() / s.abs() } else { f64::INFINITY };
    rx.min(ry)
}

/// `int_{S_ex} f dS` with the exterior panel rule of resolution `n`.
fn exterior_integral<T, F>(lattice: &LatticeSpec, n: usize, f: F) -> Result<T>
where
    T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
    F: Fn(Point) -> Result<T>,
{
    let phic = lattice.tau2().atan2(lattice.tau1());
    let panels = [
        (-phic, phic),
        (phic, PI - phic),
        (PI - phic, PI + phic),
        (PI + phic, TAU - phic),
    ];
    let a = lattice.radius();
    let mut total = T::default();
    for (lo, hi) in panels {
        for (phi, wphi) in mapped(n, lo, hi) {
            let rmax = edge_distance(lattice, phi);
            for (s, ws) in mapped(n, a.ln(), rmax.ln()) {
                let r = s.exp();
                total = total + f(Point::from_polar(r, phi))? * (wphi * ws * r * r);
            }
        }
    }
    Ok(total)
}

/// `int_{S_in} f dS`: Gauss in `r`, trapezoid in the angle.
fn interior_integral<F>(lattice: &LatticeSpec, n: usize, f: F) -> f64
where
    F: Fn(Point) -> f64,
{
    let m = 4 * n;
    let mut total = 0.0;
    for (r, wr) in mapped(n, 0.0, lattice.radius()) {
        for k in 0..m {
            let phi = TAU * k as f64 / m as f64;
            total += f(Point::from_polar(r, phi)) * wr * r * TAU / m as f64;
        }
    }
    total
}

fn energy(
    lattice: &LatticeSpec,
    u: &FirstCorrector<'_>,
    n: usize,
) -> Result<f64> {
    let inv_eps = 1.0 / lattice.eps_in();
    let inner = interior_integral(lattice, n, |p| {
        let g = u
            .branch_gradient(p, Region::Inside)
            .expect("interior gradient is polynomial");
        inv_eps * (g[0] * g[0] + g[1] * g[1])
    });
    let outer: f64 = exterior_integral(lattice, n, |p| {
        let g = u.branch_gradient(p, Region::Outside)?;
        Ok(g[0] * g[0] + g[1] * g[1])
    })?;
    Ok((inner + outer) / lattice.area())
}

/// `lambda2` as the cell energy of `u1~` with the given coefficients.
///
/// The integral is evaluated at `grid_resolution` and at twice that; the
/// finer value is returned if the two agree to [`REFINEMENT_TOL`].
pub fn lambda2_quadrature(
    lattice: &LatticeSpec,
    elliptic: &EllipticData,
    coeffs: &MultipoleCoeffs,
    grid_resolution: usize,
) -> Result<f64> {
    if grid_resolution < 2 {
        return Err(EmhError::Domain("quadrature resolution must be at least 2".into()));
    }
    let variant = if coeffs.has_octupole() {
        Variant::Octupole
    } else {
        Variant::Dipole
    };
    let u = FirstCorrector::new(lattice, elliptic, *coeffs, variant);
    let coarse = energy(lattice, &u, grid_resolution)?;
    let fine = energy(lattice, &u, 2 * grid_resolution)?;
    let change = ((fine - coarse) / fine).abs();
    if change > REFINEMENT_TOL {
        return Err(EmhError::Resolution(change));
    }
    Ok(fine)
}

/// `int_{S_ex} zeta'(z) dS` over the cell minus the cylinder.
pub fn exterior_zeta_prime_integral(
    lattice: &LatticeSpec,
    elliptic: &EllipticData,
    grid_resolution: usize,
) -> Result<Complex64> {
    exterior_integral(lattice, grid_resolution, |p| Ok(elliptic.zeta(p.z())?.d1))
}
