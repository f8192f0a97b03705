//! Multipole coefficients and the approximate Bloch-field correctors
//! `u1~`, `u2~`, `u3~`.
//!
//! Points are cell coordinates `(x, y)` with the cylinder centred at the
//! origin; `z = x + i y`. All correctors are purely imaginary or purely real
//! multiples of real functions, but values are returned as complex numbers.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::elliptic::EllipticData;
use crate::error::{EmhError, Result};
use crate::lattice::LatticeSpec;

/// Default number of equispaced angles used by [`boundary_residual`].
pub const DEFAULT_BOUNDARY_SAMPLES: usize = 256;

/// Smallest accepted number of boundary samples.
pub const MIN_BOUNDARY_SAMPLES: usize = 64;

/// Quasimomentum `q (cos theta, sin theta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochParams {
    q: f64,
    theta: f64,
}

impl BlochParams {
    /// `theta` is reduced to `[0, 2 pi)`.
    pub fn new(q: f64, theta: f64) -> Result<Self> {
        if !(q.is_finite() && q >= 0.0) {
            return Err(EmhError::Domain(format!(
                "quasimomentum must be finite and nonnegative, got {q}"
            )));
        }
        if !theta.is_finite() {
            return Err(EmhError::Domain(format!("angle must be finite, got {theta}")));
        }
        let mut theta = theta.rem_euclid(TAU);
        if theta >= TAU {
            theta = 0.0;
        }
        Ok(Self { q, theta })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Unit propagation direction.
    pub fn q_hat(&self) -> [f64; 2] {
        [self.theta.cos(), self.theta.sin()]
    }

    /// Cartesian quasimomentum.
    pub fn q_vector(&self) -> [f64; 2] {
        let [c, s] = self.q_hat();
        [self.q * c, self.q * s]
    }
}

/// Dipole (`A1..D1`) and octupole (`A2..D2`) coefficients for one direction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MultipoleCoeffs {
    pub theta: f64,
    pub a1: f64,
    pub b1: f64,
    pub c1: f64,
    pub d1: f64,
    pub a2: f64,
    pub b2: f64,
    pub c2: f64,
    pub d2: f64,
}

impl MultipoleCoeffs {
    pub fn has_octupole(&self) -> bool {
        self.a2 != 0.0 || self.b2 != 0.0 || self.c2 != 0.0 || self.d2 != 0.0
    }

    /// The eight coefficients in the order `A1, B1, C1, D1, A2, B2, C2, D2`.
    pub fn as_array(&self) -> [f64; 8] {
        [
            self.a1, self.b1, self.c1, self.d1, self.a2, self.b2, self.c2, self.d2,
        ]
    }
}

/// `(1 + 2 alpha eta1 a^2 / tau1)^-1` and `(1 + 2 alpha eta2~ a^2 / tau2)^-1`.
fn denominators(lattice: &LatticeSpec, elliptic: &EllipticData) -> (f64, f64) {
    let alpha = lattice.alpha();
    let a2 = lattice.radius().powi(2);
    let x1 = 2.0 * alpha * elliptic.eta1() * a2 / lattice.tau1();
    let x2 = 2.0 * alpha * elliptic.eta2_tilde() * a2 / lattice.tau2();
    (1.0 / (1.0 + x1), 1.0 / (1.0 + x2))
}

/// Dipole coefficients; the octupole entries are zero.
pub fn dipole_coeffs(lattice: &LatticeSpec, elliptic: &EllipticData, theta: f64) -> MultipoleCoeffs {
    let eps = lattice.eps_in();
    let alpha = lattice.alpha();
    let (g1, g2) = denominators(lattice, elliptic);
    let (s, c) = theta.sin_cos();
    let inner = 2.0 * eps / (eps + 1.0);
    MultipoleCoeffs {
        theta,
        a1: inner * g1 * c,
        b1: inner * g2 * s,
        c1: alpha * g1 * c,
        d1: alpha * g2 * s,
        ..Default::default()
    }
}

/// Octupole coefficients; the dipole entries are zero.
pub fn octupole_coeffs(lattice: &LatticeSpec, elliptic: &EllipticData, theta: f64) -> MultipoleCoeffs {
    let eps = lattice.eps_in();
    let alpha = lattice.alpha();
    let a2 = lattice.radius().powi(2);
    let s4 = elliptic.s4();
    let (g1, g2) = denominators(lattice, elliptic);
    let (s, c) = theta.sin_cos();
    let inner = 2.0 * alpha * a2 * eps * s4 / (eps + 1.0);
    let outer = 0.5 * alpha * alpha * a2 * a2 * s4;
    MultipoleCoeffs {
        theta,
        a2: -inner * g1 * c,
        b2: inner * g2 * s,
        c2: -outer * g1 * c,
        d2: outer * g2 * s,
        ..Default::default()
    }
}

/// Dipole and octupole coefficients together.
pub fn multipole_coeffs(lattice: &LatticeSpec, elliptic: &EllipticData, theta: f64) -> MultipoleCoeffs {
    let o = octupole_coeffs(lattice, elliptic, theta);
    MultipoleCoeffs {
        a2: o.a2,
        b2: o.b2,
        c2: o.c2,
        d2: o.d2,
        ..dipole_coeffs(lattice, elliptic, theta)
    }
}

/// Evaluation point in cell coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(r: f64, phi: f64) -> Self {
        Self {
            x: r * phi.cos(),
            y: r * phi.sin(),
        }
    }

    pub fn r(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn phi(&self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }
}

impl std::ops::Neg for Point {
    type Output = Point;

    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Inside,
    Outside,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldValue {
    pub value: Complex64,
    pub region: Region,
}

/// Whether `u1~` carries the octupole terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Dipole,
    Octupole,
}

/// The first corrector `u1~` for fixed coefficients.
#[derive(Debug, Clone, Copy)]
pub struct FirstCorrector<'a> {
    lattice: &'a LatticeSpec,
    elliptic: &'a EllipticData,
    coeffs: MultipoleCoeffs,
    octupole: bool,
    q_hat: [f64; 2],
}

impl<'a> FirstCorrector<'a> {
    pub fn new(
        lattice: &'a LatticeSpec,
        elliptic: &'a EllipticData,
        coeffs: MultipoleCoeffs,
        variant: Variant,
    ) -> Self {
        Self {
            lattice,
            elliptic,
            coeffs,
            octupole: variant == Variant::Octupole,
            q_hat: [coeffs.theta.cos(), coeffs.theta.sin()],
        }
    }

    fn region(&self, p: Point) -> Result<Region> {
        let r = p.r();
        let a = self.lattice.radius();
        if r < a {
            Ok(Region::Inside)
        } else if r > a {
            Ok(Region::Outside)
        } else {
            Err(EmhError::Domain(
                "u1 is two-valued on r = a; use boundary_residual".into(),
            ))
        }
    }

    /// `u1~ / i` inside (real).
    fn inner_value(&self, p: Point) -> f64 {
        let c = &self.coeffs;
        let mut v = c.a1 * p.x + c.b1 * p.y;
        if self.octupole {
            let z3 = p.z().powi(3);
            v += c.a2 * z3.re + c.b2 * z3.im;
        }
        v
    }

    fn inner_gradient(&self, p: Point) -> [f64; 2] {
        let c = &self.coeffs;
        let mut g = [c.a1, c.b1];
        if self.octupole {
            let w = 3.0 * Complex64::new(c.a2, -c.b2) * p.z() * p.z();
            g[0] += w.re;
            g[1] -= w.im;
        }
        g
    }

    /// `u1~ / i` outside (real).
    fn outer_value(&self, p: Point) -> Result<f64> {
        let c = &self.coeffs;
        let e = self.elliptic;
        let a2 = self.lattice.radius().powi(2);
        let zv = e.zeta(p.z())?;
        let cc = Complex64::new(c.c1, c.d1);
        let linear = -2.0 * e.eta1() / e.tau1() * c.c1 * p.x
            - 2.0 * e.eta2_tilde() / e.tau2() * c.d1 * p.y;
        let mut v = self.q_hat[0] * p.x + self.q_hat[1] * p.y + a2 * ((cc * zv.value).re + linear);
        if self.octupole {
            v += a2 * a2 * (Complex64::new(c.c2, c.d2) * zv.d2).re;
        }
        Ok(v)
    }

    fn outer_gradient(&self, p: Point) -> Result<[f64; 2]> {
        let c = &self.coeffs;
        let e = self.elliptic;
        let a2 = self.lattice.radius().powi(2);
        let zv = e.zeta(p.z())?;
        let w = Complex64::new(c.c1, c.d1) * zv.d1;
        let mut g = [
            self.q_hat[0] + a2 * (w.re - 2.0 * e.eta1() / e.tau1() * c.c1),
            self.q_hat[1] + a2 * (-w.im - 2.0 * e.eta2_tilde() / e.tau2() * c.d1),
        ];
        if self.octupole {
            let w = Complex64::new(c.c2, c.d2) * zv.d3;
            g[0] += a2 * a2 * w.re;
            g[1] -= a2 * a2 * w.im;
        }
        Ok(g)
    }

    pub fn value(&self, p: Point) -> Result<FieldValue> {
        let region = self.region(p)?;
        let v = match region {
            Region::Inside => self.inner_value(p),
            Region::Outside => self.outer_value(p)?,
        };
        Ok(FieldValue {
            value: Complex64::new(0.0, v),
            region,
        })
    }

    /// `grad u1~`; both components are `i` times a real number.
    pub fn gradient(&self, p: Point) -> Result<(Region, [Complex64; 2])> {
        let region = self.region(p)?;
        let g = match region {
            Region::Inside => self.inner_gradient(p),
            Region::Outside => self.outer_gradient(p)?,
        };
        Ok((region, [Complex64::new(0.0, g[0]), Complex64::new(0.0, g[1])]))
    }

    /// Real gradient of `u1~ / i` on a chosen branch, valid at any point the
    /// branch is defined (used on the circle and by the quadrature).
    pub fn branch_gradient(&self, p: Point, region: Region) -> Result<[f64; 2]> {
        match region {
            Region::Inside => Ok(self.inner_gradient(p)),
            Region::Outside => self.outer_gradient(p),
        }
    }

    /// Max-norm jumps of the value and of `(1/eps) du/dr` across `r = a`.
    pub fn boundary_residual(&self, n_samples: usize) -> Result<BoundaryResidual> {
        if n_samples < MIN_BOUNDARY_SAMPLES {
            return Err(EmhError::Domain(format!(
                "boundary residual needs at least {MIN_BOUNDARY_SAMPLES} samples, got {n_samples}"
            )));
        }
        let a = self.lattice.radius();
        let inv_eps = 1.0 / self.lattice.eps_in();
        let mut value_jump: f64 = 0.0;
        let mut flux_jump: f64 = 0.0;
        for j in 0..n_samples {
            let phi = TAU * j as f64 / n_samples as f64;
            let (s, c) = phi.sin_cos();
            let p = Point::new(a * c, a * s);
            let vin = self.inner_value(p);
            let vout = self.outer_value(p)?;
            let gin = self.inner_gradient(p);
            let gout = self.outer_gradient(p)?;
            let din = gin[0] * c + gin[1] * s;
            let dout = gout[0] * c + gout[1] * s;
            value_jump = value_jump.max((vout - vin).abs());
            flux_jump = flux_jump.max((dout - inv_eps * din).abs());
        }
        Ok(BoundaryResidual {
            value_jump,
            flux_jump,
        })
    }
}

/// `u1~` at a point.
pub fn u1_tilde(
    lattice: &LatticeSpec,
    elliptic: &EllipticData,
    coeffs: &MultipoleCoeffs,
    point: Point,
    variant: Variant,
) -> Result<FieldValue> {
    FirstCorrector::new(lattice, elliptic, *coeffs, variant).value(point)
}

fn phase(theta: f64, p: Point) -> f64 {
    theta.cos() * p.x + theta.sin() * p.y
}

fn piecewise_eps(lattice: &LatticeSpec, p: Point) -> (f64, Region) {
    if p.r() < lattice.radius() {
        (lattice.eps_in(), Region::Inside)
    } else {
        (1.0, Region::Outside)
    }
}

/// `u2~ = (eps/2) (i q.r)^2` inside, `(1/2) (i q.r)^2` outside.
pub fn u2_tilde(lattice: &LatticeSpec, theta: f64, point: Point) -> FieldValue {
    let (eps, region) = piecewise_eps(lattice, point);
    let t = Complex64::new(0.0, phase(theta, point));
    FieldValue {
        value: 0.5 * eps * t * t,
        region,
    }
}

/// `u3~ = (eps/6) (i q.r)^3` inside, `(1/6) (i q.r)^3` outside.
pub fn u3_tilde(lattice: &LatticeSpec, theta: f64, point: Point) -> FieldValue {
    let (eps, region) = piecewise_eps(lattice, point);
    let t = Complex64::new(0.0, phase(theta, point));
    FieldValue {
        value: eps / 6.0 * t * t * t,
        region,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryResidual {
    pub value_jump: f64,
    pub flux_jump: f64,
}

/// Transmission-condition residuals of `u1~` on the circle `r = a`.
pub fn boundary_residual(
    lattice: &LatticeSpec,
    elliptic: &EllipticData,
    coeffs: &MultipoleCoeffs,
    n_samples: usize,
    variant: Variant,
) -> Result<BoundaryResidual> {
    FirstCorrector::new(lattice, elliptic, *coeffs, variant).boundary_residual(n_samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::loglog_slope;
    use std::f64::consts::PI;

    fn setup(t1: f64, t2: f64, a: f64, eps: f64) -> (LatticeSpec, EllipticData) {
        let l = LatticeSpec::new(t1, t2, a, eps).unwrap();
        let e = EllipticData::new(&l).unwrap();
        (l, e)
    }

    #[test]
    fn theta_is_reduced() {
        let b = BlochParams::new(0.1, -PI / 2.0).unwrap();
        assert!((b.theta() - 1.5 * PI).abs() < 1e-15);
        assert!(BlochParams::new(-0.1, 0.0).is_err());
        assert!(BlochParams::new(0.1, f64::NAN).is_err());
    }

    #[test]
    fn reference_dipole_values() {
        let (l, e) = setup(1.0, 1.0, 0.1, 2.0);
        let c = dipole_coeffs(&l, &e, 0.0);
        let g = 1.0 + PI / 3.0 * 0.01;
        assert!((c.a1 - (4.0 / 3.0) / g).abs() < 1e-14);
        assert!((c.c1 - (1.0 / 3.0) / g).abs() < 1e-14);
        assert!((c.a1 - 1.319_52).abs() < 1e-5);
        assert!((c.c1 - 0.329_88).abs() < 1e-5);
        assert_eq!(c.b1, 0.0);
        assert_eq!(c.d1, 0.0);
        let c = dipole_coeffs(&l, &e, PI / 2.0);
        assert!(c.a1.abs() < 1e-16 && c.c1.abs() < 1e-16);
        assert!((c.b1 - (4.0 / 3.0) / g).abs() < 1e-14);
    }

    #[test]
    fn reference_octupole_values() {
        let (l, e) = setup(1.0, 1.0, 0.1, 2.0);
        let c = octupole_coeffs(&l, &e, 0.0);
        let g = 1.0 + PI / 3.0 * 0.01;
        let s4 = 3.151_212_002_153_897_5;
        let a2 = -2.0 * (1.0 / 3.0) * 0.01 * 2.0 * s4 / 3.0 / g;
        assert!((c.a2 - a2).abs() < 1e-15);
        let ratio = c.c2 / c.a2;
        assert!((ratio - (1.0 / 3.0) * 0.01 * 3.0 / 8.0).abs() < 1e-15);
        let c = octupole_coeffs(&l, &e, 2.0);
        assert!((c.c2 / c.a2 - ratio).abs() < 1e-14);
        assert!(c.b2 > 0.0 && c.d2 > 0.0);
    }

    #[test]
    fn homogeneous_medium_collapses() {
        let (l, e) = setup(1.0, 1.7, 0.2, 1.0);
        for theta in [0.0, 0.4, 2.5] {
            let c = multipole_coeffs(&l, &e, theta);
            assert!((c.a1 - theta.cos()).abs() < 1e-15);
            assert!((c.b1 - theta.sin()).abs() < 1e-15);
            for v in [c.c1, c.d1, c.a2, c.b2, c.c2, c.d2] {
                assert_eq!(v, 0.0);
            }
            let u = FirstCorrector::new(&l, &e, c, Variant::Octupole);
            let p = Point::new(0.31, -0.42);
            let v = u.value(p).unwrap().value;
            assert!((v.im - phase(theta, p)).abs() < 1e-15);
            let r = u.boundary_residual(256).unwrap();
            assert!(r.value_jump < 1e-12 && r.flux_jump < 1e-12);
        }
    }

    #[test]
    fn origin_and_regions() {
        let (l, e) = setup(1.0, 1.0, 0.1, 3.0);
        let c = multipole_coeffs(&l, &e, 0.7);
        let u = FirstCorrector::new(&l, &e, c, Variant::Octupole);
        let v = u.value(Point::new(0.0, 0.0)).unwrap();
        assert_eq!(v.value, Complex64::new(0.0, 0.0));
        assert_eq!(v.region, Region::Inside);
        assert_eq!(u.value(Point::new(0.3, 0.0)).unwrap().region, Region::Outside);
        assert!(u.value(Point::new(0.1, 0.0)).is_err());
        assert!(matches!(u.value(Point::new(1.0, 0.0)), Err(EmhError::Pole { .. })));
        assert_eq!(u2_tilde(&l, 0.7, Point::new(0.0, 0.0)).value.norm(), 0.0);
        assert_eq!(u3_tilde(&l, 0.7, Point::new(0.0, 0.0)).value.norm(), 0.0);
    }

    #[test]
    fn u2_jump_on_circle() {
        let l = LatticeSpec::square(0.2, 2.5).unwrap();
        let theta = 0.9;
        for k in 0..16 {
            let phi = TAU * k as f64 / 16.0;
            let pin = Point::from_polar(0.2 * (1.0 - 1e-12), phi);
            let pout = Point::from_polar(0.2 * (1.0 + 1e-12), phi);
            let jump = u2_tilde(&l, theta, pin).value - u2_tilde(&l, theta, pout).value;
            let t = Complex64::new(0.0, phase(theta, Point::from_polar(0.2, phi)));
            let want = 0.5 * (2.5 - 1.0) * t * t;
            assert!((jump - want).norm() < 1e-11);
        }
    }

    #[test]
    fn exterior_periodicity() {
        for (t1, t2) in [(1.0, 1.0), (1.0, 1.6), (2.2, 1.0)] {
            let (l, e) = setup(t1, t2, 0.15, 2.0);
            let theta = 0.6;
            let c = multipole_coeffs(&l, &e, theta);
            let u = FirstCorrector::new(&l, &e, c, Variant::Octupole);
            let f = |p: Point| u.value(p).unwrap().value.im - phase(theta, p);
            for k in 0..9 {
                let s = (k as f64 / 8.0 - 0.5) * 0.98;
                let y = s * t2;
                assert!((f(Point::new(t1 / 2.0, y)) - f(Point::new(-t1 / 2.0, y))).abs() < 1e-8);
                let x = s * t1;
                assert!((f(Point::new(x, t2 / 2.0)) - f(Point::new(x, -t2 / 2.0))).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn exterior_is_harmonic() {
        let (l, e) = setup(1.0, 1.4, 0.1, 4.0);
        let c = multipole_coeffs(&l, &e, 1.1);
        let u = FirstCorrector::new(&l, &e, c, Variant::Octupole);
        let f = |x: f64, y: f64| u.value(Point::new(x, y)).unwrap().value.im;
        let p = (0.23, -0.31);
        let lap = |h: f64| {
            (f(p.0 + h, p.1) + f(p.0 - h, p.1) + f(p.0, p.1 + h) + f(p.0, p.1 - h)
                - 4.0 * f(p.0, p.1))
                / (h * h)
        };
        let hs = [0.04, 0.02, 0.01];
        let l: Vec<f64> = hs.iter().map(|&h| lap(h)).collect();
        let slope = loglog_slope(&hs, &l);
        assert!((slope - 2.0).abs() < 0.1, "{slope} {l:?}");
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let (l, e) = setup(1.0, 1.3, 0.12, 2.0);
        let c = multipole_coeffs(&l, &e, 0.3);
        let u = FirstCorrector::new(&l, &e, c, Variant::Octupole);
        let h = 1e-6;
        for p in [Point::new(0.05, -0.03), Point::new(0.3, 0.2), Point::new(-0.4, 0.55)] {
            let (_, g) = u.gradient(p).unwrap();
            let f = |q: Point| u.value(q).unwrap().value.im;
            let gx = (f(Point::new(p.x + h, p.y)) - f(Point::new(p.x - h, p.y))) / (2.0 * h);
            let gy = (f(Point::new(p.x, p.y + h)) - f(Point::new(p.x, p.y - h))) / (2.0 * h);
            assert!((g[0].im - gx).abs() < 1e-8, "{} {}", g[0].im, gx);
            assert!((g[1].im - gy).abs() < 1e-8);
        }
    }

    fn residual_slopes(t1: f64, t2: f64, theta: f64, variant: Variant) -> (f64, f64) {
        let radii = [0.05, 0.1, 0.2];
        let mut vals = Vec::new();
        let mut flux = Vec::new();
        for a in radii {
            let (l, e) = setup(t1, t2, a, 2.0);
            let c = match variant {
                Variant::Dipole => dipole_coeffs(&l, &e, theta),
                Variant::Octupole => multipole_coeffs(&l, &e, theta),
            };
            let r = boundary_residual(&l, &e, &c, DEFAULT_BOUNDARY_SAMPLES, variant).unwrap();
            vals.push(r.value_jump);
            flux.push(r.flux_jump);
        }
        (loglog_slope(&radii, &vals), loglog_slope(&radii, &flux))
    }

    #[test]
    fn dipole_residual_order() {
        for (t1, t2) in [(1.0, 1.0), (1.0, 1.5)] {
            let (v, _) = residual_slopes(t1, t2, 0.4, Variant::Dipole);
            assert!(v >= 4.5, "({t1},{t2}) {v}");
        }
    }

    #[test]
    fn octupole_residual_order() {
        for (t1, t2) in [(1.0, 1.0), (1.0, 1.5), (2.0, 1.0)] {
            let (v, f) = residual_slopes(t1, t2, 0.4, Variant::Octupole);
            assert!(v >= 6.5, "({t1},{t2}) value slope {v}");
            assert!(f >= 5.5, "({t1},{t2}) flux slope {f}");
        }
    }

    #[test]
    fn too_few_samples_rejected() {
        let (l, e) = setup(1.0, 1.0, 0.1, 2.0);
        let c = dipole_coeffs(&l, &e, 0.0);
        assert!(boundary_residual(&l, &e, &c, 32, Variant::Dipole).is_err());
    }
}
