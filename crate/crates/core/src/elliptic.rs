//! Weierstrass zeta-function and lattice sums for rectangular lattices.
//!
//! The lattice nodes are `P = m tau1 + i n tau2`. Two independent evaluation
//! paths are provided for `zeta`:
//!
//! * the Laurent series `1/z - sum_{k>=2} s_{2k} z^{2k-1}`, valid for `|z|`
//!   below the distance to the nearest nonzero node, using stored lattice
//!   sums `s_{2k}`;
//! * the defining lattice series summed row by row, where the sum over each
//!   row of nodes is done in closed form (`pi/tau cot`), so rows decay like
//!   `exp(-2 pi n tau_long / tau_short)`.
//!
//! Rows always run along the shorter period. A lattice with `tau1 > tau2` is
//! handled through `zeta(z; L) = -i zeta(-i z; L')` where `L'` has the periods
//! exchanged.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{EmhError, Result};
use crate::lattice::LatticeSpec;

/// Default ring radius for the truncated lattice sum.
pub const DEFAULT_RING_RADIUS: usize = 200;

/// Highest `k` for which `s_{2k}` is stored (`s_4 ... s_48`).
pub const MAX_SUM_INDEX: usize = 24;

/// Default cap on the number of row pairs in the direct zeta path.
pub const DEFAULT_ROW_CAP: usize = 64;

/// Laurent path is used for `|z| < SWITCH_FRACTION * min(tau1, tau2)`.
pub const SWITCH_FRACTION: f64 = 0.4;

/// Imaginary residual allowed for symmetric real quantities.
pub const REALITY_TOL: f64 = 1e-12;

/// Imaginary residual allowed for the quasi-period constants.
pub const ETA_REALITY_TOL: f64 = 1e-10;

const POLE_TOL: f64 = 1e-12;

/// `zeta` and its first three derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaValue {
    pub value: Complex64,
    /// `zeta'(z) = -wp(z)`
    pub d1: Complex64,
    pub d2: Complex64,
    pub d3: Complex64,
}

impl ZetaValue {
    fn rotate_back(self) -> Self {
        // zeta(z; L) = -i g(-i z) where g is zeta of the transposed lattice.
        let i = Complex64::i();
        Self {
            value: -i * self.value,
            d1: -self.d1,
            d2: i * self.d2,
            d3: self.d3,
        }
    }
}

/// Truncated lattice sum `sum' (m tau1 + i n tau2)^(-2k)` over the square
/// rings `0 < max(|m|, |n|) <= truncation_radius`.
///
/// The ring ordering makes the imaginary part cancel by the 2-fold symmetry
/// of the lattice; a residual above [`REALITY_TOL`] is reported as an error.
pub fn lattice_sum(lattice: &LatticeSpec, k: u32, truncation_radius: usize) -> Result<f64> {
    if k < 2 {
        return Err(EmhError::Domain(format!(
            "lattice sums need k >= 2, got k = {k}"
        )));
    }
    if truncation_radius == 0 {
        return Err(EmhError::Domain("truncation radius must be positive".into()));
    }
    let (t1, t2) = (lattice.tau1(), lattice.tau2());
    let power = -2 * k as i32;
    let node = |m: i64, n: i64| Complex64::new(m as f64 * t1, n as f64 * t2).powi(power);

    let mut total = Complex64::new(0.0, 0.0);
    for rho in 1..=truncation_radius as i64 {
        let mut ring = Complex64::new(0.0, 0.0);
        for m in -rho..=rho {
            ring += node(m, rho) + node(m, -rho);
        }
        for n in (1 - rho)..rho {
            ring += node(rho, n) + node(-rho, n);
        }
        total += ring;
    }
    if total.im.abs() > REALITY_TOL {
        return Err(EmhError::Symmetry {
            what: "lattice sum",
            residual: total.im,
        });
    }
    Ok(total.re)
}

/// Converged lattice sum `s_{2k}`.
///
/// Each row `n != 0` of nodes is summed exactly with Lipschitz' formula
/// `sum_m (m + i y)^(-2k) = (-2 pi i)^{2k}/(2k-1)! sum_r r^{2k-1} e^{-2 pi r y}`,
/// which after summing over rows gives
/// `s_{2k} = h^{-2k} [2 zeta_R(2k) + 2 (-1)^k (2 pi)^{2k}/(2k-1)! sum_r r^{2k-1} q^r/(1-q^r)]`
/// with `h` the shorter period and `q = exp(-2 pi t)`, `t >= 1` the aspect ratio.
pub fn lattice_sum_converged(tau1: f64, tau2: f64, k: u32) -> Result<f64> {
    if k < 2 {
        return Err(EmhError::Domain(format!(
            "lattice sums need k >= 2, got k = {k}"
        )));
    }
    if tau1 <= tau2 {
        Ok(row_lattice_sum(tau1, tau2, k))
    } else {
        // P = i P' with P' on the transposed lattice, so P^{-2k} = (-1)^k P'^{-2k}.
        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(sign * row_lattice_sum(tau2, tau1, k))
    }
}

fn row_lattice_sum(short: f64, long: f64, k: u32) -> f64 {
    let t = long / short;
    let p = 2 * k;
    let ln_q = -2.0 * PI * t;
    // (2 pi)^{2k} / (2k-1)!, in logs
    let ln_pref = p as f64 * (2.0 * PI).ln() - ln_factorial(p - 1);
    let peak = (p - 1) as f64 / (-ln_q);

    let mut series = 0.0;
    let mut r = 1u32;
    loop {
        let rf = r as f64;
        let qr = (rf * ln_q).exp();
        let term = (ln_pref + (p - 1) as f64 * rf.ln() + rf * ln_q).exp() / (1.0 - qr);
        series += term;
        if rf > peak && term <= 1e-18 * series.abs().max(1.0) {
            break;
        }
        r += 1;
        if r > 10_000 {
            break;
        }
    }
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let scaled = 2.0 * riemann_zeta(p as f64) + 2.0 * sign * series;
    scaled * short.powi(-(p as i32))
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|j| (j as f64).ln()).sum()
}

/// Riemann zeta for real `s >= 4`: partial sum plus Euler-Maclaurin tail.
fn riemann_zeta(s: f64) -> f64 {
    const N: u32 = 30;
    let head: f64 = (1..N).rev().map(|n| (n as f64).powf(-s)).sum();
    let n = N as f64;
    let fnn = n.powf(-s);
    let tail = n.powf(1.0 - s) / (s - 1.0) + 0.5 * fnn + s * fnn / (12.0 * n)
        - s * (s + 1.0) * (s + 2.0) * fnn / (720.0 * n.powi(3))
        + s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * fnn / (30240.0 * n.powi(5));
    head + tail
}

/// Quasi-period constants `eta1 = zeta(tau1/2)` and `eta2~ = i zeta(i tau2/2)`,
/// both real for a rectangular lattice.
pub fn eta_constants(lattice: &LatticeSpec, truncation_radius: usize) -> Result<(f64, f64)> {
    let (t1, t2) = (lattice.tau1(), lattice.tau2());
    let z1 = zeta_direct(t1, t2, Complex64::new(0.5 * t1, 0.0), truncation_radius)?.value;
    let z2 = zeta_direct(t1, t2, Complex64::new(0.0, 0.5 * t2), truncation_radius)?.value;
    let eta2_tilde = Complex64::i() * z2;
    for (what, v) in [("eta1", z1), ("eta2_tilde", eta2_tilde)] {
        if v.im.abs() > ETA_REALITY_TOL {
            return Err(EmhError::Convergence(format!(
                "{what} has imaginary residual {:e}; increase truncation radius",
                v.im
            )));
        }
    }
    Ok((z1.re, eta2_tilde.re))
}

/// Zeta by the row-summed defining series (no lattice sums involved).
pub fn zeta_direct(tau1: f64, tau2: f64, z: Complex64, max_rows: usize) -> Result<ZetaValue> {
    check_pole(tau1, tau2, z)?;
    if tau1 <= tau2 {
        zeta_rows(tau1, tau2, z, max_rows)
    } else {
        let w = Complex64::new(z.im, -z.re); // -i z
        zeta_rows(tau2, tau1, w, max_rows).map(ZetaValue::rotate_back)
    }
}

fn check_pole(tau1: f64, tau2: f64, z: Complex64) -> Result<()> {
    let m = (z.re / tau1).round();
    let n = (z.im / tau2).round();
    let d = z - Complex64::new(m * tau1, n * tau2);
    if d.norm() < POLE_TOL {
        return Err(EmhError::Pole { re: z.re, im: z.im });
    }
    Ok(())
}

/// `cot(w)` and `csc^2(w)`, stable for large `|Im w|`.
fn cot_csc2(w: Complex64) -> (Complex64, Complex64) {
    let i = Complex64::i();
    if w.im > 1.0 {
        let e = (2.0 * i * w).exp();
        let one_m = 1.0 - e;
        (-i * (1.0 + e) / one_m, -4.0 * e / (one_m * one_m))
    } else if w.im < -1.0 {
        let e = (-2.0 * i * w).exp();
        let one_m = 1.0 - e;
        (i * (1.0 + e) / one_m, -4.0 * e / (one_m * one_m))
    } else {
        let s = w.sin();
        (w.cos() / s, 1.0 / (s * s))
    }
}

/// Rows along the real period `h`, stacked with spacing `v` in the imaginary
/// direction.
fn zeta_rows(h: f64, v: f64, z: Complex64, max_rows: usize) -> Result<ZetaValue> {
    let k = PI / h;
    let k2 = k * k;

    let (c, s2) = cot_csc2(k * z);
    let mut value = k * c + z * (k2 / 3.0);
    let mut d1 = -k2 * s2 + k2 / 3.0;
    let mut d2 = 2.0 * k2 * k * c * s2;
    let mut d3 = -2.0 * k2 * k2 * s2 * (s2 + 2.0 * c * c);
    if !(value.is_finite() && d3.is_finite()) {
        return Err(EmhError::Pole { re: z.re, im: z.im });
    }

    let reach = z.im.abs() / v;
    let mut n = 1usize;
    loop {
        if n > max_rows {
            return Err(EmhError::Convergence(format!(
                "direct zeta sum needs more than {max_rows} row pairs at z = {z}"
            )));
        }
        let y = n as f64 * v;
        let shift = Complex64::new(0.0, k * y);
        let (cp, sp) = cot_csc2(k * z - shift);
        let (cm, sm) = cot_csc2(k * z + shift);
        // The constant parts -cot(-iky) - cot(iky) of the pair cancel exactly;
        // csc^2(+-iky) = -1/sinh^2(ky).
        let sinh2 = (k * y).sinh().powi(2);
        let dv = k * (cp + cm) - z * (2.0 * k2 / sinh2);
        let dd1 = -k2 * (sp + sm) - 2.0 * k2 / sinh2;
        let dd2 = 2.0 * k2 * k * (cp * sp + cm * sm);
        let dd3 = -2.0 * k2 * k2 * (sp * (sp + 2.0 * cp * cp) + sm * (sm + 2.0 * cm * cm));
        if !(dv.is_finite() && dd3.is_finite()) {
            return Err(EmhError::Pole { re: z.re, im: z.im });
        }
        value += dv;
        d1 += dd1;
        d2 += dd2;
        d3 += dd3;

        let scale = 1.0 + value.norm() + d1.norm() + d2.norm() + d3.norm();
        let change = dv.norm() + dd1.norm() + dd2.norm() + dd3.norm();
        if n as f64 > reach + 1.0 && change <= 1e-17 * scale {
            break;
        }
        n += 1;
    }
    Ok(ZetaValue { value, d1, d2, d3 })
}

/// Lattice sums and quasi-period constants for one rectangular lattice.
///
/// Immutable after construction; `Send + Sync`.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticData {
    tau1: f64,
    tau2: f64,
    /// `sums[k - 2] = s_{2k}` for `k = 2..=MAX_SUM_INDEX`.
    sums: Vec<f64>,
    eta1: f64,
    eta2_tilde: f64,
    truncation_radius: usize,
}

impl EllipticData {
    pub fn new(lattice: &LatticeSpec) -> Result<Self> {
        Self::with_truncation(lattice, DEFAULT_ROW_CAP)
    }

    /// `truncation_radius` caps the number of row pairs of the direct path.
    pub fn with_truncation(lattice: &LatticeSpec, truncation_radius: usize) -> Result<Self> {
        let (tau1, tau2) = (lattice.tau1(), lattice.tau2());
        let sums = (2..=MAX_SUM_INDEX as u32)
            .map(|k| lattice_sum_converged(tau1, tau2, k))
            .collect::<Result<Vec<_>>>()?;
        let (eta1, eta2_tilde) = eta_constants(lattice, truncation_radius)?;
        let data = Self {
            tau1,
            tau2,
            sums,
            eta1,
            eta2_tilde,
            truncation_radius,
        };
        let residual = data.legendre_residual();
        if residual.abs() > 1e-10 {
            return Err(EmhError::Convergence(format!(
                "Legendre relation residual {residual:e}"
            )));
        }
        Ok(data)
    }

    pub fn tau1(&self) -> f64 {
        self.tau1
    }

    pub fn tau2(&self) -> f64 {
        self.tau2
    }

    pub fn truncation_radius(&self) -> usize {
        self.truncation_radius
    }

    /// `s_{2k}` by its even index `2k` (4, 6, 8, ...).
    pub fn s(&self, two_k: usize) -> Option<f64> {
        if !two_k.is_multiple_of(2) || two_k < 4 {
            return None;
        }
        self.sums.get(two_k / 2 - 2).copied()
    }

    pub fn s4(&self) -> f64 {
        self.sums[0]
    }

    pub fn eta1(&self) -> f64 {
        self.eta1
    }

    pub fn eta2_tilde(&self) -> f64 {
        self.eta2_tilde
    }

    /// `eta2 = zeta(i tau2 / 2) = -i eta2~`.
    pub fn eta2(&self) -> Complex64 {
        Complex64::new(0.0, -self.eta2_tilde)
    }

    /// `eta1 tau2 + eta2~ tau1 - pi`.
    pub fn legendre_residual(&self) -> f64 {
        self.eta1 * self.tau2 + self.eta2_tilde * self.tau1 - PI
    }

    /// Number of stored Laurent terms (`s_4` through `s_{2K}`).
    pub fn laurent_terms(&self) -> usize {
        self.sums.len()
    }

    /// `zeta` with path selection: Laurent inside `0.4 min(tau)`, direct
    /// row sum elsewhere.
    pub fn zeta(&self, z: Complex64) -> Result<ZetaValue> {
        if z.norm() < SWITCH_FRACTION * self.tau1.min(self.tau2) {
            self.zeta_laurent(z, self.sums.len())
        } else {
            self.zeta_direct(z)
        }
    }

    pub fn zeta_direct(&self, z: Complex64) -> Result<ZetaValue> {
        zeta_direct(self.tau1, self.tau2, z, self.truncation_radius)
    }

    /// Laurent series keeping `terms` lattice sums (`s_4 ... s_{2 terms + 2}`).
    pub fn zeta_laurent(&self, z: Complex64, terms: usize) -> Result<ZetaValue> {
        if z.norm() < POLE_TOL {
            return Err(EmhError::Pole { re: z.re, im: z.im });
        }
        let radius = self.tau1.min(self.tau2);
        if z.norm() >= radius {
            return Err(EmhError::Domain(format!(
                "Laurent series diverges at |z| = {} >= {radius}",
                z.norm()
            )));
        }
        let terms = terms.min(self.sums.len());
        let w = z * z;
        let zi = 1.0 / z;
        // Horner in w over k = terms+1 .. 2; powers z^{2k-1}, z^{2k-2}, ...
        let mut p0 = Complex64::new(0.0, 0.0);
        let mut p1 = Complex64::new(0.0, 0.0);
        let mut p2 = Complex64::new(0.0, 0.0);
        let mut p3 = Complex64::new(0.0, 0.0);
        for idx in (0..terms).rev() {
            let k = (idx + 2) as f64;
            let s = self.sums[idx];
            let e = 2.0 * k - 1.0;
            p0 = p0 * w + s;
            p1 = p1 * w + s * e;
            p2 = p2 * w + s * e * (e - 1.0);
            p3 = p3 * w + s * e * (e - 1.0) * (e - 2.0);
        }
        // p0 ~ sum s z^{2k-4}; rebuild exponents from the k = 2 term.
        let z2 = w;
        let z3 = z2 * z;
        let value = zi - p0 * z3;
        let d1 = -zi * zi - p1 * z2;
        let d2 = 2.0 * zi * zi * zi - p2 * z;
        let d3 = -6.0 * zi * zi * zi * zi - p3;
        Ok(ZetaValue {
            value,
            d1,
            d2,
            d3,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // Theta-function values of g2, g3 (40-digit arithmetic), converted to
    // s4 = g2/60, s6 = g3/140 and s8 = 3 s4^2 / 7.
    const S4_SQUARE: f64 = 3.151_212_002_153_897_5;
    const S8_SQUARE: f64 = 4.255_773_035_365_189_5;
    const S4_1X2: f64 = 2.166_458_251_480_804_6;
    const S6_1X2: f64 = 2.031_109_506_261_005_7;
    const S8_1X2: f64 = 2.011_517_723_746_827_9;
    const S12_1X2: f64 = 2.001_158_397_386_476_2;
    const S4_1X15: f64 = 2.206_601_546_891_272_3;
    const S6_1X15: f64 = 1.951_709_719_476_020_1;
    const ETA1_1X2: f64 = 1.644_796_390_649_994_9;
    const ETA2T_1X2: f64 = -0.148_000_127_710_196_59;
    const ETA1_3X1: f64 = -1.793_208_775_655_693_2;
    const ETA2T_3X1: f64 = 1.644_933_809_748_495_5;

    fn lat(t1: f64, t2: f64) -> LatticeSpec {
        LatticeSpec::new(t1, t2, 0.1, 2.0).unwrap()
    }

    #[test]
    fn truncated_sum_square_s4() {
        // Closed form G4(i) = Gamma(1/4)^8 / (960 pi^2); ring tail ~ (1/3) R^-2.
        let gamma_quarter: f64 = 3.625_609_908_221_908_3;
        let exact = gamma_quarter.powi(8) / (960.0 * PI * PI);
        assert!((exact - S4_SQUARE).abs() < 1e-13);
        let s = lattice_sum(&lat(1.0, 1.0), 2, 2000).unwrap();
        assert!((s - 3.1512).abs() < 1e-4);
        assert!((s - exact).abs() < 2e-7, "{}", s - exact);
    }

    #[test]
    fn truncated_sum_square_s6_vanishes() {
        let s = lattice_sum(&lat(1.0, 1.0), 3, 2000).unwrap();
        assert!(s.abs() < 1e-12);
    }

    #[test]
    fn truncated_sum_rectangle_converges_to_row_sum() {
        let l = lat(1.0, 2.0);
        let converged = lattice_sum_converged(1.0, 2.0, 2).unwrap();
        assert!((converged - S4_1X2).abs() < 1e-13);
        let coarse = lattice_sum(&l, 2, 250).unwrap();
        let fine = lattice_sum(&l, 2, 1000).unwrap();
        // The truncation error falls as R^-2 (factor 16 from 250 to 1000).
        let e_coarse = (coarse - converged).abs();
        let e_fine = (fine - converged).abs();
        assert!(e_fine < 1e-6, "{e_fine}");
        assert!(e_coarse / e_fine > 10.0 && e_coarse / e_fine < 25.0);
    }

    #[test]
    fn lattice_sum_rejects_small_k() {
        assert!(matches!(lattice_sum(&lat(1.0, 1.0), 1, 10), Err(EmhError::Domain(_))));
        assert!(matches!(lattice_sum_converged(1.0, 1.0, 0), Err(EmhError::Domain(_))));
    }

    #[test]
    fn converged_sums_match_theta_reference() {
        let cases = [
            (1.0, 1.0, 2, S4_SQUARE),
            (1.0, 1.0, 3, 0.0),
            (1.0, 1.0, 4, S8_SQUARE),
            (1.0, 2.0, 2, S4_1X2),
            (1.0, 2.0, 3, S6_1X2),
            (1.0, 2.0, 4, S8_1X2),
            (1.0, 2.0, 6, S12_1X2),
            (2.0, 1.0, 3, -S6_1X2),
            (1.0, 1.5, 2, S4_1X15),
            (1.0, 1.5, 3, S6_1X15),
        ];
        for (t1, t2, k, want) in cases {
            let got = lattice_sum_converged(t1, t2, k).unwrap();
            assert!((got - want).abs() < 1e-13, "({t1},{t2}) k={k}: {got} vs {want}");
        }
    }

    #[test]
    fn square_eta_constants() {
        let (e1, e2) = eta_constants(&lat(1.0, 1.0), DEFAULT_ROW_CAP).unwrap();
        assert!((e1 - PI / 2.0).abs() < 1e-13);
        assert!((e2 - PI / 2.0).abs() < 1e-13);
    }

    #[test]
    fn rectangle_eta_constants() {
        let (e1, e2) = eta_constants(&lat(1.0, 2.0), DEFAULT_ROW_CAP).unwrap();
        assert!((e1 - ETA1_1X2).abs() < 1e-13);
        assert!((e2 - ETA2T_1X2).abs() < 1e-13);
        assert!((e1 * 2.0 + e2 - PI).abs() < 1e-12);
        let (e1, e2) = eta_constants(&lat(3.0, 1.0), DEFAULT_ROW_CAP).unwrap();
        assert!((e1 - ETA1_3X1).abs() < 1e-13);
        assert!((e2 - ETA2T_3X1).abs() < 1e-13);
    }

    #[test]
    fn zeta_at_half_period_is_eta1() {
        for (t1, t2) in [(1.0, 1.0), (1.0, 1.7), (2.3, 1.0)] {
            let d = EllipticData::new(&lat(t1, t2)).unwrap();
            let z = d.zeta(c(t1 / 2.0, 0.0)).unwrap().value;
            assert!((z.re - d.eta1()).abs() < 1e-14);
            assert!(z.im.abs() < 1e-12);
        }
    }

    #[test]
    fn laurent_and_direct_agree() {
        for (t1, t2) in [(1.0, 1.0), (1.0, 2.0), (2.5, 1.0)] {
            let d = EllipticData::new(&lat(t1, t2)).unwrap();
            for z in [c(0.1, 0.2), c(-0.3, 0.1), c(0.05, -0.02), c(0.25, -0.28)] {
                let a = d.zeta_laurent(z, d.laurent_terms()).unwrap();
                let b = d.zeta_direct(z).unwrap();
                assert!((a.value - b.value).norm() < 1e-12, "{z}: {}", (a.value - b.value).norm());
                assert!((a.d1 - b.d1).norm() < 1e-11);
                assert!((a.d2 - b.d2).norm() < 1e-10);
                assert!((a.d3 - b.d3).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn four_term_laurent_is_not_enough_at_switch_radius() {
        // Only s4..s8: the omitted s12 z^11 term on the unit square is ~1e-5
        // near |z| = 0.35.
        let d = EllipticData::new(&lat(1.0, 1.0)).unwrap();
        let z = c(0.35, 0.0);
        let short = d.zeta_laurent(z, 3).unwrap().value;
        let full = d.zeta_direct(z).unwrap().value;
        let expected_gap = d.s(12).unwrap() * 0.35f64.powi(11);
        assert!(((full - short).re + expected_gap).abs() < 0.1 * expected_gap);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let d = EllipticData::new(&lat(1.0, 1.5)).unwrap();
        let h = 1e-5;
        for z in [c(0.2, 0.1), c(0.45, 0.3), c(-0.1, 0.6)] {
            let v = d.zeta(z).unwrap();
            let p = d.zeta(z + h).unwrap();
            let m = d.zeta(z - h).unwrap();
            let fd1 = (p.value - m.value) / (2.0 * h);
            let fd2 = (p.d1 - m.d1) / (2.0 * h);
            let fd3 = (p.d2 - m.d2) / (2.0 * h);
            assert!((fd1 - v.d1).norm() < 1e-7 * (1.0 + v.d1.norm()));
            assert!((fd2 - v.d2).norm() < 1e-6 * (1.0 + v.d2.norm()));
            assert!((fd3 - v.d3).norm() < 1e-5 * (1.0 + v.d3.norm()));
        }
    }

    #[test]
    fn pole_is_reported() {
        let d = EllipticData::new(&lat(1.0, 2.0)).unwrap();
        for z in [c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 2.0), c(3.0, -4.0)] {
            assert!(matches!(d.zeta(z), Err(EmhError::Pole { .. })), "{z}");
        }
        assert!(matches!(d.zeta(c(1.0 + 1e-13, 0.0)), Err(EmhError::Pole { .. })));
        assert!(d.zeta(c(1.0 + 1e-6, 0.0)).is_ok());
    }

    #[test]
    fn laurent_remainder_order() {
        // Remainder after 1/z is -s4 z^3 + O(z^5): slope 3 over [1e-3, 1e-1].
        let d = EllipticData::new(&lat(1.0, 1.5)).unwrap();
        let dir = c(0.6, 0.8);
        let pts: Vec<(f64, f64)> = [1e-3, 3e-3, 1e-2, 3e-2, 1e-1]
            .iter()
            .map(|&r| {
                let z = dir * r;
                let rem = d.zeta_direct(z).unwrap().value - 1.0 / z;
                (r.ln(), rem.norm().ln())
            })
            .collect();
        let slope = crate::stats::loglog_slope_raw(&pts);
        assert!((slope - 3.0).abs() < 0.05, "{slope}");

        // Keeping s4 leaves s6 z^5.
        let pts: Vec<(f64, f64)> = [1e-2, 2e-2, 5e-2, 1e-1, 2e-1]
            .iter()
            .map(|&r| {
                let z = dir * r;
                let rem = d.zeta_direct(z).unwrap().value - d.zeta_laurent(z, 1).unwrap().value;
                (r.ln(), rem.norm().ln())
            })
            .collect();
        let slope = crate::stats::loglog_slope_raw(&pts);
        assert!((slope - 5.0).abs() < 0.1, "{slope}");
    }

    #[test]
    fn periodic_combination() {
        let d = EllipticData::new(&lat(1.0, 1.3)).unwrap();
        let f = |z: Complex64| {
            d.zeta(z).unwrap().value - 2.0 * d.eta1() / d.tau1() * z.re
                + c(0.0, 2.0 * d.eta2_tilde() / d.tau2()) * z.im
        };
        for z in [c(-0.5, 0.2), c(-0.5, -0.6), c(0.1, -0.65)] {
            assert!((f(z + d.tau1()) - f(z)).norm() < 1e-8);
            assert!((f(z + c(0.0, d.tau2())) - f(z)).norm() < 1e-8);
        }
    }
}
