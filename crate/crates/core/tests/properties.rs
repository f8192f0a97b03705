use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use proptest::prelude::*;

use emh::elliptic::{eta_constants, DEFAULT_ROW_CAP};
use emh::fieldexp::{multipole_coeffs, u1_tilde, u2_tilde, u3_tilde, BlochParams, Point, Variant};
use emh::homog::{
    dispersion, effective_tensor_asymptotic, effective_tensor_full, lambda2_closed_form,
};
use emh::oracle::{OracleSettings, PlaneWaveOperator};
use emh::stats::loglog_slope;
use emh::{EllipticData, LatticeSpec};

/// Periods with `min = 1`, either orientation.
fn periods() -> impl Strategy<Value = (f64, f64)> {
    (1.0f64..2.5, any::<bool>()).prop_map(|(t, flip)| if flip { (t, 1.0) } else { (1.0, t) })
}

fn lattice() -> impl Strategy<Value = LatticeSpec> {
    (periods(), 0.02f64..0.3, 0.1f64..12.0)
        .prop_map(|((t1, t2), a, eps)| LatticeSpec::new(t1, t2, a, eps).unwrap())
}

/// A point in the fundamental cell away from the node.
fn cell_point(t1: f64, t2: f64) -> impl Strategy<Value = Complex64> {
    (-0.5f64..0.5, -0.5f64..0.5)
        .prop_map(move |(x, y)| Complex64::new(x * t1, y * t2))
        .prop_filter("away from node", |z| z.norm() > 0.05)
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn legendre_relation((t1, t2) in periods()) {
        let l = LatticeSpec::new(t1, t2, 0.1, 2.0).unwrap();
        let (e1, e2) = eta_constants(&l, DEFAULT_ROW_CAP).unwrap();
        prop_assert!((e1 * t2 + e2 * t1 - PI).abs() < 1e-10);
    }

    #[test]
    fn zeta_is_odd(((t1, t2), z) in periods().prop_flat_map(|p| (Just(p), cell_point(p.0, p.1)))) {
        let e = EllipticData::new(&LatticeSpec::new(t1, t2, 0.1, 2.0).unwrap()).unwrap();
        let plus = e.zeta(z).unwrap();
        let minus = e.zeta(-z).unwrap();
        prop_assert!(close(plus.value, -minus.value, 1e-11));
        prop_assert!(close(plus.d1, minus.d1, 1e-11));
        prop_assert!(close(plus.d2, -minus.d2, 1e-10));
    }

    #[test]
    fn zeta_quasi_periodicity(((t1, t2), z) in periods().prop_flat_map(|p| (Just(p), cell_point(p.0, p.1)))) {
        let e = EllipticData::new(&LatticeSpec::new(t1, t2, 0.1, 2.0).unwrap()).unwrap();
        let base = e.zeta(z).unwrap();
        let x = e.zeta(z + t1).unwrap();
        let y = e.zeta(z + Complex64::new(0.0, t2)).unwrap();
        prop_assert!(close(x.value - base.value, Complex64::from(2.0 * e.eta1()), 1e-10));
        prop_assert!(close(y.value - base.value, 2.0 * e.eta2(), 1e-10));
        prop_assert!(close(x.d1, base.d1, 1e-10));
        prop_assert!(close(y.d1, base.d1, 1e-10));
    }

    #[test]
    fn square_sums_vanish_off_multiples_of_four(a in 0.02f64..0.3) {
        let e = EllipticData::new(&LatticeSpec::square(a, 2.0).unwrap()).unwrap();
        for k in [6, 10, 14] {
            prop_assert!(e.s(k).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn corrector_parity(l in lattice(), theta in 0.0f64..TAU, x in -0.5f64..0.5, y in -0.5f64..0.5) {
        let p = Point::new(x * l.tau1(), y * l.tau2());
        prop_assume!((p.r() - l.radius()).abs() > 1e-9 && p.r() > 1e-9);
        let e = EllipticData::new(&l).unwrap();
        let c = multipole_coeffs(&l, &e, theta);
        let u = |p| u1_tilde(&l, &e, &c, p, Variant::Octupole).unwrap().value;
        prop_assert!((u(p) + u(-p)).norm() < 1e-12);
        prop_assert!((u2_tilde(&l, theta, p).value - u2_tilde(&l, theta, -p).value).norm() < 1e-12);
        prop_assert!((u3_tilde(&l, theta, p).value + u3_tilde(&l, theta, -p).value).norm() < 1e-12);
    }

    #[test]
    fn coefficients_flip_with_direction(l in lattice(), theta in 0.0f64..TAU) {
        let e = EllipticData::new(&l).unwrap();
        let c = multipole_coeffs(&l, &e, theta).as_array();
        let d = multipole_coeffs(&l, &e, theta + PI).as_array();
        for (u, v) in c.iter().zip(&d) {
            prop_assert!((u + v).abs() <= 1e-12 * (1.0 + u.abs()));
        }
    }

    #[test]
    fn no_contrast_no_correction((t1, t2) in periods(), a in 0.02f64..0.45, q in 0.0f64..0.3, theta in 0.0f64..TAU) {
        let l = LatticeSpec::new(t1, t2, a, 1.0).unwrap();
        let e = EllipticData::new(&l).unwrap();
        let b = BlochParams::new(q, theta).unwrap();
        let full = effective_tensor_full(&l, &e, &b).unwrap();
        let asym = effective_tensor_asymptotic(&l, &e, &b);
        for v in [full.eps1_star, full.eps2_star, asym.eps1_star, asym.eps2_star] {
            prop_assert!((v - 1.0).abs() < 1e-12);
        }
        prop_assert!((dispersion(&l, &b).nu_squared - q * q).abs() < 1e-15);
    }

    #[test]
    fn tensor_transposes_with_lattice(l in lattice(), q in 0.0f64..0.2, theta in 0.0f64..TAU) {
        let lt = l.transposed();
        let (e, et) = (EllipticData::new(&l).unwrap(), EllipticData::new(&lt).unwrap());
        let t = effective_tensor_full(&l, &e, &BlochParams::new(q, theta).unwrap()).unwrap();
        let tt = effective_tensor_full(&lt, &et, &BlochParams::new(q, FRAC_PI_2 - theta).unwrap()).unwrap();
        prop_assert!((t.eps1_star - tt.eps2_star).abs() < 1e-10);
        prop_assert!((t.eps2_star - tt.eps1_star).abs() < 1e-10);
    }

    #[test]
    fn square_tensor_is_isotropic_at_zero_q(a in 0.02f64..0.3, eps in 0.1f64..12.0) {
        let l = LatticeSpec::square(a, eps).unwrap();
        let e = EllipticData::new(&l).unwrap();
        let t = effective_tensor_full(&l, &e, &BlochParams::new(0.0, 0.0).unwrap()).unwrap();
        prop_assert!((t.eps1_star - t.eps2_star).abs() < 1e-10);
    }

    #[test]
    fn lambda2_decreases_with_contrast(a in 0.02f64..0.4, e1 in 0.1f64..10.0, de in 0.01f64..5.0) {
        let lo = LatticeSpec::square(a, e1).unwrap();
        let hi = LatticeSpec::square(a, e1 + de).unwrap();
        prop_assert!(lambda2_closed_form(&hi) < lambda2_closed_form(&lo));
        prop_assert!(lambda2_closed_form(&hi) > 0.0);
    }
}

/// Joint sweep `q = a`: the dispersion error over `q^2` shrinks like `(q^2 + a^2)^2`.
#[test]
fn dispersion_error_along_joint_sweep() {
    let ts = [0.05, 0.075, 0.1, 0.15];
    let mut gaps = Vec::new();
    for t in ts {
        let l = LatticeSpec::square(t, 2.0).unwrap();
        let op = PlaneWaveOperator::new(&l, OracleSettings::with_cutoff(12)).unwrap();
        let nu2 = op
            .eigenvalues(&BlochParams::new(t, 0.0).unwrap(), 1)
            .unwrap()
            .eigenvalues[0];
        gaps.push((nu2 - t * t * lambda2_closed_form(&l)) / (t * t));
    }
    let slope = loglog_slope(&ts, &gaps);
    assert!(slope > 3.5, "slope {slope}, gaps {gaps:?}");
}
