//! C ABI for the `emh` library.
//!
//! Every call returns an [`EmhStatus`]; results go through out-pointers.
//! After a non-zero status, [`emh_last_error`] returns a message for the
//! calling thread. Lattices are opaque handles created by
//! [`emh_lattice_new`] and released with [`emh_lattice_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;

use emh::fieldexp::{multipole_coeffs, BlochParams};
use emh::homog::{
    dispersion, effective_tensor_asymptotic, effective_tensor_full, lambda2_closed_form,
};
use emh::oracle::{lambda2_from_oracle, OracleSettings, PlaneWaveOperator, DEFAULT_Q_LIST};
use emh::{EllipticData, EmhError, LatticeSpec};

/// Status codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmhStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Pole = 3,
    NotConverged = 4,
    DegenerateGeometry = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Which tensor formula [`emh_tensor`] evaluates.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmhTensorForm {
    FullRational = 0,
    Asymptotic = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EmhComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for EmhComplex {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

/// Weierstrass zeta and its first three derivatives.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EmhZeta {
    pub value: EmhComplex,
    pub d1: EmhComplex,
    pub d2: EmhComplex,
    pub d3: EmhComplex,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EmhCoeffs {
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

/// Opaque lattice handle.
pub struct EmhLattice {
    spec: LatticeSpec,
    elliptic: EllipticData,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &EmhError) -> EmhStatus {
    match err {
        EmhError::Normalization(_) | EmhError::Domain(_) | EmhError::Config(_) => {
            EmhStatus::InvalidArgument
        }
        EmhError::Pole { .. } => EmhStatus::Pole,
        EmhError::DegenerateGeometry(_) => EmhStatus::DegenerateGeometry,
        EmhError::Symmetry { .. }
        | EmhError::Convergence(_)
        | EmhError::NonHermitian(_)
        | EmhError::Iteration(_)
        | EmhError::IllConditionedFit(_)
        | EmhError::Resolution(_) => EmhStatus::NotConverged,
    }
}

enum Failure {
    Null(&'static str),
    Small(usize),
    Lib(EmhError),
}

impl From<EmhError> for Failure {
    fn from(e: EmhError) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `f`, records any error or panic, and maps it to a status.
fn guard<F>(f: F) -> EmhStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EmhStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            EmhStatus::NullPointer
        }
        Ok(Err(Failure::Small(need))) => {
            set_error(format!("output buffer too small: need {need} entries"));
            EmhStatus::BufferTooSmall
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            EmhStatus::Panic
        }
    }
}

unsafe fn lattice<'a>(p: *const EmhLattice) -> Result<&'a EmhLattice, Failure> {
    p.as_ref().ok_or(Failure::Null("lattice"))
}

unsafe fn write<T>(p: *mut T, what: &'static str, v: T) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    p.write(v);
    Ok(())
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn emh_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates a lattice with periods `tau1 x tau2` (`min = 1`), cylinder
/// radius `a` and permittivity `eps_in`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn emh_lattice_new(
    tau1: f64,
    tau2: f64,
    a: f64,
    eps_in: f64,
    out: *mut *mut EmhLattice,
) -> EmhStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let spec = LatticeSpec::new(tau1, tau2, a, eps_in)?;
        let elliptic = EllipticData::new(&spec)?;
        out.write(Box::into_raw(Box::new(EmhLattice { spec, elliptic })));
        Ok(())
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `lat` must come from [`emh_lattice_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn emh_lattice_free(lat: *mut EmhLattice) {
    if !lat.is_null() {
        drop(Box::from_raw(lat));
    }
}

/// Quasi-period constants `eta1` and `eta2~`.
///
/// # Safety
/// Pointers must be valid; `lat` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn emh_eta(
    lat: *const EmhLattice,
    eta1: *mut f64,
    eta2_tilde: *mut f64,
) -> EmhStatus {
    guard(|| {
        let l = lattice(lat)?;
        write(eta1, "eta1", l.elliptic.eta1())?;
        write(eta2_tilde, "eta2_tilde", l.elliptic.eta2_tilde())
    })
}

/// Lattice sum `s_{two_k}` for even `two_k` in `4..=48`.
///
/// # Safety
/// Pointers must be valid; `lat` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn emh_lattice_sum(
    lat: *const EmhLattice,
    two_k: u32,
    out: *mut f64,
) -> EmhStatus {
    guard(|| {
        let l = lattice(lat)?;
        let s = l.elliptic.s(two_k as usize).ok_or_else(|| {
            EmhError::Domain(format!("lattice sum index {two_k} must be even and in 4..=48"))
        })?;
        write(out, "out", s)
    })
}

/// `zeta(z)` and derivatives at `z = re + i im`.
///
/// # Safety
/// Pointers must be valid; `lat` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn emh_zeta(
    lat: *const EmhLattice,
    re: f64,
    im: f64,
    out: *mut EmhZeta,
) -> EmhStatus {
    guard(|| {
        let l = lattice(lat)?;
        let z = l.elliptic.zeta(Complex64::new(re, im))?;
        write(
            out,
            "out",
            EmhZeta {
                value: z.value.into(),
                d1: z.d1.into(),
                d2: z.d2.into(),
                d3: z.d3.into(),
            },
        )
    })
}

/// Multipole coefficients for propagation angle `theta`.
///
/// # Safety
/// Pointers must be valid; `lat` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn emh_coeffs(
    lat: *const EmhLattice,
    theta: f64,
    out: *mut EmhCoeffs,
) -> EmhStatus {
    guard(|| {
        let l = lattice(lat)?;
        let c = multipole_coeffs(&l.spec, &l.elliptic, theta);
        write(
            out,
            "out",
            EmhCoeffs {
                theta: c.theta,
                a1: c.a1,
                b1: c.b1,
                c1: c.c1,
                d1: c.d1,
                a2: c.a2,
                b2: c.b2,
                c2: c.c2,
                d2: c.d2,
            },
        )
    })
}

/// Effective tensor `(eps1*, eps2*)` at Bloch vector `(q, theta)`.
///
/// # Safety
/// Pointers must be valid; `lat` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn emh_tensor(
    lat: *const EmhLattice,
    q: f64,
    theta: f64,
    form: EmhTensorForm,
    eps1: *mut f64,
    eps2: *mut f64,
) -> EmhStatus {
    guard(|| {
        let l = lattice(lat)?;
        let b = BlochParams::new(q, theta)?;
        let t = match form {
            EmhTensorForm::FullRational => effective_tensor_full(&l.spec, &l.elliptic, &b)?,
            EmhTensorForm::Asymptotic => effective_tensor_asymptotic(&l.spec, &l.elliptic, &b),
        };
        write(eps1, "eps1", t.eps1_star)?;
        write(eps2, "eps2", t.eps2_star)
    })
}

/// Asymptotic `nu^2` and `lambda2`.
///
/// # Safety
/// Pointers must be valid; `lat` must be a live handle. `lambda2` may be null.
#[no_mangle]
pub unsafe extern "C" fn emh_dispersion(
    lat: *const EmhLattice,
    q: f64,
    theta: f64,
    nu_squared: *mut f64,
    lambda2: *mut f64,
) -> EmhStatus {
    guard(|| {
        let l = lattice(lat)?;
        let d = dispersion(&l.spec, &BlochParams::new(q, theta)?);
        write(nu_squared, "nu_squared", d.nu_squared)?;
        if !lambda2.is_null() {
            lambda2.write(lambda2_closed_form(&l.spec));
        }
        Ok(())
    })
}

/// Lowest `n_modes` plane-wave eigenvalues `nu^2` at `(q, theta)` with
/// cutoff `cutoff`; `out` must hold `n_modes` values.
///
/// # Safety
/// `out` must point to `out_len` writable doubles; `lat` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn emh_oracle_eigenvalues(
    lat: *const EmhLattice,
    q: f64,
    theta: f64,
    cutoff: usize,
    n_modes: usize,
    out: *mut f64,
    out_len: usize,
) -> EmhStatus {
    guard(|| {
        let l = lattice(lat)?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        if out_len < n_modes {
            return Err(Failure::Small(n_modes));
        }
        let op = PlaneWaveOperator::new(&l.spec, OracleSettings::with_cutoff(cutoff))?;
        let ev = op.eigenvalues(&BlochParams::new(q, theta)?, n_modes)?.eigenvalues;
        std::slice::from_raw_parts_mut(out, n_modes).copy_from_slice(&ev[..n_modes]);
        Ok(())
    })
}

/// `lambda2` fitted from the plane-wave oracle along direction `theta`.
///
/// # Safety
/// Pointers must be valid; `lat` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn emh_oracle_lambda2(
    lat: *const EmhLattice,
    theta: f64,
    cutoff: usize,
    out: *mut f64,
) -> EmhStatus {
    guard(|| {
        let l = lattice(lat)?;
        let fit = lambda2_from_oracle(
            &l.spec,
            theta,
            &DEFAULT_Q_LIST,
            OracleSettings::with_cutoff(cutoff),
        )?;
        write(out, "out", fit.lambda2)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;
    use std::f64::consts::FRAC_PI_2;

    fn square() -> *mut EmhLattice {
        let mut h = ptr::null_mut();
        assert_eq!(unsafe { emh_lattice_new(1.0, 1.0, 0.1, 2.0, &mut h) }, EmhStatus::Ok);
        h
    }

    fn last_error() -> String {
        unsafe { CStr::from_ptr(emh_last_error()) }.to_string_lossy().into_owned()
    }

    #[test]
    fn lifecycle_and_eta() {
        let h = square();
        let (mut e1, mut e2) = (0.0, 0.0);
        assert_eq!(unsafe { emh_eta(h, &mut e1, &mut e2) }, EmhStatus::Ok);
        assert!((e1 - FRAC_PI_2).abs() < 1e-12 && (e2 - FRAC_PI_2).abs() < 1e-12);
        unsafe { emh_lattice_free(h) };
        unsafe { emh_lattice_free(ptr::null_mut()) };
    }

    #[test]
    fn invalid_lattice() {
        let mut h = ptr::null_mut();
        let s = unsafe { emh_lattice_new(1.2, 1.5, 0.1, 2.0, &mut h) };
        assert_eq!(s, EmhStatus::InvalidArgument);
        assert!(h.is_null());
        assert!(last_error().contains("normalization"));
    }

    #[test]
    fn null_pointers_are_reported() {
        let mut x = 0.0;
        assert_eq!(unsafe { emh_eta(ptr::null(), &mut x, &mut x) }, EmhStatus::NullPointer);
        let h = square();
        assert_eq!(unsafe { emh_eta(h, ptr::null_mut(), &mut x) }, EmhStatus::NullPointer);
        assert!(last_error().contains("eta1"));
        unsafe { emh_lattice_free(h) };
    }

    #[test]
    fn sums_zeta_and_poles() {
        let h = square();
        let mut s = 0.0;
        assert_eq!(unsafe { emh_lattice_sum(h, 6, &mut s) }, EmhStatus::Ok);
        assert!(s.abs() < 1e-12);
        assert_eq!(unsafe { emh_lattice_sum(h, 5, &mut s) }, EmhStatus::InvalidArgument);
        let mut z = EmhZeta::default();
        assert_eq!(unsafe { emh_zeta(h, 0.2, 0.1, &mut z) }, EmhStatus::Ok);
        let mut w = EmhZeta::default();
        assert_eq!(unsafe { emh_zeta(h, -0.2, -0.1, &mut w) }, EmhStatus::Ok);
        assert!((z.value.re + w.value.re).abs() < 1e-12);
        assert_eq!(unsafe { emh_zeta(h, 1.0, 0.0, &mut z) }, EmhStatus::Pole);
        unsafe { emh_lattice_free(h) };
    }

    #[test]
    fn coefficients_tensor_dispersion() {
        let h = square();
        let mut c = EmhCoeffs::default();
        assert_eq!(unsafe { emh_coeffs(h, 0.0, &mut c) }, EmhStatus::Ok);
        assert!(c.a1 > 0.0 && c.b1 == 0.0);
        let (mut e1, mut e2) = (0.0, 0.0);
        for form in [EmhTensorForm::FullRational, EmhTensorForm::Asymptotic] {
            assert_eq!(unsafe { emh_tensor(h, 0.0, 0.0, form, &mut e1, &mut e2) }, EmhStatus::Ok);
            assert!((e1 - e2).abs() < 1e-10 && e1 > 1.0);
        }
        let (mut nu2, mut lam) = (0.0, 0.0);
        assert_eq!(unsafe { emh_dispersion(h, 0.1, 0.3, &mut nu2, &mut lam) }, EmhStatus::Ok);
        assert!((nu2 - 0.01 * lam).abs() < 1e-15);
        assert!((lam - 0.979_056).abs() < 1e-6);
        unsafe { emh_lattice_free(h) };
    }

    #[test]
    fn oracle_calls() {
        let h = square();
        let mut ev = [0.0; 3];
        assert_eq!(
            unsafe { emh_oracle_eigenvalues(h, 0.1, 0.0, 4, 3, ev.as_mut_ptr(), 3) },
            EmhStatus::Ok
        );
        assert!(ev[0] < ev[1] && ev[1] <= ev[2]);
        assert_eq!(
            unsafe { emh_oracle_eigenvalues(h, 0.1, 0.0, 4, 3, ev.as_mut_ptr(), 2) },
            EmhStatus::BufferTooSmall
        );
        assert_eq!(
            unsafe { emh_oracle_eigenvalues(h, 0.1, 0.0, 2, 1, ev.as_mut_ptr(), 3) },
            EmhStatus::InvalidArgument
        );
        let mut lam = 0.0;
        assert_eq!(unsafe { emh_oracle_lambda2(h, 0.0, 6, &mut lam) }, EmhStatus::Ok);
        assert!((lam - 0.979_056).abs() < 2e-3);
        unsafe { emh_lattice_free(h) };
    }
}
