//! Geometry of the fundamental cell.

use crate::error::{EmhError, Result};

/// Tolerance on the `min(tau1, tau2) = 1` normalization.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Rectangular lattice of circular cylinders in a unit-permittivity matrix.
///
/// The cell is `[-tau1/2, tau1/2] x [-tau2/2, tau2/2]` with one cylinder of
/// radius `a` and permittivity `eps_in` at the origin. Lengths are scaled so
/// that the shorter period is 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    tau1: f64,
    tau2: f64,
    a: f64,
    eps_in: f64,
}

impl LatticeSpec {
    pub fn new(tau1: f64, tau2: f64, a: f64, eps_in: f64) -> Result<Self> {
        if !(tau1.is_finite() && tau2.is_finite() && tau1 > 0.0 && tau2 > 0.0) {
            return Err(EmhError::Domain(format!(
                "periods must be positive and finite, got ({tau1}, {tau2})"
            )));
        }
        let shortest = tau1.min(tau2);
        if (shortest - 1.0).abs() > NORMALIZATION_TOL {
            return Err(EmhError::Normalization(shortest));
        }
        if !(a > 0.0 && a < 0.5) {
            return Err(EmhError::Domain(format!(
                "cylinder radius must satisfy 0 < a < 0.5, got {a}"
            )));
        }
        if !(eps_in.is_finite() && eps_in > 0.0) {
            return Err(EmhError::Domain(format!(
                "cylinder permittivity must be positive and finite, got {eps_in}"
            )));
        }
        Ok(Self {
            tau1,
            tau2,
            a,
            eps_in,
        })
    }

    /// Unit square lattice.
    pub fn square(a: f64, eps_in: f64) -> Result<Self> {
        Self::new(1.0, 1.0, a, eps_in)
    }

    pub fn tau1(&self) -> f64 {
        self.tau1
    }

    pub fn tau2(&self) -> f64 {
        self.tau2
    }

    /// Cylinder radius.
    pub fn radius(&self) -> f64 {
        self.a
    }

    pub fn eps_in(&self) -> f64 {
        self.eps_in
    }

    /// Contrast parameter `(eps - 1) / (eps + 1)`.
    pub fn alpha(&self) -> f64 {
        (self.eps_in - 1.0) / (self.eps_in + 1.0)
    }

    /// Cell area `tau1 tau2`.
    pub fn area(&self) -> f64 {
        self.tau1 * self.tau2
    }

    /// Area fraction of the cylinder, `pi a^2 / (tau1 tau2)`.
    pub fn fill_fraction(&self) -> f64 {
        std::f64::consts::PI * self.a * self.a / self.area()
    }

    pub fn is_square(&self) -> bool {
        (self.tau1 - self.tau2).abs() <= NORMALIZATION_TOL
    }

    /// Same periods, different cylinder.
    pub fn with_inclusion(&self, a: f64, eps_in: f64) -> Result<Self> {
        Self::new(self.tau1, self.tau2, a, eps_in)
    }

    /// Periods exchanged: `(tau1, tau2) -> (tau2, tau1)`.
    pub fn transposed(&self) -> Self {
        Self {
            tau1: self.tau2,
            tau2: self.tau1,
            ..*self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unnormalized_periods() {
        assert!(matches!(
            LatticeSpec::new(2.0, 3.0, 0.1, 2.0),
            Err(EmhError::Normalization(m)) if m == 2.0
        ));
        assert!(matches!(
            LatticeSpec::new(0.5, 1.0, 0.1, 2.0),
            Err(EmhError::Normalization(_))
        ));
        assert!(LatticeSpec::new(1.0, 2.5, 0.1, 2.0).is_ok());
        assert!(LatticeSpec::new(2.5, 1.0, 0.1, 2.0).is_ok());
    }

    #[test]
    fn rejects_bad_radius_and_permittivity() {
        for a in [0.0, -0.1, 0.5, 0.7, f64::NAN] {
            assert!(matches!(
                LatticeSpec::square(a, 2.0),
                Err(EmhError::Domain(_))
            ));
        }
        for eps in [0.0, -1.0, f64::INFINITY, f64::NAN] {
            assert!(matches!(
                LatticeSpec::square(0.1, eps),
                Err(EmhError::Domain(_))
            ));
        }
    }

    #[test]
    fn alpha_and_fill() {
        let l = LatticeSpec::square(0.1, 2.0).unwrap();
        assert!((l.alpha() - 1.0 / 3.0).abs() < 1e-15);
        assert!((l.fill_fraction() - std::f64::consts::PI * 0.01).abs() < 1e-15);
        let homogeneous = LatticeSpec::square(0.1, 1.0).unwrap();
        assert_eq!(homogeneous.alpha(), 0.0);
    }
}
