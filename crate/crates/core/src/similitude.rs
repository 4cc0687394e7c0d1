use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Orientation-preserving similitude `z ↦ a z + b` with `a ≠ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Similitude {
    a: Complex64,
    b: Complex64,
}

impl Similitude {
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        if a.norm() == 0.0 || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "similitude needs a finite nonzero linear part, got a = {a}, b = {b}"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn identity() -> Self {
        Self {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
        }
    }

    pub fn translation(b: Complex64) -> Self {
        Self {
            a: Complex64::new(1.0, 0.0),
            b,
        }
    }

    /// `z ↦ c + λ (z − c)`.
    pub fn scaling_about(center: Complex64, lambda: Complex64) -> Result<Self> {
        Self::new(lambda, center - lambda * center)
    }

    pub fn linear(&self) -> Complex64 {
        self.a
    }

    pub fn translation_part(&self) -> Complex64 {
        self.b
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        self.a * z + self.b
    }

    /// `self ∘ other`, i.e. apply `other` first.
    pub fn compose(&self, other: &Similitude) -> Similitude {
        Similitude {
            a: self.a * other.a,
            b: self.a * other.b + self.b,
        }
    }

    /// Applies `self` first, then `next`.
    pub fn then(&self, next: &Similitude) -> Similitude {
        next.compose(self)
    }

    pub fn inverse(&self) -> Similitude {
        let inv = 1.0 / self.a;
        Similitude {
            a: inv,
            b: -self.b * inv,
        }
    }

    pub fn ratio(&self) -> f64 {
        self.a.norm()
    }

    pub fn is_translation(&self) -> bool {
        self.a == Complex64::new(1.0, 0.0)
    }

    /// Fixed point `b / (1 − a)`, absent for pure translations.
    pub fn fixed_point(&self) -> Option<Complex64> {
        let d = Complex64::new(1.0, 0.0) - self.a;
        (d.norm() != 0.0).then(|| self.b / d)
    }

    pub fn approx_eq(&self, other: &Similitude, tol: f64) -> bool {
        (self.a - other.a).norm() <= tol && (self.b - other.b).norm() <= tol
    }
}

impl fmt::Display for Similitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z -> ({})*z + ({})", self.a, self.b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cplx() -> impl Strategy<Value = Complex64> {
        (-5.0..5.0f64, -5.0..5.0f64).prop_map(|(x, y)| Complex64::new(x, y))
    }

    fn sim() -> impl Strategy<Value = Similitude> {
        (cplx(), cplx())
            .prop_filter("nonzero", |(a, _)| a.norm() > 0.1)
            .prop_map(|(a, b)| Similitude::new(a, b).unwrap())
    }

    #[test]
    fn zero_linear_part_rejected() {
        assert!(Similitude::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn scaling_fixes_center() {
        let c = Complex64::new(-1.0, 1.0);
        let s = Similitude::scaling_about(c, Complex64::new(3.0, 0.0)).unwrap();
        assert_eq!(s.fixed_point().unwrap(), c);
        assert!(Similitude::translation(c).fixed_point().is_none());
    }

    proptest! {
        #[test]
        fn inverse_roundtrip(s in sim(), z in cplx()) {
            let back = s.inverse().apply(s.apply(z));
            prop_assert!((back - z).norm() < 1e-10 * (1.0 + z.norm()));
        }

        #[test]
        fn composition_matches_sequential_application(s in sim(), t in sim(), z in cplx()) {
            let lhs = s.compose(&t).apply(z);
            let rhs = s.apply(t.apply(z));
            prop_assert!((lhs - rhs).norm() < 1e-10 * (1.0 + rhs.norm()));
        }

        #[test]
        fn ratio_is_multiplicative(s in sim(), t in sim()) {
            let r = s.compose(&t).ratio();
            prop_assert!((r - s.ratio() * t.ratio()).abs() < 1e-12 * r.max(1.0));
        }
    }
}
