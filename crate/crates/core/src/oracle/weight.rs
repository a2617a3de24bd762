use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Scalar for exact enumeration. `BigRational` carries the branch weights
/// exactly (every probability is a dyadic rational once rounded to f64), so
/// identities can be asserted at full precision; the `f64` instantiation
/// trades that for speed on larger sweeps.
pub trait Weight: Clone + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(p: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn is_zero(&self) -> bool;
    /// |self| <= tol when viewed as a real number.
    fn abs_leq(&self, tol: f64) -> bool;
}

impl Weight for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(p: f64) -> Self {
        p
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn abs_leq(&self, tol: f64) -> bool {
        self.abs() <= tol
    }
}

impl Weight for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_f64(p: f64) -> Self {
        BigRational::from_float(p).expect("finite probability")
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).expect("ratio representable")
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn abs_leq(&self, tol: f64) -> bool {
        self.abs() <= BigRational::from_float(tol).expect("finite tolerance")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_round_trips_dyadic_probabilities() {
        for p in [0.0, 1.0, 0.5, 0.6, 0.123456789, 1.0 / 3.0] {
            let w = <BigRational as Weight>::from_f64(p);
            assert_eq!(Weight::to_f64(&w), p);
        }
    }

    #[test]
    fn rational_to_f64_survives_huge_terms() {
        // Product of many dyadic factors: numerator and denominator far
        // beyond u64 range, ratio still representable.
        let mut w = <BigRational as Weight>::from_f64(0.6);
        for _ in 0..40 {
            w = w.mul(&<BigRational as Weight>::from_f64(0.6));
        }
        let expect = 0.6f64.powi(41);
        assert!((Weight::to_f64(&w) - expect).abs() <= 1e-15 * expect);
    }

    #[test]
    fn exact_complement_sums_to_one() {
        let p = <BigRational as Weight>::from_f64(0.37);
        let q = <BigRational as Weight>::one().sub(&p);
        assert_eq!(p.add(&q), <BigRational as Weight>::one());
    }
}
