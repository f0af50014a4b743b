//! Exact scalars of the form sign·√(rational).
//!
//! The ladder coefficients √l and the normalization ratios k_l/k_{l±1} all
//! live in this set, and it is closed under multiplication and division, so
//! every Table-style symbolic check can be decided with zero tolerance.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// sign · √(square), with square an exact non-negative rational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SqrtRational {
    sign: i8,
    square: BigRational,
}

impl SqrtRational {
    pub fn zero() -> Self {
        Self { sign: 0, square: BigRational::zero() }
    }

    pub fn one() -> Self {
        Self::from_integer(1)
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn from_integer(v: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn from_rational(v: BigRational) -> Self {
        let sign = match v.numer().sign() {
            num_bigint::Sign::Plus => 1,
            num_bigint::Sign::NoSign => 0,
            num_bigint::Sign::Minus => -1,
        };
        Self { sign, square: &v * &v }
    }

    /// √(numer/denom); requires a non-negative argument.
    pub fn sqrt_of(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        let q = BigRational::new(BigInt::from(numer), BigInt::from(denom));
        assert!(!q.is_negative(), "square root of a negative rational");
        Self { sign: if q.is_zero() { 0 } else { 1 }, square: q }
    }

    /// √(l!) as an exact value.
    pub fn sqrt_factorial(l: u32) -> Self {
        let mut f = BigInt::from(1);
        for k in 1..=l {
            f *= k;
        }
        Self { sign: 1, square: BigRational::from_integer(f) }
    }

    pub fn negate(&self) -> Self {
        Self { sign: -self.sign, square: self.square.clone() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let sign = self.sign * other.sign;
        if sign == 0 {
            return Self::zero();
        }
        Self { sign, square: &self.square * &other.square }
    }

    pub fn mul_rational(&self, c: &BigRational) -> Self {
        self.mul(&Self::from_rational(c.clone()))
    }

    pub fn mul_integer(&self, c: i64) -> Self {
        self.mul(&Self::from_integer(c))
    }

    /// Exact quotient; panics on a zero divisor.
    pub fn div(&self, other: &Self) -> Self {
        assert!(other.sign != 0, "division by exact zero");
        if self.sign == 0 {
            return Self::zero();
        }
        Self { sign: self.sign * other.sign, square: &self.square / &other.square }
    }

    /// Is this exactly the rational q?
    pub fn equals_rational(&self, q: &BigRational) -> bool {
        let qs = match q.numer().sign() {
            num_bigint::Sign::Plus => 1,
            num_bigint::Sign::NoSign => 0,
            num_bigint::Sign::Minus => -1,
        };
        self.sign == qs && self.square == q * q
    }

    pub fn to_f64(&self) -> f64 {
        f64::from(self.sign) * self.square.to_f64().unwrap_or(f64::NAN).sqrt()
    }
}

impl std::fmt::Display for SqrtRational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            1 => write!(f, "sqrt({})", self.square),
            _ => write!(f, "-sqrt({})", self.square),
        }
    }
}
