//! Physicists' Hermite polynomials H_l (leading coefficient 2^l).
//!
//! Floating-point evaluation goes through the three-term recurrence, which
//! is numerically stabler at high degree than expanded coefficients. Exact
//! integer coefficients are kept separately for the symbolic ladder checks.

use crate::error::{Error, Result};
use num_bigint::BigInt;

/// Degree cap for both evaluation paths.
pub const DEFAULT_L_MAX: usize = 64;

fn check_degree(l: usize) -> Result<()> {
    if l > DEFAULT_L_MAX {
        return Err(Error::DegreeTooLarge { degree: l, max: DEFAULT_L_MAX });
    }
    Ok(())
}

/// H_l(x) via H_{l+1} = 2x·H_l − 2l·H_{l−1}, H_0 = 1, H_1 = 2x.
pub fn hermite_eval(l: usize, x: f64) -> Result<f64> {
    check_degree(l)?;
    if l == 0 {
        return Ok(1.0);
    }
    let mut prev = 1.0;
    let mut cur = 2.0 * x;
    for k in 1..l {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// H_l'(x) = 2l·H_{l−1}(x); zero for the constant H_0.
pub fn hermite_derivative(l: usize, x: f64) -> Result<f64> {
    check_degree(l)?;
    if l == 0 {
        return Ok(0.0);
    }
    Ok(2.0 * l as f64 * hermite_eval(l - 1, x)?)
}

/// Exact integer coefficients of H_l, index k holding the coefficient of x^k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HermitePoly {
    pub degree: usize,
    pub coefficients: Vec<BigInt>,
}

impl HermitePoly {
    pub fn new(l: usize) -> Result<Self> {
        check_degree(l)?;
        let mut prev = vec![BigInt::from(1)]; // H_0
        if l == 0 {
            return Ok(Self { degree: 0, coefficients: prev });
        }
        let mut cur = vec![BigInt::from(0), BigInt::from(2)]; // H_1 = 2x
        for k in 1..l {
            // 2x·H_k − 2k·H_{k−1}
            let mut next = vec![BigInt::from(0); k + 2];
            for (j, c) in cur.iter().enumerate() {
                next[j + 1] += 2 * c;
            }
            for (j, c) in prev.iter().enumerate() {
                next[j] -= 2 * k * c;
            }
            prev = cur;
            cur = next;
        }
        Ok(Self { degree: l, coefficients: cur })
    }

    pub fn leading(&self) -> &BigInt {
        &self.coefficients[self.degree]
    }

    /// Formal derivative; exact.
    pub fn derivative(&self) -> Vec<BigInt> {
        if self.degree == 0 {
            return vec![BigInt::from(0)];
        }
        (1..=self.degree)
            .map(|k| &self.coefficients[k] * k)
            .collect()
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        // Horner over the exact coefficients, rounded per term.
        let mut acc = 0.0;
        for c in self.coefficients.iter().rev() {
            acc = acc * x + bigint_to_f64(c);
        }
        acc
    }
}

pub(crate) fn bigint_to_f64(v: &BigInt) -> f64 {
    use num_traits::ToPrimitive;
    v.to_f64().unwrap_or(f64::NAN)
}
