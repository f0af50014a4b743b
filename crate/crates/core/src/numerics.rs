//! Shared numerical kernels: Gaussian quadrature and finite differences.
//!
//! Quadrature rules are built with the Golub-Welsch construction — the
//! three-term recurrence of the orthogonal polynomial family becomes a
//! symmetric tridiagonal Jacobi matrix whose eigenvalues are the nodes and
//! whose first eigenvector components give the weights. Derivatives use
//! central differences with optional Richardson extrapolation and carry an
//! error estimate from the level difference.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::PI;
use std::ops::{Add, Div, Mul, Sub};

pub const MAX_QUADRATURE_ORDER: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum QuadratureFamily {
    /// Weight e^{-x²} on (-∞, ∞).
    GaussHermite,
    /// Weight e^{-x} on [0, ∞).
    GaussLaguerre,
}

/// Nodes and weights of one Gaussian rule; immutable after construction.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub family: QuadratureFamily,
    pub order: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// Σ w_i f(x_i), approximating ∫ f(x) w(x) dx against the family weight.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Golub-Welsch: eigendecompose the Jacobi matrix of the family's recurrence.
pub fn build_rule(family: QuadratureFamily, order: usize) -> Result<QuadratureRule> {
    if order < 1 || order > MAX_QUADRATURE_ORDER {
        return Err(Error::OrderOutOfRange { order, max: MAX_QUADRATURE_ORDER });
    }

    // Recurrence p_{k+1} = (x - a_k) p_k - b_k² p_{k-1} for the monic family.
    let (diag, offdiag, mu0): (Vec<f64>, Vec<f64>, f64) = match family {
        QuadratureFamily::GaussHermite => (
            vec![0.0; order],
            (1..order).map(|k| (k as f64 / 2.0).sqrt()).collect(),
            PI.sqrt(),
        ),
        QuadratureFamily::GaussLaguerre => (
            (0..order).map(|k| 2.0 * k as f64 + 1.0).collect(),
            (1..order).map(|k| k as f64).collect(),
            1.0,
        ),
    };

    let mut jacobi = DMatrix::<f64>::zeros(order, order);
    for (k, &a) in diag.iter().enumerate() {
        jacobi[(k, k)] = a;
    }
    for (k, &b) in offdiag.iter().enumerate() {
        jacobi[(k, k + 1)] = b;
        jacobi[(k + 1, k)] = b;
    }

    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..order)
        .map(|j| {
            let q0 = eig.eigenvectors[(0, j)];
            (eig.eigenvalues[j], mu0 * q0 * q0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut nodes: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut weights: Vec<f64> = pairs.iter().map(|p| p.1).collect();

    if family == QuadratureFamily::GaussHermite {
        // Symmetrise: the exact rule has x_i = -x_{n-1-i} and equal weights.
        let n = order;
        for i in 0..n / 2 {
            let j = n - 1 - i;
            let mag = 0.5 * (nodes[j] - nodes[i]);
            nodes[i] = -mag;
            nodes[j] = mag;
            let w = 0.5 * (weights[i] + weights[j]);
            weights[i] = w;
            weights[j] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
    }

    Ok(QuadratureRule { family, order, nodes, weights })
}

/// Central-difference configuration.
///
/// `derivative_order` selects which derivative (1st, 2nd or 4th);
/// `richardson_levels` halves the step that many times and extrapolates,
/// raising the accuracy order from 2 to 2 + 2·levels.
#[derive(Debug, Clone, Copy)]
pub struct StencilSpec {
    pub step: f64,
    pub richardson_levels: usize,
    pub derivative_order: u8,
}

impl StencilSpec {
    pub fn new(step: f64, richardson_levels: usize, derivative_order: u8) -> Self {
        assert!(step > 0.0, "step must be positive");
        assert!(richardson_levels <= 2, "at most 2 Richardson levels supported");
        assert!(
            matches!(derivative_order, 1 | 2 | 4),
            "derivative order must be 1, 2 or 4"
        );
        Self { step, richardson_levels, derivative_order }
    }

    /// Default used by the identity checks: h = 1e-3, one Richardson level.
    pub fn default_first() -> Self {
        Self::new(1e-3, 1, 1)
    }

    pub fn default_second() -> Self {
        Self::new(1e-3, 1, 2)
    }

    /// Half the width of the widest stencil evaluated, in units of x.
    pub fn span(&self) -> f64 {
        match self.derivative_order {
            4 => 2.0 * self.step,
            _ => self.step,
        }
    }
}

/// Derivative value plus an error estimate from the last extrapolation step.
#[derive(Debug, Clone, Copy)]
pub struct DerivEstimate<T> {
    pub value: T,
    pub error_estimate: f64,
}

/// Scalar types the stencils operate on (f64 and Complex64).
pub trait StencilValue:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn norm(self) -> f64;
}

impl StencilValue for f64 {
    fn norm(self) -> f64 {
        self.abs()
    }
}

impl StencilValue for num_complex::Complex64 {
    fn norm(self) -> f64 {
        num_complex::Complex64::norm(self)
    }
}

fn raw_stencil<T: StencilValue>(f: &mut impl FnMut(f64) -> T, x: f64, h: f64, order: u8) -> T {
    match order {
        1 => (f(x + h) - f(x - h)) / (2.0 * h),
        2 => (f(x + h) - f(x) * 2.0 + f(x - h)) / (h * h),
        4 => {
            (f(x + 2.0 * h) - f(x + h) * 4.0 + f(x) * 6.0 - f(x - h) * 4.0 + f(x - 2.0 * h))
                / (h * h * h * h)
        }
        _ => unreachable!(),
    }
}

/// Central-difference derivative with Richardson extrapolation.
///
/// All base stencils here have pure even-power error series, so one
/// extrapolation level cancels h² against the half-step evaluation:
/// R = (4 R(h/2) - R(h)) / 3, and so on with 16/15 at the next level.
pub fn differentiate<T: StencilValue>(
    mut f: impl FnMut(f64) -> T,
    x: f64,
    spec: &StencilSpec,
) -> DerivEstimate<T> {
    let levels = spec.richardson_levels;
    let mut table: Vec<T> = (0..=levels)
        .map(|k| raw_stencil(&mut f, x, spec.step / (1 << k) as f64, spec.derivative_order))
        .collect();

    let mut error = if levels == 0 { f64::NAN } else { 0.0 };
    let mut factor = 4.0;
    for level in 1..=levels {
        for k in 0..=levels - level {
            let refined = (table[k + 1] * factor - table[k]) / (factor - 1.0);
            if level == levels && k == 0 {
                error = (refined - table[k + 1]).norm();
            }
            table[k] = refined;
        }
        factor *= 4.0;
    }
    DerivEstimate { value: table[0], error_estimate: error }
}

/// log₂ of the error ratio under step halving, given a known true value.
pub fn observed_order<T: StencilValue>(
    mut f: impl FnMut(f64) -> T,
    x: f64,
    truth: T,
    spec: &StencilSpec,
) -> f64 {
    let coarse = differentiate(&mut f, x, spec).value;
    let fine = differentiate(
        &mut f,
        x,
        &StencilSpec { step: spec.step / 2.0, ..*spec },
    )
    .value;
    let e1 = (coarse - truth).norm();
    let e2 = (fine - truth).norm();
    (e1 / e2).log2()
}
