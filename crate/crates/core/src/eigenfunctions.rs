//! Oscillator eigenfunctions in real and conformal coordinates.
//!
//! Real coordinates: ψ(x,t) = φ_{l1}(x1) φ_{l2}(x2) φ_{l3}(x3) e^{-iEt/ħ}
//! with φ_l(x) = k_l H_l(ξ) e^{-ξ²/2}. Conformal coordinates drop the
//! Gaussian: ψ(z,s) = θ_{l1}θ_{l2}θ_{l3} τ(s) with θ_l(z) = k_l H_l(ζ) and
//! τ(s) = e^{-iEs/ħ}; the Gaussian is regenerated by τ on mapped points.
//!
//! Two normalization modes are kept. `PaperNorm` is (2mω/ħ)^{1/4}(2^l l!)^{-1/2}
//! verbatim; it does not give unit L² norm (∫|φ_0|² = √(2π) in natural units,
//! confirmed by quadrature). `UnitNorm` uses (mω/πħ)^{1/4} instead and is the
//! default everywhere.

use crate::error::Result;
use crate::hermite::{hermite_derivative, hermite_eval};
use crate::params::{energy_of, xi_coordinate, Energy, OscillatorParams, StateLabel};
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum NormMode {
    /// ∫|φ_l|² dx = 1.
    UnitNorm,
    /// The printed constant (2mω/ħ)^{1/4} (2^l l!)^{-1/2}.
    PaperNorm,
}

impl Default for NormMode {
    fn default() -> Self {
        NormMode::UnitNorm
    }
}

fn ln_factorial(l: usize) -> f64 {
    (1..=l).map(|k| (k as f64).ln()).sum()
}

/// Normalization constant k_l in the selected mode.
pub fn k_l(l: usize, params: &OscillatorParams, norm_mode: NormMode) -> Result<f64> {
    // shares the degree cap with the Hermite evaluator
    hermite_eval(l, 0.0)?;
    let beta = params.beta();
    let prefactor = match norm_mode {
        NormMode::PaperNorm => (2.0 * beta).powf(0.25),
        NormMode::UnitNorm => (beta / PI).powf(0.25),
    };
    let ln_scale = -0.5 * (l as f64 * 2.0f64.ln() + ln_factorial(l));
    Ok(prefactor * ln_scale.exp())
}

/// 1D eigenfunction φ_l(x) = k_l H_l(ξ) e^{-ξ²/2}.
pub fn phi(l: usize, x: f64, params: &OscillatorParams, norm_mode: NormMode) -> Result<f64> {
    let xi = xi_coordinate(x, params);
    Ok(k_l(l, params, norm_mode)? * hermite_eval(l, xi)? * (-0.5 * xi * xi).exp())
}

/// dφ_l/dx, from H_l' = 2l H_{l-1} and the Gaussian product rule.
pub fn phi_dx(l: usize, x: f64, params: &OscillatorParams, norm_mode: NormMode) -> Result<f64> {
    let xi = xi_coordinate(x, params);
    let dxi = params.xi_factor();
    let g = (-0.5 * xi * xi).exp();
    let d_dxi = (hermite_derivative(l, xi)? - xi * hermite_eval(l, xi)?) * g;
    Ok(k_l(l, params, norm_mode)? * d_dxi * dxi)
}

/// d²φ_l/dx², by a second application of the same product rule.
pub fn phi_dxx(l: usize, x: f64, params: &OscillatorParams, norm_mode: NormMode) -> Result<f64> {
    let xi = xi_coordinate(x, params);
    let beta = params.beta();
    let g = (-0.5 * xi * xi).exp();
    let h = hermite_eval(l, xi)?;
    let hm1 = if l >= 1 { hermite_eval(l - 1, xi)? } else { 0.0 };
    let hm2 = if l >= 2 { hermite_eval(l - 2, xi)? } else { 0.0 };
    let lf = l as f64;
    // d²/dξ²[H_l e^{-ξ²/2}] = [4l(l-1)H_{l-2} − 4lξH_{l-1} + (ξ²−1)H_l] e^{-ξ²/2}
    let d2_dxi2 = (4.0 * lf * (lf - 1.0) * hm2 - 4.0 * lf * xi * hm1 + (xi * xi - 1.0) * h) * g;
    Ok(k_l(l, params, norm_mode)? * d2_dxi2 * beta)
}

/// Polynomial part θ_l(z) = k_l H_l(ζ); no Gaussian factor.
pub fn theta(l: usize, z: f64, params: &OscillatorParams, norm_mode: NormMode) -> Result<f64> {
    let zeta = xi_coordinate(z, params);
    Ok(k_l(l, params, norm_mode)? * hermite_eval(l, zeta)?)
}

/// Time phase τ(s) = e^{-iEs/ħ} for complex s.
pub fn tau(s: Complex64, energy: Energy, params: &OscillatorParams) -> Complex64 {
    (Complex64::new(0.0, -energy.value / params.hbar) * s).exp()
}

/// Full eigenfunction ψ(x, t) in real coordinates.
pub fn psi_real(
    state: StateLabel,
    x: [f64; 3],
    t: f64,
    params: &OscillatorParams,
    norm_mode: NormMode,
) -> Result<Complex64> {
    let spatial = phi(state.l1 as usize, x[0], params, norm_mode)?
        * phi(state.l2 as usize, x[1], params, norm_mode)?
        * phi(state.l3 as usize, x[2], params, norm_mode)?;
    let energy = energy_of(state, params);
    Ok(tau(Complex64::new(t, 0.0), energy, params) * spatial)
}

/// Eigenfunction in conformal coordinates: θ-product times τ(s).
///
/// z is real (the map is the identity on the spatial part); s may carry the
/// imaginary displacement. The phase uses the state's own energy.
pub fn psi_conformal(
    state: StateLabel,
    z: [f64; 3],
    s: Complex64,
    params: &OscillatorParams,
    norm_mode: NormMode,
) -> Result<Complex64> {
    let poly = theta(state.l1 as usize, z[0], params, norm_mode)?
        * theta(state.l2 as usize, z[1], params, norm_mode)?
        * theta(state.l3 as usize, z[2], params, norm_mode)?;
    let energy = energy_of(state, params);
    Ok(tau(s, energy, params) * poly)
}
