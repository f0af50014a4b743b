//! Physical parameters, quantum-number labels and per-state energies.
//!
//! Every other module consumes these types. The oscillator is characterised
//! by (ħ, m, ω); each eigenstate is a triple of non-negative quantum numbers
//! and carries its own energy ħω(n + 3/2), which in turn parametrises the
//! conformal map for that state.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Physical constants of the oscillator: ħ (J·s), m (kg), ω (rad/s).
///
/// ω = 0 is the legal free-field limit. ω is an angular frequency even
/// though it multiplies like a spring constant in the potential ½mω²x².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams {
    pub hbar: f64,
    pub mass: f64,
    pub omega: f64,
}

impl OscillatorParams {
    pub fn new(hbar: f64, mass: f64, omega: f64) -> Result<Self> {
        let p = Self { hbar, mass, omega };
        p.validate()?;
        Ok(p)
    }

    /// Natural units ħ = m = ω = 1, so ξ = x and E = n + 3/2.
    pub fn natural() -> Self {
        Self { hbar: 1.0, mass: 1.0, omega: 1.0 }
    }

    /// Natural-unit parameters with ω overridden (ω = 0 allowed).
    pub fn natural_with_omega(omega: f64) -> Result<Self> {
        Self::new(1.0, 1.0, omega)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hbar > 0.0) || !self.hbar.is_finite() {
            return Err(Error::ConfigInvalid(format!("hbar must be positive, got {}", self.hbar)));
        }
        if !(self.mass > 0.0) || !self.mass.is_finite() {
            return Err(Error::ConfigInvalid(format!("mass must be positive, got {}", self.mass)));
        }
        if !(self.omega >= 0.0) || !self.omega.is_finite() {
            return Err(Error::ConfigInvalid(format!(
                "omega must be non-negative, got {}",
                self.omega
            )));
        }
        Ok(())
    }

    /// Inverse-length-squared scale mω/ħ.
    pub fn beta(&self) -> f64 {
        self.mass * self.omega / self.hbar
    }

    /// Length-to-ξ conversion factor sqrt(mω/ħ). Finite and ≥ 0 for valid params.
    pub fn xi_factor(&self) -> f64 {
        self.beta().sqrt()
    }

    /// Harmonic potential ½mω²x², x² = Σx_i².
    pub fn potential(&self, x: [f64; 3]) -> f64 {
        let x2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        0.5 * self.mass * self.omega * self.omega * x2
    }
}

/// Quantum numbers (l₁, l₂, l₃) of one eigenstate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StateLabel {
    pub l1: u32,
    pub l2: u32,
    pub l3: u32,
}

impl StateLabel {
    pub fn new(l1: u32, l2: u32, l3: u32) -> Self {
        Self { l1, l2, l3 }
    }

    pub fn ground() -> Self {
        Self::new(0, 0, 0)
    }

    /// Total degree n = l₁ + l₂ + l₃.
    pub fn total(&self) -> u32 {
        self.l1 + self.l2 + self.l3
    }

    pub fn component(&self, axis: usize) -> u32 {
        match axis {
            0 => self.l1,
            1 => self.l2,
            2 => self.l3,
            _ => panic!("axis {axis} out of range 0..3"),
        }
    }

    pub fn with_component(&self, axis: usize, value: u32) -> Self {
        let mut s = *self;
        match axis {
            0 => s.l1 = value,
            1 => s.l2 = value,
            2 => s.l3 = value,
            _ => panic!("axis {axis} out of range 0..3"),
        }
        s
    }

    /// All states with total degree ≤ n_max, in lexicographic order.
    pub fn all_up_to(n_max: u32) -> Vec<StateLabel> {
        let mut out = Vec::new();
        for l1 in 0..=n_max {
            for l2 in 0..=n_max - l1 {
                for l3 in 0..=n_max - l1 - l2 {
                    out.push(StateLabel::new(l1, l2, l3));
                }
            }
        }
        out
    }
}

impl std::fmt::Display for StateLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.l1, self.l2, self.l3)
    }
}

/// Energy in joules, tagged with the quantum number it came from (if any).
///
/// The conformal map takes energy as a parameter, so free values not tied
/// to a state are allowed; `energy_of` always records the state's n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Energy {
    pub value: f64,
    pub n: Option<u32>,
}

impl Energy {
    pub fn from_value(value: f64) -> Self {
        Self { value, n: None }
    }
}

/// E = ħω(l₁ + l₂ + l₃ + 3/2).
pub fn energy_of(state: StateLabel, params: &OscillatorParams) -> Energy {
    let n = state.total();
    Energy {
        value: params.hbar * params.omega * (f64::from(n) + 1.5),
        n: Some(n),
    }
}

/// Dimensionless coordinate ξ = sqrt(mω/ħ)·x.
pub fn xi_coordinate(x: f64, params: &OscillatorParams) -> f64 {
    params.xi_factor() * x
}
