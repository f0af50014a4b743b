use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("polynomial degree {degree} exceeds the configured maximum {max}")]
    DegreeTooLarge { degree: usize, max: usize },

    #[error("conformal map is undefined for zero energy")]
    ZeroEnergy,

    #[error("point lies off the image of the conformal map: |Im t| = {imag:.3e} exceeds {tol:.1e}")]
    OffManifold { imag: f64, tol: f64 },

    #[error("finite-difference stencil extends outside the sampled domain")]
    StencilOutOfDomain,

    #[error("quadrature order {order} outside the supported range 1..={max}")]
    OrderOutOfRange { order: usize, max: usize },

    #[error("quadrature not converged: last-two-order difference {delta:.3e} exceeds {tol:.1e}")]
    QuadratureOrderTooLow { delta: f64, tol: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("unknown identity '{name}'; available: {available}")]
    UnknownIdentity { name: String, available: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
