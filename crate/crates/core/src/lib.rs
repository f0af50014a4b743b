pub mod conformal;
pub mod eigenfunctions;
pub mod error;
pub mod exact;
pub mod hermite;
pub mod numerics;
pub mod params;
