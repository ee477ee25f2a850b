//! Euler particle dynamics near the boundary of singular planar domains,
//! computed through the Riemann map from the unit disc.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`.

pub mod analysis;
pub mod conformal;
pub mod disc;
pub mod dynamics;
pub mod error;
pub mod moduli;
pub mod quadrature;
pub mod scalar;
pub mod velocity;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Modulus = moduli::Modulus<f64>;
pub type RateFunctions = moduli::RateFunctions<f64>;
pub type ConformalDomain = conformal::ConformalDomain<f64>;
pub type VorticityField = velocity::VorticityField<f64>;
pub type VelocityGrid = velocity::VelocityGrid<f64>;
