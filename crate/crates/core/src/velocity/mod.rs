//! Biot-Savart velocity of stationary vorticity, pushed forward to the disc.

mod biot_savart;
mod field;
mod grid;

pub use biot_savart::{
    boundary_distance_rate, boundary_distance_rate_plain, disc_velocity, kernel, kernel_components,
    velocity_components, VelocityOptions, VelocitySample,
};
pub(crate) use biot_savart::disc_layout;
pub use field::{Parity, PolarCells, VorticityField};
pub use grid::{GridHeader, GridSpec, VelocityGrid};
