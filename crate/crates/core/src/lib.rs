//! Semiclassical dynamics of an optomechanical cavity coupled to a gain
//! cavity, and the diagnostics used to map its route to chaos.
//!
//! Everything below runs in units of the passive-cavity decay rate `gamma`
//! (time in `1/gamma`). [`units::TimeScale`] converts to microseconds.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod integrator;
pub mod model;
pub mod sweep;
pub mod units;

pub use dynamics::{integrate, integrate_with_tangent, resample, IntegratorConfig, TangentLog, Trajectory};
pub use error::{Error, Result};
pub use model::{
    classify_phase, drive_amplitude_from_power, exceptional_point_coupling, jacobian, linear_cavity_eigenvalues,
    linear_max_growth_rate, mechanical_eigenvalues,
    normal_mode_splitting, power_from_amplitude, reduce_params, vector_field, Control, Drive, PhaseLabel,
    PhysicalParams, ReducedParams, SystemState, TangentVector,
};
