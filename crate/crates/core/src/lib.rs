//! Simulation toolkit for memristive devices, circuits, crossbar arrays and
//! networks.
//!
//! The numerics are generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases fix the common double-precision case.

// `!(x > 0)` is the NaN-rejecting form of a range check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod scalar;
pub mod circuits;
pub mod crossbar;
pub mod devices;
pub mod learning;
pub mod linalg;
pub mod network;
pub mod presets;
pub mod sim;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Trace64 = sim::Trace<f64>;
pub type DriveSignal64 = sim::DriveSignal<f64>;
pub type IntegratorSpec64 = sim::IntegratorSpec<f64>;
pub type HpParams64 = devices::HpParams<f64>;
pub type CircuitGraph64 = network::CircuitGraph<f64>;
pub type Projector64 = network::Projector<f64>;
pub type NetworkState64 = network::NetworkState<f64>;
pub type Crossbar64 = crossbar::Crossbar<f64>;
pub type PulseSpec64 = crossbar::PulseSpec<f64>;
pub type Reservoir64 = learning::Reservoir<f64>;
pub type NefPopulation64 = learning::NefPopulation<f64>;
pub type LcaProblem64 = learning::LcaProblem<f64>;
