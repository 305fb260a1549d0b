//! Small fixed circuits solved as explicit ODE systems.

pub mod amoeba;
pub mod hh;
pub mod lambert;
pub mod mc;
pub mod plant;

pub use amoeba::{amoeba_rhs, amoeba_settling, amoeba_simulate, AmoebaInit, AmoebaParams, Settling};
pub use hh::hh_simulate;
pub use lambert::lambert_w;
pub use mc::{mc_analytic, mc_simulate, McParams};
pub use plant::{plant_simulate, Nonlinearity, PlantParams};
