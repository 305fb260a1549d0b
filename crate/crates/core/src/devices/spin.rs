use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Spin-torque junction with free-layer angle `theta`.
///
/// `pol` folds the spin-transfer prefactor so that the torque term is `pol * i`.
/// `r_a`, `r_b` are conductances in `R(theta) = 1 / (r_a + r_b cos theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinTorqueParams<T> {
    pub damping: T,
    pub gyro: T,
    pub h_k: T,
    pub pol: T,
    pub r_a: T,
    pub r_b: T,
}

impl<T: Scalar> SpinTorqueParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_a > self.r_b.abs()) {
            return Err(Error::invalid("r_a", "must exceed |r_b| so the resistance stays positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinOutput<T> {
    pub dtheta_dt: T,
    pub resistance: T,
}

pub fn spin_torque_model<T: Scalar>(theta: T, i: T, p: &SpinTorqueParams<T>) -> SpinOutput<T> {
    let torque = p.pol * i;
    let dtheta_dt = p.damping * p.gyro * p.h_k * theta.sin() * (torque - theta.cos());
    SpinOutput { dtheta_dt, resistance: T::one() / (p.r_a + p.r_b * theta.cos()) }
}
