use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Voltage-controlled threshold memristor with memristance bounded in `[r1, r2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdDeviceParams<T> {
    /// Sub-threshold rate.
    pub t_alpha: T,
    /// Above-threshold rate.
    pub t_beta: T,
    pub v_t: T,
    pub r1: T,
    pub r2: T,
}

impl<T: Scalar> ThresholdDeviceParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_t > T::zero()) {
            return Err(Error::invalid("v_t", "must be > 0"));
        }
        if !(self.r1 < self.r2) {
            return Err(Error::invalid("r1", "must be < r2"));
        }
        if !(self.r1 > T::zero()) {
            return Err(Error::invalid("r1", "must be > 0"));
        }
        Ok(())
    }
}

/// Step function with `step(0) = 0`.
pub fn heaviside<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        T::one()
    } else {
        T::zero()
    }
}

/// `f(V) = (b - a)/2 (|V + V_T| - |V - V_T|) - b V`.
pub fn threshold_f<T: Scalar>(v: T, p: &ThresholdDeviceParams<T>) -> T {
    let half = T::lit(0.5);
    (p.t_beta - p.t_alpha) * half * ((v + p.v_t).abs() - (v - p.v_t).abs()) - p.t_beta * v
}

/// `dM/dt = f(V)(step(V) step(M - r1) + step(-V) step(r2 - M))`.
///
/// The gates stop motion at the bounds; a fixed step can still overshoot by
/// one step's worth, which simulations remove by clamping `M` to `[r1, r2]`.
pub fn threshold_device_rhs<T: Scalar>(m: T, v_m: T, p: &ThresholdDeviceParams<T>) -> T {
    let gate = heaviside(v_m) * heaviside(m - p.r1) + heaviside(-v_m) * heaviside(p.r2 - m);
    threshold_f(v_m, p) * gate
}
