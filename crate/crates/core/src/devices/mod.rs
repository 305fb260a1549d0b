//! Single-device memristor models: state derivative plus observable.

pub mod atomic;
pub mod hh;
pub mod hp;
pub mod spin;
pub mod threshold;

pub use atomic::{chang_model, pickett_resistance, pickett_rhs, ChangOutput, ChangParams, PickettParams};
pub use hh::{exprel_inv, hh_model, HhOutput, HhParams};
pub use hp::{
    beta_from_film, hp_analytic_w, hp_resistance, hp_rhs, hp_volatile_analytic, joglekar_window, simulate_hp, FilmParams,
    HpDrive, HpParams, Polarity, WindowKind, WindowSpec,
};
pub use spin::{spin_torque_model, SpinOutput, SpinTorqueParams};
pub use threshold::{heaviside, threshold_device_rhs, threshold_f, ThresholdDeviceParams};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Internal state of one device: `[w]`, `[theta]`, `[w1, w2, w3]` or `[M]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceState<T>(pub Vec<T>);

impl<T: Scalar> DeviceState<T> {
    /// Checks every component lies in `[lo, hi]`.
    pub fn check_bounds(&self, lo: T, hi: T) -> Result<()> {
        match self.0.iter().find(|&&x| !(x >= lo && x <= hi)) {
            Some(&x) => Err(Error::invalid("state", format!("{x} outside [{lo}, {hi}]"))),
            None => Ok(()),
        }
    }

    pub fn clamp(&mut self, lo: T, hi: T) {
        for x in &mut self.0 {
            *x = x.clamp(lo, hi);
        }
    }
}
