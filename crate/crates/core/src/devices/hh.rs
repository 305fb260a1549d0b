use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Potassium/sodium channels written as three memristive gates.
///
/// Defaults are the classic squid-axon constants in millivolts (potentials
/// measured from rest) and milliseconds, with conductances in mS/cm^2.
/// `na3` multiplies the sodium deactivation term as written
/// (`+ na3 e^(na4 V + na5) w2`), so the physical decay needs `na3 < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HhParams<T> {
    pub g_k: T,
    pub g_na: T,
    pub k1: T,
    pub k2: T,
    pub na1: T,
    pub na2: T,
    pub na3: T,
    pub na4: T,
    pub na5: T,
    pub na6: T,
    pub na7: T,
    pub na8: T,
    pub na9: T,
}

impl<T: Scalar> Default for HhParams<T> {
    fn default() -> Self {
        HhParams {
            g_k: T::lit(36.0),
            g_na: T::lit(120.0),
            k1: T::lit(-0.1),
            k2: T::lit(1.0),
            na1: T::lit(-0.1),
            na2: T::lit(2.5),
            na3: T::lit(-4.0),
            na4: T::lit(-1.0 / 18.0),
            na5: T::zero(),
            na6: T::lit(0.07),
            na7: T::lit(-0.05),
            na8: T::zero(),
            na9: T::lit(3.0),
        }
    }
}

impl<T: Scalar> HhParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.g_k > T::zero()) {
            return Err(Error::invalid("g_k", "must be > 0"));
        }
        if !(self.g_na > T::zero()) {
            return Err(Error::invalid("g_na", "must be > 0"));
        }
        Ok(())
    }
}

/// `x / (e^x - 1)`, equal to 1 at `x = 0`.
pub fn exprel_inv<T: Scalar>(x: T) -> T {
    if x.abs() < T::lit(1e-5) {
        T::one() - x / T::lit(2.0) + x * x / T::lit(12.0)
    } else {
        x / x.exp_m1()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HhOutput<T> {
    pub i_k: T,
    pub i_na: T,
    pub dw: [T; 3],
}

pub fn hh_model<T: Scalar>(w: [T; 3], v_k: T, v_na: T, p: &HhParams<T>) -> HhOutput<T> {
    let [w1, w2, w3] = w;
    let one = T::one();
    let i_k = p.g_k * w1.powi(4) * v_k;
    let i_na = p.g_na * w2.powi(3) * w3 * v_na;
    let dw1 = exprel_inv(p.k1 * v_k + p.k2) * (one - w1);
    let dw2 = exprel_inv(p.na1 * v_na + p.na2) * (one - w2) + p.na3 * (p.na4 * v_na + p.na5).exp() * w2;
    let dw3 = p.na6 * (p.na7 * v_na + p.na8).exp() * (one - w3) - w3 / ((p.na1 * v_na + p.na9).exp() + one);
    HhOutput { i_k, i_na, dw: [dw1, dw2, dw3] }
}
