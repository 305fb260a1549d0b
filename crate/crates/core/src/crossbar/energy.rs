use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Inputs of the Landauer-bound energy comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyParams<T> {
    pub p_err: T,
    /// Precision `L`.
    pub l_bits: T,
    /// Synapse / neuron count `N`.
    pub n: T,
    /// Thermal energy `kT` in joules.
    pub kt: T,
}

impl<T: Scalar> EnergyParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_err > T::zero() && self.p_err < T::one()) {
            return Err(Error::invalid("p_err", "must lie in (0, 1)"));
        }
        if !(self.l_bits >= T::one()) || !self.l_bits.is_finite_val() {
            return Err(Error::invalid("l_bits", "must be >= 1"));
        }
        if !(self.n >= T::one()) || !self.n.is_finite_val() {
            return Err(Error::invalid("n", "must be >= 1"));
        }
        if !(self.kt > T::zero()) || !self.kt.is_finite_val() {
            return Err(Error::invalid("kt", "must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyEstimates<T> {
    pub e_gate: T,
    pub e_dig: T,
    pub e_memr: T,
}

/// `e_gate = -2 ln(p) kT`, `e_dig = 24 ln(1/p) log2(L)^2 N kT`,
/// `e_memr = ln(1/p) L^2 N^2 kT / 24`.
pub fn energy_estimates<T: Scalar>(p: &EnergyParams<T>) -> Result<EnergyEstimates<T>> {
    p.validate()?;
    let ln_inv = -p.p_err.ln();
    let log2l = p.l_bits.ln() / T::lit(2.0).ln();
    Ok(EnergyEstimates {
        e_gate: T::lit(2.0) * ln_inv * p.kt,
        e_dig: T::lit(24.0) * ln_inv * log2l * log2l * p.n * p.kt,
        e_memr: ln_inv * p.l_bits * p.l_bits * p.n * p.n * p.kt / T::lit(24.0),
    })
}
