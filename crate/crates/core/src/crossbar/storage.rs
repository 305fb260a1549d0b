use serde::{Deserialize, Serialize};

use crate::crossbar::array::Crossbar;
use crate::devices::{hp_analytic_w, hp_resistance, simulate_hp, HpDrive, HpParams, WindowSpec};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sim::{DriveSignal, IntegratorSpec};

/// Write and read voltages of a storage cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSpec<T> {
    /// Signed write voltage; under standard polarity a positive pulse SETs
    /// (drives `w` to 0, resistance to `r_on`).
    pub v_write: T,
    pub duration: T,
    pub v_read: T,
    pub read_duration: T,
}

impl<T: Scalar> PulseSpec<T> {
    pub fn validate(&self) -> Result<()> {
        for (n, v) in [("v_write", self.v_write), ("duration", self.duration), ("v_read", self.v_read), ("read_duration", self.read_duration)] {
            if !v.is_finite_val() {
                return Err(Error::invalid(n, "must be finite"));
            }
        }
        if self.duration < T::zero() || self.read_duration < T::zero() {
            return Err(Error::invalid("duration", "must be >= 0"));
        }
        if !(self.v_read.abs() < self.v_write.abs()) {
            return Err(Error::invalid("v_read", "|v_read| must be below |v_write|"));
        }
        Ok(())
    }

    /// Same pulse with the write polarity flipped.
    pub fn reversed(mut self) -> Self {
        self.v_write = -self.v_write;
        self
    }
}

/// Coefficient `b` of the square-root write law `w^2 = w0^2 + b V t` (per volt
/// and second, before the polarity sign).
///
/// With `alpha = 0` and a constant voltage, `d(w^2)/dt = -2 sign V w / (beta R(w))`.
/// Freezing `w / R(w)` at its mid-range value `1 / (r_on + r_off)` gives
/// `b = 2 / (beta (r_on + r_off))`. The full swing then takes
/// `beta (r_on + r_off) / (2 |V|)`, which is also the exact traversal time of
/// the unapproximated dynamics.
pub fn write_coefficient<T: Scalar>(hp: &HpParams<T>) -> T {
    T::lit(2.0) / (hp.beta * (hp.r_on + hp.r_off))
}

/// Square-root write law, clamped to `[0, 1]`.
pub fn write_solution<T: Scalar>(hp: &HpParams<T>, w0: T, v: T, t: T) -> T {
    let sq = w0 * w0 - hp.polarity.sign::<T>() * write_coefficient(hp) * v * t;
    sq.max(T::zero()).sqrt().min(T::one())
}

/// Time for a constant write voltage to sweep the full range of `w`,
/// `1 / (b |v_write|)`.
pub fn switching_time<T: Scalar>(hp: &HpParams<T>, v_write: T) -> Result<T> {
    hp.validate()?;
    if hp.alpha != T::zero() {
        return Err(Error::invalid("alpha", "switching time needs a non-volatile device (alpha = 0)"));
    }
    if v_write == T::zero() || !v_write.is_finite_val() {
        return Err(Error::invalid("v_write", "must be finite and non-zero"));
    }
    Ok(T::one() / (write_coefficient(hp) * v_write.abs()))
}

/// Step-count bounds for the rk4 integration of a pulse.
const MIN_PULSE_STEPS: f64 = 400.0;
const MAX_PULSE_STEPS: f64 = 400_000.0;
/// Largest change of `w` allowed per step at the fastest (`r_on`) rate.
const MAX_STEP_DW: f64 = 1e-3;

/// `w` after holding voltage `v` across a cell for `duration` (rk4, clamped).
pub fn pulse_memory<T: Scalar>(hp: &HpParams<T>, w0: T, v: T, duration: T) -> Result<T> {
    if duration == T::zero() || v == T::zero() {
        return Ok(w0);
    }
    let fastest = v.abs() * duration / (hp.beta * hp.r_on);
    let steps = (fastest / T::lit(MAX_STEP_DW)).ceil().clamp(T::lit(MIN_PULSE_STEPS), T::lit(MAX_PULSE_STEPS));
    let spec = IntegratorSpec::rk4(duration / steps, duration);
    let tr = simulate_hp(hp, &WindowSpec::default(), &HpDrive::Voltage(DriveSignal::dc(v)), w0, &spec)?;
    Ok(*tr.require("w")?.last().expect("non-empty trace"))
}

/// Exact `w` after a constant voltage pulse (closed form of the same dynamics).
pub fn pulse_memory_exact<T: Scalar>(hp: &HpParams<T>, w0: T, v: T, duration: T) -> Result<T> {
    hp_analytic_w(v * duration, w0, hp)
}

/// Applies `p.v_write` to cell `(i, j)` for `p.duration`.
pub fn write_pulse<T: Scalar>(x: &Crossbar<T>, i: usize, j: usize, p: &PulseSpec<T>) -> Result<Crossbar<T>> {
    p.validate()?;
    let w0 = x.memory(i, j)?;
    let w = pulse_memory(x.hp(), w0, p.v_write, p.duration)?;
    x.with_memory(i, j, w)
}

/// Relative half-width of the guard band around the decision threshold.
pub const GUARD_BAND: f64 = 0.05;

#[derive(Debug, Clone)]
pub struct ReadOutcome<T: Scalar> {
    pub bit: bool,
    /// `v_read / i` at the end of the read pulse.
    pub resistance: T,
    /// `|w_after - w_before|` caused by the read.
    pub disturbance: T,
    pub crossbar: Crossbar<T>,
}

/// Reads cell `(i, j)` by applying `p.v_read` for `p.read_duration`.
///
/// Bit 1 when the measured resistance is below `(r_on + r_off) / 2`; within
/// `GUARD_BAND` of that threshold the bit is ambiguous. The read voltage acts
/// through the same dynamics as a write, so the returned crossbar carries the
/// read disturbance.
pub fn read_bit<T: Scalar>(x: &Crossbar<T>, i: usize, j: usize, p: &PulseSpec<T>) -> Result<ReadOutcome<T>> {
    p.validate()?;
    if p.v_read == T::zero() {
        return Err(Error::invalid("v_read", "must be non-zero to measure a current"));
    }
    let w0 = x.memory(i, j)?;
    let w = pulse_memory(x.hp(), w0, p.v_read, p.read_duration)?;
    let r = hp_resistance(w, x.hp());
    let current = p.v_read / r;
    let resistance = p.v_read / current;
    let mid = (x.hp().r_on + x.hp().r_off) / T::lit(2.0);
    if (resistance - mid).abs() < T::lit(GUARD_BAND) * mid {
        return Err(Error::AmbiguousBit { resistance: resistance.to_f64_lossy() });
    }
    Ok(ReadOutcome { bit: resistance < mid, resistance, disturbance: (w - w0).abs(), crossbar: x.with_memory(i, j, w)? })
}

/// Storage preset: `r_on = 100`, `r_off = 16 k`, `beta = 1e-9`.
pub fn storage_device() -> HpParams<f64> {
    HpParams { alpha: 0.0, beta: 1e-9, r_on: 100.0, r_off: 16e3, polarity: Default::default() }
}

/// Write at 1 V for 1.1 switching times, read at 50 mV for 1% of a switching time.
pub fn storage_pulse(hp: &HpParams<f64>) -> Result<PulseSpec<f64>> {
    let tau = switching_time(hp, 1.0)?;
    Ok(PulseSpec { v_write: 1.0, duration: 1.1 * tau, v_read: 0.05, read_duration: 0.01 * tau })
}
