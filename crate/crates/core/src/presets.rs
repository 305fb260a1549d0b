//! Named parameter sets for the reference experiments, shared by the
//! command-line tool and the acceptance suite.

use serde::{Deserialize, Serialize};

use crate::circuits::{AmoebaInit, AmoebaParams, McParams};
use crate::devices::{simulate_hp, HpDrive, HpParams, ThresholdDeviceParams, WindowSpec};
use crate::error::{Error, Result};
use crate::sim::{loop_area, DriveSignal, IntegratorSpec, Schedule, Segment, Trace};

/// Sinusoidal voltage sweep of one HP device at several frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HysteresisConfig {
    pub hp: HpParams<f64>,
    pub w0: f64,
    pub amplitude: f64,
    /// Hz, increasing.
    pub frequencies: Vec<f64>,
    pub steps_per_period: usize,
}

impl HysteresisConfig {
    /// `alpha = 0`, `beta = 0.3 mA`, 1 kOhm / 6 kOhm, unit amplitude.
    pub fn figure() -> Self {
        HysteresisConfig {
            hp: HpParams { alpha: 0.0, beta: 3e-4, r_on: 1e3, r_off: 6e3, polarity: Default::default() },
            w0: 0.8,
            amplitude: 1.0,
            frequencies: vec![1.0, 4.0, 16.0],
            steps_per_period: 4000,
        }
    }
}

/// One loop of a hysteresis sweep.
#[derive(Debug, Clone)]
pub struct HysteresisLoop {
    pub frequency: f64,
    /// Channels `w, v, i, r` over exactly one period (end point excluded).
    pub trace: Trace<f64>,
    pub area: f64,
}

/// Simulates one drive period per frequency with rk4.
pub fn hysteresis_sweep(cfg: &HysteresisConfig) -> Result<Vec<HysteresisLoop>> {
    if cfg.steps_per_period < 8 {
        return Err(Error::invalid("steps_per_period", "need at least 8"));
    }
    cfg.frequencies
        .iter()
        .map(|&f| {
            if !(f > 0.0) {
                return Err(Error::invalid("frequencies", "must be > 0"));
            }
            let period = 1.0 / f;
            let dt = period / cfg.steps_per_period as f64;
            let drive = HpDrive::Voltage(DriveSignal::sine(cfg.amplitude, f));
            let full = simulate_hp(&cfg.hp, &WindowSpec::default(), &drive, cfg.w0, &IntegratorSpec::rk4(dt, period))?;
            let keep: Vec<Vec<f64>> = full.channels().iter().map(|c| c[..cfg.steps_per_period].to_vec()).collect();
            let trace = Trace::new(0.0, dt, full.names().to_vec(), keep)?;
            let area = loop_area(trace.require("v")?, trace.require("i")?)?;
            Ok(HysteresisLoop { frequency: f, trace, area })
        })
        .collect()
}

/// Adaptation circuit with its figure parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmoebaConfig {
    pub params: AmoebaParams<f64>,
    pub init: AmoebaInit<f64>,
    pub schedule: Schedule<f64>,
    pub integrator: IntegratorSpec<f64>,
}

impl AmoebaConfig {
    /// Stimulus 0.5 for 150 time units, then -2 for 300; Euler with `dt = 0.1`.
    pub fn figure() -> Self {
        AmoebaConfig {
            params: AmoebaParams {
                c: 1.0,
                r: 1.0,
                l: 2.0,
                dev: ThresholdDeviceParams { t_alpha: 0.1, t_beta: 100.0, v_t: 2.5, r1: 3.0, r2: 20.0 },
            },
            init: AmoebaInit { i0: 1.0, vc0: 1.0, m0: 7.0 },
            schedule: Schedule {
                segments: vec![
                    Segment { duration: 150.0, signal: DriveSignal::dc(0.5) },
                    Segment { duration: 300.0, signal: DriveSignal::dc(-2.0) },
                ],
            },
            integrator: IntegratorSpec::euler(0.1, 450.0),
        }
    }
}

/// Capacitor discharging through a memristor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub params: McParams<f64>,
    pub q0: f64,
    /// Run length in units of `r_on C`.
    pub time_constants: f64,
    pub steps_per_time_constant: usize,
}

impl McConfig {
    pub fn reference() -> Self {
        McConfig {
            params: McParams { c: 1e-3, hp: HpParams { alpha: 0.0, beta: 1e-3, r_on: 100.0, r_off: 1600.0, polarity: Default::default() }, c1: 0.0 },
            q0: 5e-3,
            time_constants: 20.0,
            steps_per_time_constant: 200,
        }
    }

    pub fn integrator(&self) -> IntegratorSpec<f64> {
        let tau = self.params.time_constant();
        IntegratorSpec::rk4(tau / self.steps_per_time_constant as f64, self.time_constants * tau)
    }
}
