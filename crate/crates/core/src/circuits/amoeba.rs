use serde::{Deserialize, Serialize};

use crate::devices::{threshold_device_rhs, ThresholdDeviceParams};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sim::{integrate_with, max_abs, IntegratorSpec, Schedule, Trace};

/// Series `R`-`L` feeding a capacitor `C` in parallel with a threshold memristor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmoebaParams<T> {
    pub c: T,
    pub r: T,
    pub l: T,
    pub dev: ThresholdDeviceParams<T>,
}

impl<T: Scalar> AmoebaParams<T> {
    pub fn validate(&self) -> Result<()> {
        for (n, v) in [("c", self.c), ("r", self.r), ("l", self.l)] {
            if !(v > T::zero()) || !v.is_finite_val() {
                return Err(Error::invalid(n, "must be finite and > 0"));
            }
        }
        self.dev.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmoebaInit<T> {
    pub i0: T,
    pub vc0: T,
    pub m0: T,
}

/// Time derivative of `(I, V_C, M)` under source voltage `v`.
pub fn amoeba_rhs<T: Scalar>(state: [T; 3], v: T, p: &AmoebaParams<T>) -> [T; 3] {
    let [i, vc, m] = state;
    [
        -p.r / p.l * i + (v - vc) / p.l,
        -vc / (m * p.c) + i / p.c,
        threshold_device_rhs(m, vc, &p.dev),
    ]
}

/// Integrates the circuit. Channels: `i, v_c, m, v`. `M` is clamped to `[r1, r2]`.
pub fn amoeba_simulate<T: Scalar>(
    p: &AmoebaParams<T>,
    init: &AmoebaInit<T>,
    drive: &Schedule<T>,
    spec: &IntegratorSpec<T>,
) -> Result<Trace<T>> {
    p.validate()?;
    if !(init.m0 >= p.dev.r1 && init.m0 <= p.dev.r2) {
        return Err(Error::invalid("m0", "must lie in [r1, r2]"));
    }
    let (r1, r2) = (p.dev.r1, p.dev.r2);
    let out = integrate_with(
        |t, x: &[T], dx: &mut [T]| dx.copy_from_slice(&amoeba_rhs([x[0], x[1], x[2]], drive.eval(t), p)),
        &[init.i0, init.vc0, init.m0],
        spec,
        |_, x: &mut [T]| x[2] = x[2].clamp(r1, r2),
        |_| false,
    )?;
    let mut tr = out.trace.rename(&["i", "v_c", "m"])?;
    let v = tr.times().into_iter().map(|t| drive.eval(t)).collect();
    tr.push_channel("v", v)?;
    Ok(tr)
}

/// Settling of one drive segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settling<T> {
    pub segment_start: T,
    /// First time after which every sample in the segment has `|rhs|_inf < tol`.
    pub settled_at: Option<T>,
    /// `|rhs|_inf` at the last sample of the segment.
    pub final_rate: T,
}

pub fn amoeba_settling<T: Scalar>(
    tr: &Trace<T>,
    drive: &Schedule<T>,
    p: &AmoebaParams<T>,
    tol: T,
) -> Result<Vec<Settling<T>>> {
    let (i, vc, m) = (tr.require("i")?, tr.require("v_c")?, tr.require("m")?);
    let mut bounds = vec![T::zero()];
    bounds.extend(drive.switch_times());
    let end = tr.time(tr.len() - 1);
    let mut out = Vec::new();
    for (s, &start) in bounds.iter().enumerate() {
        let stop = bounds.get(s + 1).copied().unwrap_or(end + tr.dt());
        // samples strictly before the next switch, evaluated under this segment's drive
        let ks: Vec<usize> = (0..tr.len()).filter(|&k| tr.time(k) >= start && tr.time(k) < stop).collect();
        let mut settled_at = None;
        let mut final_rate = T::zero();
        for &k in &ks {
            let t = tr.time(k);
            let rate = max_abs(&amoeba_rhs([i[k], vc[k], m[k]], drive.eval(t), p));
            final_rate = rate;
            if rate < tol {
                settled_at.get_or_insert(t);
            } else {
                settled_at = None;
            }
        }
        out.push(Settling { segment_start: start, settled_at, final_rate });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{DriveSignal, Segment};

    fn params() -> AmoebaParams<f64> {
        AmoebaParams {
            c: 1.0,
            r: 1.0,
            l: 2.0,
            dev: ThresholdDeviceParams { t_alpha: 0.1, t_beta: 100.0, v_t: 2.5, r1: 3.0, r2: 20.0 },
        }
    }

    #[test]
    fn zero_drive_decays() {
        let p = params();
        let init = AmoebaInit { i0: 1.0, vc0: 1.0, m0: 7.0 };
        let drive = Schedule::constant(DriveSignal::zero(), 200.0);
        let tr = amoeba_simulate(&p, &init, &drive, &IntegratorSpec::euler(0.1, 200.0)).unwrap();
        let last = tr.last_row();
        assert!(last[0].abs() < 1e-6 && last[1].abs() < 1e-6);
        let m = tr.channel("m").unwrap();
        let n = m.len();
        assert!((m[n - 1] - m[n - 2]).abs() < 1e-9);
    }

    #[test]
    fn stays_in_bounds_and_settles() {
        let p = params();
        let init = AmoebaInit { i0: 1.0, vc0: 1.0, m0: 7.0 };
        let drive = Schedule::new(vec![
            Segment { duration: 150.0, signal: DriveSignal::dc(0.5) },
            Segment { duration: 300.0, signal: DriveSignal::dc(-2.0) },
        ])
        .unwrap();
        let tr = amoeba_simulate(&p, &init, &drive, &IntegratorSpec::euler(0.1, 450.0)).unwrap();
        assert!(tr.channel("m").unwrap().iter().all(|&m| (3.0..=20.0).contains(&m)));
        let s = amoeba_settling(&tr, &drive, &p, 1e-3).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.iter().all(|x| x.settled_at.is_some()), "{s:?}");
        let m = tr.channel("m").unwrap();
        assert!((m[1499] - 3.0).abs() < 1e-6);
        assert!((m[m.len() - 1] - 20.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_start_outside_bounds() {
        let init = AmoebaInit { i0: 0.0, vc0: 0.0, m0: 25.0 };
        let drive = Schedule::constant(DriveSignal::zero(), 1.0);
        assert!(amoeba_simulate(&params(), &init, &drive, &IntegratorSpec::euler(0.1, 1.0)).is_err());
    }
}
