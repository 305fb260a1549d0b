use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sim::trace::Trace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Euler,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec<T> {
    pub method: Method,
    pub dt: T,
    pub t_end: T,
}

impl<T: Scalar> IntegratorSpec<T> {
    pub fn new(method: Method, dt: T, t_end: T) -> Result<Self> {
        let s = IntegratorSpec { method, dt, t_end };
        s.validate()?;
        Ok(s)
    }

    pub fn rk4(dt: T, t_end: T) -> Self {
        IntegratorSpec { method: Method::Rk4, dt, t_end }
    }

    pub fn euler(dt: T, t_end: T) -> Self {
        IntegratorSpec { method: Method::Euler, dt, t_end }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero()) || !self.dt.is_finite_val() {
            return Err(Error::invalid("dt", "must be finite and > 0"));
        }
        if !(self.t_end >= T::zero()) || !self.t_end.is_finite_val() {
            return Err(Error::invalid("t_end", "must be finite and >= 0"));
        }
        Ok(())
    }

    /// Number of steps: `t_end / dt` rounded to the nearest integer.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round().to_f64_lossy() as usize
    }
}

/// One completed step, as seen by a stop predicate.
pub struct Step<'a, T> {
    pub t: T,
    pub state: &'a [T],
    /// `(x_new - x_old) / dt`, taken after projection.
    pub rate: &'a [T],
}

#[derive(Debug, Clone)]
pub struct Outcome<T> {
    pub trace: Trace<T>,
    /// Time at which the stop predicate fired, if it did.
    pub stopped_at: Option<T>,
}

/// Integrates `dx/dt = rhs(t, x)` with a fixed step, sampling every step.
///
/// `rhs(t, x, dx)` writes the derivative into `dx`. Channels are named
/// `x0, x1, ...`.
pub fn integrate<T, F>(rhs: F, state0: &[T], spec: &IntegratorSpec<T>) -> Result<Trace<T>>
where
    T: Scalar,
    F: FnMut(T, &[T], &mut [T]),
{
    integrate_with(rhs, state0, spec, |_, _| {}, |_| false).map(|o| o.trace)
}

/// As [`integrate`], with a projection applied after every step (clamping)
/// and a predicate that ends the run early.
pub fn integrate_with<T, F, P, S>(
    mut rhs: F,
    state0: &[T],
    spec: &IntegratorSpec<T>,
    mut project: P,
    mut stop: S,
) -> Result<Outcome<T>>
where
    T: Scalar,
    F: FnMut(T, &[T], &mut [T]),
    P: FnMut(T, &mut [T]),
    S: FnMut(&Step<'_, T>) -> bool,
{
    spec.validate()?;
    if state0.is_empty() {
        return Err(Error::invalid("state0", "state must have at least one component"));
    }
    if state0.iter().any(|x| !x.is_finite_val()) {
        return Err(Error::Diverged { t: 0.0 });
    }
    let n = state0.len();
    let steps = spec.steps();
    let dt = spec.dt;
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);
    let two = T::lit(2.0);

    let mut data: Vec<Vec<T>> = state0
        .iter()
        .map(|&x| {
            let mut v = Vec::with_capacity(steps + 1);
            v.push(x);
            v
        })
        .collect();
    let mut x = state0.to_vec();
    let mut prev = x.clone();
    let mut rate = vec![T::zero(); n];
    let (mut k1, mut k2, mut k3, mut k4) = (vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]);
    let mut tmp = vec![T::zero(); n];
    let mut stopped_at = None;

    for k in 0..steps {
        let t = T::lit(k as f64) * dt;
        prev.copy_from_slice(&x);
        match spec.method {
            Method::Euler => {
                rhs(t, &x, &mut k1);
                for i in 0..n {
                    x[i] += dt * k1[i];
                }
            }
            Method::Rk4 => {
                rhs(t, &x, &mut k1);
                for i in 0..n {
                    tmp[i] = x[i] + half * dt * k1[i];
                }
                rhs(t + half * dt, &tmp, &mut k2);
                for i in 0..n {
                    tmp[i] = x[i] + half * dt * k2[i];
                }
                rhs(t + half * dt, &tmp, &mut k3);
                for i in 0..n {
                    tmp[i] = x[i] + dt * k3[i];
                }
                rhs(t + dt, &tmp, &mut k4);
                for i in 0..n {
                    x[i] += dt * sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]);
                }
            }
        }
        let t_next = T::lit((k + 1) as f64) * dt;
        project(t_next, &mut x);
        if x.iter().any(|v| !v.is_finite_val()) {
            return Err(Error::Diverged { t: t_next.to_f64_lossy() });
        }
        for i in 0..n {
            data[i].push(x[i]);
            rate[i] = (x[i] - prev[i]) / dt;
        }
        if stop(&Step { t: t_next, state: &x, rate: &rate }) {
            stopped_at = Some(t_next);
            break;
        }
    }

    let names = (0..n).map(|i| format!("x{i}")).collect();
    Ok(Outcome { trace: Trace::new(T::zero(), dt, names, data)?, stopped_at })
}

/// Infinity norm of a slice.
pub fn max_abs<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rhs_is_constant() {
        let tr = integrate(|_, _, dx: &mut [f64]| dx[0] = 0.0, &[1.0], &IntegratorSpec::rk4(0.1, 1.0)).unwrap();
        assert!(tr.channels()[0].iter().all(|&v| v == 1.0));
        assert_eq!(tr.len(), 11);
    }

    #[test]
    fn rk4_decay() {
        let tr = integrate(|_, x: &[f64], dx: &mut [f64]| dx[0] = -x[0], &[1.0], &IntegratorSpec::rk4(0.01, 1.0))
            .unwrap();
        let last = *tr.channels()[0].last().unwrap();
        assert!((last - (-1.0f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn euler_hand_unrolled() {
        let tr = integrate(|_, x: &[f64], dx: &mut [f64]| dx[0] = -x[0], &[1.0], &IntegratorSpec::euler(0.1, 1.0))
            .unwrap();
        let mut y = 1.0f64;
        for _ in 0..10 {
            y += 0.1 * -y;
        }
        assert_eq!(*tr.channels()[0].last().unwrap(), y);
        assert!((y - 0.9f64.powi(10)).abs() < 1e-15);
    }

    #[test]
    fn divergence_reports_time() {
        let r = integrate(|_, x: &[f64], dx: &mut [f64]| dx[0] = x[0] * x[0], &[1.0], &IntegratorSpec::euler(0.5, 10.0));
        match r {
            Err(Error::Diverged { t }) => assert!(t > 0.0 && t <= 10.0),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn stop_hook_truncates() {
        let out = integrate_with(
            |_, x: &[f64], dx: &mut [f64]| dx[0] = -x[0],
            &[1.0],
            &IntegratorSpec::euler(0.1, 100.0),
            |_, _| {},
            |s| s.rate[0].abs() < 1e-3,
        )
        .unwrap();
        let t = out.stopped_at.unwrap();
        assert!(t < 100.0);
        assert_eq!(out.trace.len(), (t / 0.1f64).round() as usize + 1);
    }

    #[test]
    fn time_dependent_rhs() {
        // dx/dt = cos t, x(0) = 0 -> sin t
        let tr = integrate(|t: f64, _, dx: &mut [f64]| dx[0] = t.cos(), &[0.0], &IntegratorSpec::rk4(0.01, 2.0)).unwrap();
        assert!((tr.channels()[0].last().unwrap() - 2.0f64.sin()).abs() < 1e-10);
    }

    #[test]
    fn bad_spec() {
        assert!(IntegratorSpec::new(Method::Rk4, 0.0, 1.0).is_err());
        assert!(IntegratorSpec::new(Method::Rk4, 0.1, -1.0).is_err());
    }
}
