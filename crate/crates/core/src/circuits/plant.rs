use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sim::{DriveSignal, IntegratorSpec, Trace};

/// Voltage dependence `h(V)` of the memristance `R_o h(V)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase", deny_unknown_fields)]
pub enum Nonlinearity<T> {
    /// `c`
    Constant { c: T },
    /// `c e^(k V)`
    Exp { c: T, k: T },
    /// `c sinh(k V)`
    Sinh { c: T, k: T },
}

impl<T: Scalar> Nonlinearity<T> {
    pub fn eval(&self, v: T) -> T {
        match *self {
            Nonlinearity::Constant { c } => c,
            Nonlinearity::Exp { c, k } => c * (k * v).exp(),
            Nonlinearity::Sinh { c, k } => c * (k * v).sinh(),
        }
    }
}

/// Plant memristor with an optional parasitic series RC branch in parallel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantParams<T> {
    pub p_beta: T,
    pub r_o: T,
    pub h: Nonlinearity<T>,
    pub a_const: T,
    /// Series resistance of the parasitic branch; `None` removes the branch.
    #[serde(default)]
    pub rc_r: Option<T>,
    #[serde(default)]
    pub rc_c: T,
}

impl<T: Scalar> PlantParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_o > T::zero()) {
            return Err(Error::invalid("r_o", "must be > 0"));
        }
        if !(self.p_beta > T::zero()) {
            return Err(Error::invalid("p_beta", "must be > 0"));
        }
        if self.a_const == T::zero() || !self.a_const.is_finite_val() {
            return Err(Error::invalid("a_const", "must be finite and nonzero"));
        }
        if let Some(r) = self.rc_r {
            if !(r > T::zero()) {
                return Err(Error::invalid("rc_r", "must be > 0"));
            }
            if !(self.rc_c > T::zero()) {
                return Err(Error::invalid("rc_c", "must be > 0 when the RC branch is enabled"));
            }
        }
        Ok(())
    }
}

/// Channels: `v, i_m, i_rc, i`.
///
/// `i_m = e^(bt) V / (b R_o J(t) + A)` with `J(t) = integral_0^t h(V(x)) e^(bx) dx`.
/// Numerator and denominator are both scaled by `e^(-bt)`, and the scaled
/// integral is advanced with the trapezoid rule on the trace step. The RC
/// branch charge follows `dq/dt = (V - q/C) / R` (rk4 on the same step).
pub fn plant_simulate<T: Scalar>(p: &PlantParams<T>, v: &DriveSignal<T>, spec: &IntegratorSpec<T>) -> Result<Trace<T>> {
    p.validate()?;
    v.validate()?;
    spec.validate()?;
    let n = spec.steps();
    let dt = spec.dt;
    let half = T::lit(0.5);
    let decay = (-p.p_beta * dt).exp();
    let time = |k: usize| T::lit(k as f64) * dt;

    let mut vs = Vec::with_capacity(n + 1);
    let mut im = Vec::with_capacity(n + 1);
    let mut irc = Vec::with_capacity(n + 1);
    let mut total = Vec::with_capacity(n + 1);

    let mut j_scaled = T::zero();
    let mut q = T::zero();
    let sign0 = p.a_const.signum();
    let rc_current = |t: T, q: T| match p.rc_r {
        Some(r) => (v.eval(t) - q / p.rc_c) / r,
        None => T::zero(),
    };
    for k in 0..=n {
        let t = time(k);
        if k > 0 {
            let t_prev = time(k - 1);
            j_scaled = decay * j_scaled + half * dt * (p.h.eval(v.eval(t_prev)) * decay + p.h.eval(v.eval(t)));
            if p.rc_r.is_some() {
                let f = |tt: T, qq: T| rc_current(tt, qq);
                let k1 = f(t_prev, q);
                let k2 = f(t_prev + half * dt, q + half * dt * k1);
                let k3 = f(t_prev + half * dt, q + half * dt * k2);
                let k4 = f(t, q + dt * k3);
                q += dt / T::lit(6.0) * (k1 + T::lit(2.0) * (k2 + k3) + k4);
            }
        }
        let denom = p.p_beta * p.r_o * j_scaled + p.a_const * (-p.p_beta * t).exp();
        if denom == T::zero() || denom.signum() != sign0 || !denom.is_finite_val() {
            return Err(Error::DenominatorCrossing { t: t.to_f64_lossy() });
        }
        let vt = v.eval(t);
        let i_m = vt / denom;
        let i_rc = rc_current(t, q);
        vs.push(vt);
        im.push(i_m);
        irc.push(i_rc);
        total.push(i_m + i_rc);
    }
    Trace::new(
        T::zero(),
        dt,
        ["v", "i_m", "i_rc", "i"].iter().map(|s| s.to_string()).collect(),
        vec![vs, im, irc, total],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::loop_area;

    fn params() -> PlantParams<f64> {
        PlantParams { p_beta: 1.0, r_o: 100.0, h: Nonlinearity::Exp { c: 1.0, k: 1.0 }, a_const: 100.0, rc_r: None, rc_c: 0.0 }
    }

    #[test]
    fn zero_drive() {
        let tr = plant_simulate(&params(), &DriveSignal::zero(), &IntegratorSpec::euler(0.01, 5.0)).unwrap();
        assert!(tr.channel("i_m").unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn disabled_branch_passes_memristor_current() {
        let tr = plant_simulate(&params(), &DriveSignal::sine(1.0, 0.5), &IntegratorSpec::euler(0.01, 5.0)).unwrap();
        assert_eq!(tr.channel("i").unwrap(), tr.channel("i_m").unwrap());
    }

    #[test]
    fn constant_h_matches_quadrature() {
        let b = 1e-3;
        let p = PlantParams { p_beta: b, h: Nonlinearity::Constant { c: 1.0 }, a_const: 10.0, ..params() };
        let tr = plant_simulate(&p, &DriveSignal::dc(2.0), &IntegratorSpec::euler(0.01, 50.0)).unwrap();
        let im = tr.channel("i_m").unwrap();
        for k in (0..im.len()).step_by(500) {
            let t = tr.time(k);
            let want = (b * t).exp() * 2.0 / (p.r_o * ((b * t).exp() - 1.0) + p.a_const);
            assert!((im[k] - want).abs() / want < 1e-9, "t = {t}");
        }
        assert!(im.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn denominator_crossing() {
        let p = PlantParams { a_const: -1.0, h: Nonlinearity::Constant { c: 1.0 }, ..params() };
        let r = plant_simulate(&p, &DriveSignal::dc(1.0), &IntegratorSpec::euler(0.01, 5.0));
        assert!(matches!(r, Err(Error::DenominatorCrossing { .. })));
    }

    fn normalized_area(p: &PlantParams<f64>, f: f64) -> f64 {
        let periods = 20.0;
        let dt = 1.0 / (f * 2000.0);
        let tr = plant_simulate(p, &DriveSignal::sine(1.0, f), &IntegratorSpec::euler(dt, periods / f)).unwrap();
        let n = tr.len();
        let last = n - 2000..n;
        let v = &tr.channel("v").unwrap()[last.clone()];
        let i = &tr.channel("i").unwrap()[last];
        let peak_i = i.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        loop_area(v, i).unwrap() / peak_i
    }

    #[test]
    fn parasitic_branch_keeps_loop_open() {
        let bare = params();
        let with_rc = PlantParams { rc_r: Some(100.0), rc_c: 1e-4, ..params() };
        for f in [50.0, 100.0] {
            let a0 = normalized_area(&bare, f);
            let a1 = normalized_area(&with_rc, f);
            assert!(a0 < 0.01, "bare loop should collapse: {a0}");
            assert!(a1 > 0.1, "RC loop should stay open: {a1}");
        }
    }
}
