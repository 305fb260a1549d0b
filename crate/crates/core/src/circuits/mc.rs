use serde::{Deserialize, Serialize};

use crate::circuits::lambert::lambert_w;
use crate::devices::HpParams;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sim::{integrate, IntegratorSpec, Trace};

/// Memristor in series with a capacitor that discharges through it.
///
/// The memristance seen by the discharge is `R(q) = r_on (1 + xi q / beta)`:
/// the charge that has not yet flowed back sets how far the device sits from
/// `r_on`. Under this law `q(t)` has the Lambert-W closed form of
/// [`mc_analytic`]. `c1` is that solution's integration constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McParams<T> {
    pub c: T,
    pub hp: HpParams<T>,
    #[serde(default)]
    pub c1: T,
}

impl<T: Scalar> McParams<T> {
    pub fn validate(&self) -> Result<()> {
        self.hp.validate()?;
        if !(self.c > T::zero()) {
            return Err(Error::invalid("c", "must be > 0"));
        }
        if self.hp.alpha != T::zero() {
            return Err(Error::invalid("hp.alpha", "the capacitor circuit needs a non-volatile device (alpha = 0)"));
        }
        Ok(())
    }

    pub fn time_constant(&self) -> T {
        self.hp.r_on * self.c
    }

    pub fn resistance(&self, q: T) -> T {
        self.hp.r_on * (T::one() + self.hp.xi() * q / self.hp.beta)
    }

    /// Integration constant that makes `mc_analytic(0) = q0`:
    /// `c1 = -beta r_on (ln q0 + xi q0 / beta)`.
    pub fn with_initial_charge(mut self, q0: T) -> Result<Self> {
        if !(q0 > T::zero()) {
            return Err(Error::invalid("q0", "closed form needs q0 > 0"));
        }
        self.c1 = -self.hp.beta * self.hp.r_on * (q0.ln() + self.hp.xi() * q0 / self.hp.beta);
        Ok(self)
    }

    /// Integration constant fitted to a simulated charge `q_a` at time `t_a`
    /// (the closed form passes exactly through the anchor).
    pub fn with_anchor(mut self, t_a: T, q_a: T) -> Result<Self> {
        if !(q_a > T::zero()) {
            return Err(Error::invalid("q_a", "anchor charge must be > 0"));
        }
        let k = q_a.ln() + self.hp.xi() * q_a / self.hp.beta + t_a / self.time_constant();
        self.c1 = -self.hp.beta * self.hp.r_on * k;
        Ok(self)
    }
}

/// Integrates `dq/dt = -q / (R(q) C)`. Channels: `q, v_c, r`.
pub fn mc_simulate<T: Scalar>(p: &McParams<T>, q0: T, spec: &IntegratorSpec<T>) -> Result<Trace<T>> {
    p.validate()?;
    let tr = integrate(|_, x: &[T], dx: &mut [T]| dx[0] = -x[0] / (p.resistance(x[0]) * p.c), &[q0], spec)?;
    let q = tr.channels()[0].clone();
    let v: Vec<T> = q.iter().map(|&x| x / p.c).collect();
    let r: Vec<T> = q.iter().map(|&x| p.resistance(x)).collect();
    Trace::new(tr.t0(), tr.dt(), vec!["q".into(), "v_c".into(), "r".into()], vec![q, v, r])
}

/// `q(t) = (beta/xi) W((xi/beta) e^(-t/(r_on C)) e^(-c1/(beta r_on)))`.
///
/// At `xi = 0` this is the plain RC decay `e^(-c1/(beta r_on)) e^(-t/(r_on C))`.
pub fn mc_analytic<T: Scalar>(t: T, p: &McParams<T>) -> Result<T> {
    let beta = p.hp.beta;
    let xi = p.hp.xi();
    let log_amp = -t / p.time_constant() - p.c1 / (beta * p.hp.r_on);
    if xi == T::zero() {
        return Ok(log_amp.exp());
    }
    let k = xi / beta;
    Ok(lambert_w(k * log_amp.exp())? / k)
}
