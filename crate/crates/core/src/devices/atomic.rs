use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Two-branch exponential switching model for TiO2.
///
/// No reference values ship with the model; [`PickettParams::placeholder`]
/// only satisfies the sign constraints and must be replaced for quantitative
/// work. `w` is dimensionless here, so `a_on`, `a_off` and `w_c` are fractions
/// of the film.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PickettParams<T> {
    pub f_off: T,
    pub f_on: T,
    pub i_off: T,
    pub i_on: T,
    pub a_off: T,
    pub a_on: T,
    pub w_c: T,
    pub b: T,
    pub r_on: T,
    pub r_off: T,
}

impl<T: Scalar> PickettParams<T> {
    pub fn placeholder() -> Self {
        PickettParams {
            f_off: T::one(),
            f_on: T::one(),
            i_off: T::lit(1e-4),
            i_on: T::lit(1e-4),
            a_off: T::lit(0.6),
            a_on: T::lit(0.4),
            w_c: T::lit(0.1),
            b: T::lit(5e-4),
            r_on: T::lit(100.0),
            r_off: T::lit(16e3),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("f_off", self.f_off),
            ("f_on", self.f_on),
            ("i_off", self.i_off),
            ("i_on", self.i_on),
            ("a_off", self.a_off),
            ("a_on", self.a_on),
            ("w_c", self.w_c),
            ("b", self.b),
            ("r_on", self.r_on),
            ("r_off", self.r_off),
        ];
        for (n, v) in fields {
            if !(v > T::zero()) || !v.is_finite_val() {
                return Err(Error::invalid(n, "must be finite and > 0"));
            }
        }
        Ok(())
    }
}

/// State derivative: the off branch for `i > 0`, the on branch for `i < 0`.
pub fn pickett_rhs<T: Scalar>(w: T, i: T, p: &PickettParams<T>) -> T {
    let damp = i.abs() / p.b;
    if i > T::zero() {
        let inner = ((w - p.a_off) / p.w_c - damp).exp();
        p.f_off * (i / p.i_off).sinh() * (-inner - w / p.w_c).exp()
    } else if i < T::zero() {
        let inner = (-(w - p.a_on) / p.w_c - damp).exp();
        p.f_on * (i / p.i_on).sinh() * (-inner - w / p.w_c).exp()
    } else {
        T::zero()
    }
}

/// `R(w) = r_off (1 - w) + r_on w` (note the reversed roles compared to the linear model).
pub fn pickett_resistance<T: Scalar>(w: T, p: &PickettParams<T>) -> T {
    p.r_off * (T::one() - w) + p.r_on * w
}

/// Voltage-controlled WOx model. All constants positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChangParams<T> {
    pub c_alpha: T,
    pub c_beta: T,
    pub c_gamma: T,
    pub c_delta: T,
    pub c_lambda: T,
    pub c_eta1: T,
    pub c_eta2: T,
}

impl<T: Scalar> ChangParams<T> {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("c_alpha", self.c_alpha),
            ("c_beta", self.c_beta),
            ("c_gamma", self.c_gamma),
            ("c_delta", self.c_delta),
            ("c_lambda", self.c_lambda),
            ("c_eta1", self.c_eta1),
            ("c_eta2", self.c_eta2),
        ];
        for (n, v) in fields {
            if !(v > T::zero()) || !v.is_finite_val() {
                return Err(Error::invalid(n, "must be finite and > 0"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChangOutput<T> {
    pub current: T,
    pub dw_dt: T,
}

/// `I = a (1 - w)(1 - e^(b V)) + w g sinh(d V)`, `dw/dt = l (e^(e1 V) - e^(-e2 V))`.
pub fn chang_model<T: Scalar>(w: T, v: T, p: &ChangParams<T>) -> ChangOutput<T> {
    let schottky = p.c_alpha * (T::one() - w) * -(p.c_beta * v).exp_m1();
    let tunnel = w * p.c_gamma * (p.c_delta * v).sinh();
    let dw_dt = p.c_lambda * ((p.c_eta1 * v).exp() - (-p.c_eta2 * v).exp());
    ChangOutput { current: schottky + tunnel, dw_dt }
}
