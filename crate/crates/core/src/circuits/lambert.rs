use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Principal branch `W0(x)` of the Lambert function, `W e^W = x`, for `x >= -1/e`.
///
/// Halley iteration from a branch-point series (near `-1/e`), `ln(1 + x)`
/// (moderate `x`) or the asymptotic `L1 - L2 + L2/L1` (large `x`).
pub fn lambert_w<T: Scalar>(x: T) -> Result<T> {
    let e = T::e();
    let branch = -T::one() / e;
    if !x.is_finite_val() {
        return Err(Error::LambertDomain { x: x.to_f64_lossy() });
    }
    let eps = T::default_epsilon();
    if x < branch {
        // allow a few ulps of rounding in arguments computed as -1/e
        if branch - x > T::lit(4.0) * eps {
            return Err(Error::LambertDomain { x: x.to_f64_lossy() });
        }
        return Ok(-T::one());
    }
    if x == T::zero() {
        return Ok(T::zero());
    }
    let mut w = if x < T::lit(-0.25) {
        let p = (T::lit(2.0) * (e * x + T::one())).max(T::zero()).sqrt();
        -T::one() + p - p * p / T::lit(3.0) + T::lit(11.0 / 72.0) * p * p * p
    } else if x < T::lit(3.0) {
        (T::one() + x).ln()
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };
    let two = T::lit(2.0);
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + T::one();
        if wp1 == T::zero() {
            break;
        }
        let denom = ew * wp1 - (w + two) * f / (two * wp1);
        if denom == T::zero() {
            break;
        }
        let step = f / denom;
        w -= step;
        if step.abs() <= T::lit(2.0) * eps * (T::one() + w.abs()) {
            break;
        }
    }
    Ok(w)
}
