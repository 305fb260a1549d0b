use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::crossbar::storage::PulseSpec;
use crate::devices::HpParams;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Weight-update rules `W <- W + f(W, data)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UpdateRule<T> {
    /// Hebbian outer product `eta x x^T`.
    Adaline { eta: T },
    /// Generalized Hebbian algorithm: `eta (o x^T - LT[o o^T] W)` with `o = W x`.
    Sanger { eta: T },
    /// `2 eta o (x - (2W - I) o)^T` with `o = W x`; square `W` only.
    SangerLiteral { eta: T },
    /// Gradient step on `|t - W v|^2`: `2 eta (t - W v) v^T`.
    Gradient { eta: T },
}

impl<T: Scalar> UpdateRule<T> {
    pub fn eta(&self) -> T {
        match *self {
            UpdateRule::Adaline { eta }
            | UpdateRule::Sanger { eta }
            | UpdateRule::SangerLiteral { eta }
            | UpdateRule::Gradient { eta } => eta,
        }
    }
}

fn shape_err<T: Scalar>(w: &DMatrix<T>, what: &str) -> Error {
    Error::DimensionMismatch(format!("{what} does not fit a {}x{} weight matrix", w.nrows(), w.ncols()))
}

/// One update step. `x` is the input pattern; `target` is needed only by
/// the gradient rule.
pub fn apply_update<T: Scalar>(w: &DMatrix<T>, rule: &UpdateRule<T>, x: &DVector<T>, target: Option<&DVector<T>>) -> Result<DMatrix<T>> {
    let eta = rule.eta();
    if !(eta >= T::zero()) || !eta.is_finite_val() {
        return Err(Error::invalid("eta", "must be finite and >= 0"));
    }
    let delta = match rule {
        UpdateRule::Adaline { .. } => {
            if !w.is_square() || w.nrows() != x.len() {
                return Err(shape_err(w, "pattern outer product"));
            }
            x * x.transpose() * eta
        }
        UpdateRule::Sanger { .. } => {
            if w.ncols() != x.len() {
                return Err(shape_err(w, "input"));
            }
            let o = w * x;
            let lt = (&o * o.transpose()).lower_triangle();
            (&o * x.transpose() - lt * w) * eta
        }
        UpdateRule::SangerLiteral { .. } => {
            if !w.is_square() || w.ncols() != x.len() {
                return Err(shape_err(w, "literal Sanger input (square only)"));
            }
            let n = w.nrows();
            let o = w * x;
            let resid = x - (w * T::lit(2.0) - DMatrix::identity(n, n)) * &o;
            o * resid.transpose() * (T::lit(2.0) * eta)
        }
        UpdateRule::Gradient { .. } => {
            let t = target.ok_or_else(|| Error::invalid("target", "gradient rule needs a target"))?;
            if w.ncols() != x.len() || w.nrows() != t.len() {
                return Err(shape_err(w, "input/target"));
            }
            (t - w * x) * x.transpose() * (T::lit(2.0) * eta)
        }
    };
    Ok(w + delta)
}

/// `W + f(W)` for an arbitrary update function.
pub fn apply_generic<T: Scalar, F>(w: &DMatrix<T>, f: F) -> Result<DMatrix<T>>
where
    F: FnOnce(&DMatrix<T>) -> DMatrix<T>,
{
    let d = f(w);
    if d.shape() != w.shape() {
        return Err(shape_err(w, "update"));
    }
    Ok(w + d)
}

/// Double-exponential spike-timing kernel; `delta_t = t_post - t_pre`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StdpKernel<T> {
    pub a_plus: T,
    pub a_minus: T,
    pub tau_plus: T,
    pub tau_minus: T,
}

impl<T: Scalar> StdpKernel<T> {
    pub fn validate(&self) -> Result<()> {
        for (n, v) in [("a_plus", self.a_plus), ("a_minus", self.a_minus)] {
            if !(v >= T::zero()) || !v.is_finite_val() {
                return Err(Error::invalid(n, "must be finite and >= 0"));
            }
        }
        for (n, v) in [("tau_plus", self.tau_plus), ("tau_minus", self.tau_minus)] {
            if !(v > T::zero()) || !v.is_finite_val() {
                return Err(Error::invalid(n, "must be finite and > 0"));
            }
        }
        Ok(())
    }

    /// Weight change: `a_plus exp(-dt/tau_plus)` for `dt >= 0` (pre before
    /// post, potentiation), `-a_minus exp(dt/tau_minus)` otherwise.
    pub fn eval(&self, delta_t: T) -> T {
        if delta_t >= T::zero() {
            self.a_plus * (-delta_t / self.tau_plus).exp()
        } else {
            -self.a_minus * (delta_t / self.tau_minus).exp()
        }
    }
}

/// `integral of R(w) dw` from 0, `r_on w + (r_off - r_on) w^2 / 2`.
fn charge_potential<T: Scalar>(w: T, hp: &HpParams<T>) -> T {
    hp.r_on * w + (hp.r_off - hp.r_on) * w * w / T::lit(2.0)
}

/// Memory value of a freshly programmed synapse.
pub const STDP_REST: f64 = 0.5;

/// Write pulse that changes the weight of a cell resting at `w = 0.5` by
/// `kernel(delta_t)`, at write amplitude `|v_write|`.
///
/// Potentiation lowers the resistance (`w` falls by the weight change) and
/// uses the SET polarity. The duration inverts the exact non-volatile write:
/// `beta (F(w0) - F(w1)) = sign V t` with `F(w) = r_on w + (r_off - r_on) w^2 / 2`.
pub fn stdp_program<T: Scalar>(delta_t: T, kernel: &StdpKernel<T>, hp: &HpParams<T>, v_write: T, v_read: T) -> Result<PulseSpec<T>> {
    kernel.validate()?;
    hp.validate()?;
    if !(v_write.abs() > T::zero()) || !v_write.is_finite_val() {
        return Err(Error::invalid("v_write", "must be finite and non-zero"));
    }
    if hp.alpha != T::zero() {
        return Err(Error::invalid("alpha", "pulse inversion needs a non-volatile device (alpha = 0)"));
    }
    let dw = kernel.eval(delta_t);
    let w0 = T::lit(STDP_REST);
    let w1 = w0 - dw;
    if !(w1 >= T::zero() && w1 <= T::one()) {
        return Err(Error::Unreachable { delta: dw.to_f64_lossy() });
    }
    let sign = hp.polarity.sign::<T>();
    // SET polarity lowers w
    let set_v = sign * v_write.abs();
    let v = if dw >= T::zero() { set_v } else { -set_v };
    let duration = hp.beta * (charge_potential(w0, hp) - charge_potential(w1, hp)).abs() / v_write.abs();
    Ok(PulseSpec { v_write: v, duration, v_read, read_duration: T::zero() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crossbar::storage::{pulse_memory, storage_device};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn zero_rate_is_identity() {
        let w = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let x = DVector::from_vec(vec![0.5, -1.0]);
        for rule in [UpdateRule::Adaline { eta: 0.0 }, UpdateRule::Sanger { eta: 0.0 }, UpdateRule::SangerLiteral { eta: 0.0 }] {
            assert_eq!(apply_update(&w, &rule, &x, None).unwrap(), w);
        }
        assert_eq!(apply_update(&w, &UpdateRule::Gradient { eta: 0.0 }, &x, Some(&x)).unwrap(), w);
        assert_eq!(apply_generic(&w, |m| DMatrix::zeros(m.nrows(), m.ncols())).unwrap(), w);
    }

    #[test]
    fn adaline_rank_one() {
        let w = DMatrix::<f64>::zeros(3, 3);
        let x = DVector::from_vec(vec![1.0, 2.0, -1.0]);
        let out = apply_update(&w, &UpdateRule::Adaline { eta: 0.5 }, &x, None).unwrap();
        assert_eq!(out[(1, 2)], -1.0);
        assert_eq!(out.rank(1e-12), 1);
    }

    #[test]
    fn gradient_step_descends() {
        let w = DMatrix::from_row_slice(1, 2, &[0.0, 0.0]);
        let v = DVector::from_vec(vec![1.0, 1.0]);
        let t = DVector::from_vec(vec![2.0]);
        let mut cur = w;
        for _ in 0..200 {
            cur = apply_update(&cur, &UpdateRule::Gradient { eta: 0.05 }, &v, Some(&t)).unwrap();
        }
        assert!(((&cur * &v)[0] - 2.0f64).abs() < 1e-9);
    }

    #[test]
    fn shape_errors() {
        let w = DMatrix::<f64>::zeros(2, 3);
        let x = DVector::from_vec(vec![1.0, 2.0]);
        assert!(apply_update(&w, &UpdateRule::Sanger { eta: 0.1 }, &x, None).is_err());
        assert!(apply_update(&w, &UpdateRule::SangerLiteral { eta: 0.1 }, &DVector::zeros(3), None).is_err());
        assert!(apply_update(&w, &UpdateRule::Gradient { eta: 0.1 }, &DVector::zeros(3), None).is_err());
    }

    #[test]
    fn sanger_finds_leading_axis() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let nx = Normal::new(0.0, 2.0).unwrap();
        let ny = Normal::new(0.0, 1.0).unwrap();
        let mut w = DMatrix::from_row_slice(1, 2, &[0.3f64, 0.8]);
        for _ in 0..500 {
            let x = DVector::from_vec(vec![nx.sample(&mut rng), ny.sample(&mut rng)]);
            w = apply_update(&w, &UpdateRule::Sanger { eta: 0.005 }, &x, None).unwrap();
        }
        let row = w.row(0);
        let angle = (row[0].abs() / row.norm()).acos().to_degrees();
        assert!(angle < 5.0, "{angle}");
    }

    #[test]
    fn kernel_shape() {
        let k = StdpKernel { a_plus: 0.1f64, a_minus: 0.12, tau_plus: 0.02, tau_minus: 0.02 };
        assert_eq!(k.eval(0.0), 0.1);
        assert!(k.eval(-1e-9) < 0.0);
        assert!(k.eval(10.0).abs() < 1e-100 && k.eval(-10.0).abs() < 1e-100);
    }

    #[test]
    fn stdp_round_trip() {
        let hp = storage_device();
        let k = StdpKernel { a_plus: 0.2, a_minus: 0.25, tau_plus: 0.02, tau_minus: 0.03 };
        for dt in [1e-4, 0.01, 0.05, -1e-4, -0.02, -0.1] {
            let p = stdp_program(dt, &k, &hp, 1.0, 0.05).unwrap();
            let w = pulse_memory(&hp, STDP_REST, p.v_write, p.duration).unwrap();
            let want = k.eval(dt);
            let got = STDP_REST - w;
            assert!((got - want).abs() <= 0.02 * want.abs(), "dt={dt} {got} vs {want}");
        }
        let p = stdp_program(1e-6, &k, &hp, 1.0, 0.05).unwrap();
        assert!(p.v_write > 0.0);
        let far = stdp_program(50.0, &k, &hp, 1.0, 0.05).unwrap();
        assert!(far.duration < 1e-30);
    }

    #[test]
    fn stdp_unreachable() {
        let hp = storage_device();
        let k = StdpKernel { a_plus: 0.8, a_minus: 0.1, tau_plus: 0.02, tau_minus: 0.02 };
        assert!(matches!(stdp_program(0.0, &k, &hp, 1.0, 0.05), Err(Error::Unreachable { .. })));
    }
}
