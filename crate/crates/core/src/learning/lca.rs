use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sim::{integrate_with, max_abs, IntegratorSpec, Trace};

/// `x` when `x > lambda`, otherwise 0.
pub fn hard_threshold<T: Scalar>(x: T, lambda: T) -> T {
    if x > lambda {
        x
    } else {
        T::zero()
    }
}

/// Sparse-coding problem over the dictionary columns of `phi` (`N x M`).
#[derive(Debug, Clone, PartialEq)]
pub struct LcaProblem<T: Scalar> {
    pub phi: DMatrix<T>,
    pub lambda: T,
    pub tau: T,
}

impl<T: Scalar> LcaProblem<T> {
    pub fn new(phi: DMatrix<T>, lambda: T, tau: T) -> Result<Self> {
        let p = LcaProblem { phi, lambda, tau };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= T::zero()) || !self.lambda.is_finite_val() {
            return Err(Error::invalid("lambda", "must be finite and >= 0"));
        }
        if !(self.tau > T::zero()) || !self.tau.is_finite_val() {
            return Err(Error::invalid("tau", "must be finite and > 0"));
        }
        if self.phi.ncols() == 0 {
            return Err(Error::invalid("phi", "dictionary is empty"));
        }
        if let Some(k) = (0..self.phi.ncols()).find(|&k| self.phi.column(k).norm() == T::zero()) {
            return Err(Error::invalid("phi", format!("column {k} is zero")));
        }
        Ok(())
    }

    /// `1/2 |x - phi a|^2 + (lambda^2 / 2) |a|_0`, the cost implied by the hard threshold.
    pub fn energy(&self, x: &DVector<T>, a: &DVector<T>) -> T {
        let r = x - &self.phi * a;
        let active = a.iter().filter(|&&v| v != T::zero()).count();
        T::lit(0.5) * r.norm_squared() + T::lit(0.5) * self.lambda * self.lambda * T::lit(active as f64)
    }
}

#[derive(Debug, Clone)]
pub struct LcaResult<T: Scalar> {
    pub a: DVector<T>,
    /// Channels `u0 .. u{M-1}` and `energy`.
    pub trace: Trace<T>,
    /// False when `t_end` was reached before `|du/dt|_inf < tol`; `a` is
    /// then the last iterate.
    pub converged: bool,
}

pub const LCA_TOL: f64 = 1e-8;

/// Integrates `tau du/dt = b - u - (G - diag G) a`, `b = phi^T x`,
/// `G = phi^T phi`, `a = T_lambda(u)`, from `u = 0`.
pub fn lca_simulate<T: Scalar>(p: &LcaProblem<T>, x: &DVector<T>, spec: &IntegratorSpec<T>) -> Result<LcaResult<T>> {
    p.validate()?;
    if x.len() != p.phi.nrows() {
        return Err(Error::LengthMismatch { expected: p.phi.nrows(), found: x.len() });
    }
    let m = p.phi.ncols();
    let b = p.phi.transpose() * x;
    let mut g = p.phi.transpose() * &p.phi;
    g.fill_diagonal(T::zero());
    let lambda = p.lambda;
    let act = |u: &[T]| DVector::from_iterator(m, u.iter().map(|&v| hard_threshold(v, lambda)));
    let rhs = |_: T, u: &[T], du: &mut [T]| {
        let inhibition = &g * act(u);
        for k in 0..m {
            du[k] = (b[k] - u[k] - inhibition[k]) / p.tau;
        }
    };
    let mut converged = false;
    let out = integrate_with(rhs, &vec![T::zero(); m], spec, |_, _| {}, |s| {
        converged = max_abs(s.rate) < T::lit(LCA_TOL);
        converged
    })?;
    let names: Vec<String> = (0..m).map(|k| format!("u{k}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut trace = out.trace.rename(&refs)?;
    let energy: Vec<T> = (0..trace.len()).map(|k| p.energy(x, &act(&trace.row(k)))).collect();
    trace.push_channel("energy", energy)?;
    let a = act(&trace.last_row()[..m]);
    Ok(LcaResult { a, trace, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn orthonormal(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = DMatrix::<f64>::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        m.qr().q()
    }

    #[test]
    fn threshold_cases() {
        assert_eq!(hard_threshold(0.5, 1.0), 0.0);
        assert_eq!(hard_threshold(2.0, 1.0), 2.0);
        assert_eq!(hard_threshold(-3.0, 0.0), 0.0);
        assert_eq!(hard_threshold(3.0, 0.0), 3.0);
    }

    #[test]
    fn zero_input_zero_code() {
        let p = LcaProblem::new(orthonormal(4, 1), 0.1, 0.01).unwrap();
        let r = lca_simulate(&p, &DVector::zeros(4), &IntegratorSpec::rk4(1e-4, 0.1)).unwrap();
        assert!(r.a.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn orthonormal_recovers_coefficients() {
        let phi = orthonormal(5, 2);
        let coef = DVector::from_vec(vec![0.5, 1.2, 0.1, 2.0, 0.7]);
        let x = &phi * &coef;
        let p = LcaProblem::new(phi, 0.0, 0.01).unwrap();
        let r = lca_simulate(&p, &x, &IntegratorSpec::rk4(1e-4, 1.0)).unwrap();
        assert!(r.converged);
        assert!((&r.a - &coef).amax() < 1e-6);
        let e = r.trace.require("energy").unwrap();
        assert!(e.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn large_threshold_silences_everything() {
        let phi = orthonormal(4, 3);
        let x = DVector::from_vec(vec![0.3, -0.2, 0.5, 0.1]);
        let top = (phi.transpose() * &x).amax();
        let p = LcaProblem::new(phi, top * 1.01, 0.01).unwrap();
        let r = lca_simulate(&p, &x, &IntegratorSpec::rk4(1e-4, 0.5)).unwrap();
        assert!(r.a.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_bad_problem() {
        assert!(LcaProblem::new(DMatrix::<f64>::zeros(3, 2), 0.1, 0.01).is_err());
        assert!(LcaProblem::new(orthonormal(2, 4), -1.0, 0.01).is_err());
    }
}
