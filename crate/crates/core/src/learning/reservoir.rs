use nalgebra::{DMatrix, DVector};

use crate::devices::HpParams;
use crate::error::{Error, Result};
use crate::linalg::expm;
use crate::network::{CircuitGraph, MeshSolver};
use crate::scalar::Scalar;
use crate::sim::{integrate_with, IntegratorSpec, Trace};

/// Affine input encoder `v = gain * u + offset`, applied per component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Encoder<T> {
    pub gain: T,
    pub offset: T,
}

impl<T: Scalar> Encoder<T> {
    pub fn identity() -> Self {
        Encoder { gain: T::one(), offset: T::zero() }
    }

    /// Maps `input` onto `output` end to end.
    pub fn affine(input: (T, T), output: (T, T)) -> Result<Self> {
        if !(input.1 > input.0) {
            return Err(Error::invalid("encoder", "input range must be increasing"));
        }
        let gain = (output.1 - output.0) / (input.1 - input.0);
        Ok(Encoder { gain, offset: output.0 - gain * input.0 })
    }

    pub fn apply(&self, u: T) -> T {
        self.gain * u + self.offset
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReservoirDynamics<T: Scalar> {
    /// `dq/dt = A q + B E(u)`.
    Linear { a: DMatrix<T> },
    /// Memristive network driven by series sources `B E(u)` on its
    /// memristive edges; `q` is the vector of memristor currents.
    Memristive { graph: CircuitGraph<T>, hp: HpParams<T> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reservoir<T: Scalar> {
    pub encoder: Encoder<T>,
    /// `dim q x dim u`.
    pub b: DMatrix<T>,
    pub dynamics: ReservoirDynamics<T>,
    /// `N_g x dim q`.
    pub h: DMatrix<T>,
}

impl<T: Scalar> Reservoir<T> {
    pub fn new(encoder: Encoder<T>, b: DMatrix<T>, dynamics: ReservoirDynamics<T>, h: DMatrix<T>) -> Result<Self> {
        let r = Reservoir { encoder, b, dynamics, h };
        r.validate()?;
        Ok(r)
    }

    pub fn state_dim(&self) -> usize {
        match &self.dynamics {
            ReservoirDynamics::Linear { a } => a.nrows(),
            ReservoirDynamics::Memristive { graph, .. } => graph.memristor_edges().len(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn validate(&self) -> Result<()> {
        if let ReservoirDynamics::Linear { a } = &self.dynamics {
            if !a.is_square() {
                return Err(Error::DimensionMismatch("linear dynamics matrix is not square".into()));
            }
        }
        if let ReservoirDynamics::Memristive { hp, .. } = &self.dynamics {
            hp.validate()?;
        }
        let q = self.state_dim();
        if q == 0 || self.b.nrows() != q || self.h.ncols() != q {
            return Err(Error::DimensionMismatch(format!(
                "state has {q} components, B is {}x{}, H is {}x{}",
                self.b.nrows(),
                self.b.ncols(),
                self.h.nrows(),
                self.h.ncols()
            )));
        }
        if self.h.nrows() == 0 || self.h.nrows() > q {
            return Err(Error::DimensionMismatch(format!("need 1 <= N_g <= dim q, got N_g = {}", self.h.nrows())));
        }
        if self.b.ncols() == 0 {
            return Err(Error::DimensionMismatch("no inputs".into()));
        }
        Ok(())
    }

    fn drive<U: Fn(T) -> Vec<T>>(&self, u: &U, t: T) -> Result<DVector<T>> {
        let v = u(t);
        if v.len() != self.input_dim() {
            return Err(Error::LengthMismatch { expected: self.input_dim(), found: v.len() });
        }
        Ok(&self.b * DVector::from_iterator(v.len(), v.iter().map(|&x| self.encoder.apply(x))))
    }
}

/// Runs the reservoir from rest (`q = 0`, or the graph's initial memory)
/// and returns the mixed features `g = H q` as channels `g0 .. g{N_g-1}`.
pub fn rc_run<T: Scalar, U: Fn(T) -> Vec<T>>(r: &Reservoir<T>, u: U, spec: &IntegratorSpec<T>) -> Result<Trace<T>> {
    r.validate()?;
    r.drive(&u, T::zero())?;
    let q_trace: Vec<DVector<T>> = match &r.dynamics {
        ReservoirDynamics::Linear { a } => {
            let n = a.nrows();
            let rhs = |t: T, q: &[T], dq: &mut [T]| {
                let d = a * DVector::from_column_slice(q) + r.drive(&u, t).expect("checked length");
                dq.copy_from_slice(d.as_slice());
            };
            let out = integrate_with(rhs, &vec![T::zero(); n], spec, |_, _| {}, |_| false)?;
            (0..out.trace.len()).map(|k| DVector::from_vec(out.trace.row(k))).collect()
        }
        ReservoirDynamics::Memristive { graph, hp } => {
            let mesh = MeshSolver::new(graph);
            let sign = hp.polarity.sign::<T>();
            let mut failure = None;
            let rhs = |t: T, w: &[T], dw: &mut [T]| {
                let series = r.drive(&u, t).expect("checked length");
                match mesh.currents(w, series.as_slice(), hp) {
                    Ok(i) => {
                        for (k, (&wk, &e)) in w.iter().zip(mesh.memristors()).enumerate() {
                            dw[k] = hp.alpha * wk - sign * i[e] / hp.beta;
                        }
                    }
                    Err(e) => {
                        failure.get_or_insert(e);
                        dw.iter_mut().for_each(|d| *d = T::zero());
                    }
                }
            };
            let out = integrate_with(
                rhs,
                &graph.initial_memory(),
                spec,
                |_, w| w.iter_mut().for_each(|x| *x = x.clamp(T::zero(), T::one())),
                |_| false,
            )?;
            if let Some(e) = failure {
                return Err(e);
            }
            (0..out.trace.len())
                .map(|k| {
                    let series = r.drive(&u, out.trace.time(k))?;
                    let i = mesh.currents(&out.trace.row(k), series.as_slice(), hp)?;
                    Ok(DVector::from_iterator(mesh.memristors().len(), mesh.memristors().iter().map(|&e| i[e])))
                })
                .collect::<Result<_>>()?
        }
    };
    features_trace(&r.h, &q_trace, spec.dt)
}

fn features_trace<T: Scalar>(h: &DMatrix<T>, qs: &[DVector<T>], dt: T) -> Result<Trace<T>> {
    let mut data = vec![Vec::with_capacity(qs.len()); h.nrows()];
    for q in qs {
        for (c, v) in data.iter_mut().zip((h * q).iter()) {
            c.push(*v);
        }
    }
    let names = (0..h.nrows()).map(|k| format!("g{k}")).collect();
    Trace::new(T::zero(), dt, names, data)
}

/// Features of a linear reservoir by direct convolution with its impulse
/// response `K(s) = H exp(A s) B`, trapezoid rule on the sample grid
/// `k * dt`, `k = 0 ..= steps`.
pub fn linear_convolution_oracle<T: Scalar, U: Fn(T) -> Vec<T>>(r: &Reservoir<T>, u: U, dt: T, steps: usize) -> Result<Vec<DVector<T>>> {
    r.validate()?;
    let ReservoirDynamics::Linear { a } = &r.dynamics else {
        return Err(Error::invalid("dynamics", "convolution needs linear dynamics"));
    };
    let step = expm(&(a * dt));
    let mut kernel = Vec::with_capacity(steps + 1);
    let mut prop = DMatrix::<T>::identity(a.nrows(), a.nrows());
    for _ in 0..=steps {
        kernel.push(&r.h * &prop * &r.b);
        prop = &step * prop;
    }
    let inputs: Vec<DVector<T>> = (0..=steps)
        .map(|j| {
            let v = u(T::lit(j as f64) * dt);
            DVector::from_iterator(v.len(), v.iter().map(|&x| r.encoder.apply(x)))
        })
        .collect();
    let half = T::lit(0.5);
    Ok((0..=steps)
        .map(|k| {
            let mut g = DVector::zeros(r.h.nrows());
            for j in 0..=k {
                let w = if j == 0 || j == k { half } else { T::one() };
                g += &kernel[k - j] * &inputs[j] * (w * dt);
            }
            if k == 0 {
                g.fill(T::zero());
            }
            g
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::fit_readout;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn linear(seed: u64) -> Reservoir<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = 5;
        let mut a = DMatrix::<f64>::from_fn(q, q, |_, _| rng.random_range(-0.4..0.4));
        for i in 0..q {
            a[(i, i)] -= 1.5;
        }
        let b = DMatrix::from_fn(q, 2, |_, _| rng.random_range(-1.0..1.0));
        let h = DMatrix::from_fn(3, q, |_, _| rng.random_range(-1.0..1.0));
        Reservoir::new(Encoder::identity(), b, ReservoirDynamics::Linear { a }, h).unwrap()
    }

    fn u1(t: f64) -> Vec<f64> {
        vec![(3.0 * t).sin(), 0.5 * (1.3 * t).cos() + 0.2]
    }

    fn u2(t: f64) -> Vec<f64> {
        vec![(t * t).cos(), (7.0 * t).sin()]
    }

    #[test]
    fn zero_input_stays_at_rest() {
        let r = linear(1);
        let g = rc_run(&r, |_| vec![0.0, 0.0], &IntegratorSpec::rk4(1e-2, 1.0)).unwrap();
        assert!(g.channels().iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn matches_convolution() {
        let r = linear(2);
        let (dt, steps) = (1e-3, 3000);
        let g = rc_run(&r, u1, &IntegratorSpec::rk4(dt, dt * steps as f64)).unwrap();
        let oracle = linear_convolution_oracle(&r, u1, dt, steps).unwrap();
        for (k, o) in oracle.iter().enumerate() {
            for c in 0..3 {
                assert!((g.channels()[c][k] - o[c]).abs() < 1e-4, "k={k} c={c}");
            }
        }
    }

    #[test]
    fn linear_in_input() {
        let r = linear(3);
        let spec = IntegratorSpec::rk4(1e-3, 2.0);
        let (p, q) = (0.7, -1.9);
        let g1 = rc_run(&r, u1, &spec).unwrap();
        let g2 = rc_run(&r, u2, &spec).unwrap();
        let mix = rc_run(&r, |t| u1(t).iter().zip(u2(t)).map(|(a, b)| p * a + q * b).collect(), &spec).unwrap();
        for c in 0..3 {
            for k in 0..mix.len() {
                let want = p * g1.channels()[c][k] + q * g2.channels()[c][k];
                assert!((mix.channels()[c][k] - want).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn dimension_checks() {
        let r = linear(4);
        let bad = Reservoir::new(Encoder::identity(), r.b.clone(), r.dynamics.clone(), DMatrix::zeros(6, 5));
        assert!(bad.is_err());
        assert!(rc_run(&r, |_| vec![0.0], &IntegratorSpec::rk4(1e-2, 1.0)).is_err());
        let e = Encoder::affine((-1.0, 1.0), (0.0, 2.0)).unwrap();
        assert_eq!((e.apply(-1.0), e.apply(1.0)), (0.0, 2.0));
    }

    #[test]
    fn saturated_network_is_a_static_map() {
        // strong volatility holds every device at w = 1 (clamped)
        let pairs = [(0, 1), (1, 2), (2, 0), (2, 3), (3, 0), (1, 3)];
        let graph = CircuitGraph::memristive(4, &pairs, 1.0).unwrap();
        let hp = HpParams::new(1e3, 1.0, 1.0, 10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = DMatrix::from_fn(6, 1, |_, _| rng.random_range(-1.0..1.0));
        let h = DMatrix::from_fn(4, 6, |_, _| rng.random_range(-1.0..1.0));
        let r = Reservoir::new(Encoder::identity(), b, ReservoirDynamics::Memristive { graph, hp }, h).unwrap();
        let input = |t: f64| vec![(2.0 * t).sin() + 0.3 * (5.1 * t).cos()];
        let g = rc_run(&r, input, &IntegratorSpec::rk4(1e-2, 10.0)).unwrap();
        let n = g.len();
        let design = DMatrix::from_fn(n, 4, |k, c| g.channels()[c][k]);
        let target = |f: &dyn Fn(f64) -> f64| DVector::from_fn(n, |k, _| f(input(g.time(k))[0]));
        let lin = target(&|x| 2.0 * x);
        let fit = fit_readout(&design, &lin, 0.0).unwrap();
        assert!((fit.predict(&design).unwrap() - &lin).norm() / lin.norm() < 1e-8);
        let sq = target(&|x| x * x);
        let fit = fit_readout(&design, &sq, 0.0).unwrap();
        let centered = sq.add_scalar(-sq.mean());
        assert!((fit.predict(&design).unwrap() - &sq).norm() > 0.5 * centered.norm());
    }
}
