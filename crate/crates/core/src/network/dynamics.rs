use nalgebra::{DMatrix, DVector};

use crate::devices::{hp_resistance, HpParams};
use crate::error::{Error, Result};
use crate::network::graph::{CircuitGraph, EdgeRole};
use crate::network::projector::{cycle_matrix_dense, cycle_projector, Projector};
use crate::scalar::Scalar;
use crate::sim::{integrate_with, max_abs, DriveSignal, IntegratorSpec, Trace};

/// Memory values, one per memristive edge.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState<T>(pub Vec<T>);

impl<T: Scalar> NetworkState<T> {
    pub fn mean(&self) -> T {
        self.0.iter().fold(T::zero(), |a, &x| a + x) / T::lit(self.0.len().max(1) as f64)
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::LengthMismatch { expected, found });
    }
    Ok(())
}

/// `(I + chi Omega W)^-1 Omega S` for memory `w` and normalized sources `s`.
fn loop_response<T: Scalar>(w: &[T], s: &[T], omega: &Projector<T>, chi: T) -> Result<(DMatrix<T>, DVector<T>)> {
    let n = omega.dim();
    check_len(n, w.len())?;
    check_len(n, s.len())?;
    let om = omega.matrix();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let d = if i == j { T::one() } else { T::zero() };
        d + chi * om[(i, j)] * w[j]
    });
    let lu = m.clone().lu();
    let x = lu
        .solve(&(om * DVector::from_column_slice(s)))
        .ok_or_else(|| Error::Singular("I + chi Omega W".into()))?;
    Ok((m, x))
}

/// Network equation `dw/dt = alpha w - sign (1/beta) (I + chi Omega W)^-1 Omega S`,
/// `chi = (r_off - r_on) / r_on`.
///
/// `s` holds the series source voltages divided by `r_on` (amperes), so a
/// single memristor in a loop with source `V` obeys `dw/dt = alpha w - i / beta`
/// with `i = V / R(w)`.
pub fn memnet_rhs<T: Scalar>(w: &[T], s: &[T], omega: &Projector<T>, hp: &HpParams<T>) -> Result<Vec<T>> {
    let (_, x) = loop_response(w, s, omega, hp.xi())?;
    let sign = hp.polarity.sign::<T>();
    let out: Vec<T> = w.iter().zip(x.iter()).map(|(&wi, &xi)| hp.alpha * wi - sign * xi / hp.beta).collect();
    if out.iter().any(|v| !v.is_finite_val()) {
        return Err(Error::Singular("non-finite network derivative".into()));
    }
    Ok(out)
}

/// Loop (mesh) analysis of a whole graph, sources included.
#[derive(Debug, Clone)]
pub struct MeshSolver<T: Scalar> {
    cycles: DMatrix<T>,
    memristors: Vec<usize>,
    source_emf: Vec<T>,
}

impl<T: Scalar> MeshSolver<T> {
    pub fn new(g: &CircuitGraph<T>) -> Self {
        let source_emf = g
            .edges()
            .iter()
            .map(|e| match e.role {
                EdgeRole::Source { volts } => volts,
                EdgeRole::Memristor { .. } => T::zero(),
            })
            .collect();
        MeshSolver { cycles: cycle_matrix_dense(g), memristors: g.memristor_edges(), source_emf }
    }

    /// Graph-edge indices of the memristive edges, in state order.
    pub fn memristors(&self) -> &[usize] {
        &self.memristors
    }

    /// Edge currents (tail to head) indexed like the graph's edges. `w` and
    /// `series` cover the memristive edges; `series` is the voltage of a
    /// source in series with each of them.
    pub fn currents(&self, w: &[T], series: &[T], hp: &HpParams<T>) -> Result<Vec<T>> {
        check_len(self.memristors.len(), w.len())?;
        check_len(self.memristors.len(), series.len())?;
        let e = self.source_emf.len();
        let c = &self.cycles;
        if c.nrows() == 0 {
            return Ok(vec![T::zero(); e]);
        }
        let mut r = vec![T::zero(); e];
        let mut emf = self.source_emf.clone();
        for (slot, &k) in self.memristors.iter().enumerate() {
            r[k] = hp_resistance(w[slot], hp);
            emf[k] = series[slot];
        }
        let cr = DMatrix::from_fn(c.nrows(), e, |i, j| c[(i, j)] * r[j]);
        let z = &cr * c.transpose();
        let rhs = c * DVector::from_vec(emf);
        let singular = || Error::Singular("loop impedance matrix (source-only loop?)".into());
        let j = z.lu().solve(&rhs).ok_or_else(singular)?;
        let i = c.transpose() * j;
        if i.iter().any(|v| !v.is_finite_val()) {
            return Err(singular());
        }
        Ok(i.iter().copied().collect())
    }
}

/// One-off [`MeshSolver::currents`].
pub fn mesh_currents<T: Scalar>(g: &CircuitGraph<T>, w: &[T], series: &[T], hp: &HpParams<T>) -> Result<Vec<T>> {
    MeshSolver::new(g).currents(w, series, hp)
}

/// Series sources on the memristive edges: `series[k] * signal(t)` volts.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkDrive<T> {
    pub series: Vec<T>,
    pub signal: DriveSignal<T>,
}

impl<T: Scalar> NetworkDrive<T> {
    pub fn dc(series: Vec<T>) -> Self {
        NetworkDrive { series, signal: DriveSignal::dc(T::one()) }
    }

    pub fn none(edges: usize) -> Self {
        NetworkDrive { series: vec![T::zero(); edges], signal: DriveSignal::zero() }
    }
}

#[derive(Debug, Clone)]
pub struct NetworkRun<T> {
    /// Channels `w0 .. w{E-1}` then `mean`.
    pub trace: Trace<T>,
    /// Time at which `|dw/dt|_inf` fell below the steady tolerance, or `None`
    /// when the run reached `t_end` first.
    pub steady_at: Option<T>,
    pub final_rate: T,
}

impl<T: Scalar> NetworkRun<T> {
    pub fn final_state(&self) -> NetworkState<T> {
        let e = self.trace.channels().len() - 1;
        NetworkState(self.trace.last_row()[..e].to_vec())
    }
}

/// Integrates the network from the graph's initial memory, clamping every
/// `w` to `[0, 1]`.
///
/// Graphs without source edges use the projector form; graphs with source
/// edges use a loop analysis per evaluation. A `steady_tol` ends the run once
/// the step-to-step rate drops below it.
pub fn simulate_network<T: Scalar>(
    g: &CircuitGraph<T>,
    drive: &NetworkDrive<T>,
    hp: &HpParams<T>,
    spec: &IntegratorSpec<T>,
    steady_tol: Option<T>,
) -> Result<NetworkRun<T>> {
    hp.validate()?;
    drive.signal.validate()?;
    let w0 = g.initial_memory();
    check_len(w0.len(), drive.series.len())?;
    if w0.is_empty() {
        return Err(Error::invalid("graph", "no memristive edges"));
    }
    let has_sources = !g.source_edges().is_empty();
    let omega = if has_sources { None } else { Some(cycle_projector(g)?) };
    let mesh = MeshSolver::new(g);
    let sign = hp.polarity.sign::<T>();
    let mut failure: Option<Error> = None;
    let mut series = vec![T::zero(); w0.len()];
    let rhs = |t: T, w: &[T], dw: &mut [T]| {
        if failure.is_some() {
            dw.iter_mut().for_each(|d| *d = T::zero());
            return;
        }
        let amp = drive.signal.eval(t);
        for (s, &v) in series.iter_mut().zip(&drive.series) {
            *s = v * amp;
        }
        let result = match &omega {
            Some(om) => {
                let s: Vec<T> = series.iter().map(|&v| v / hp.r_on).collect();
                memnet_rhs(w, &s, om, hp)
            }
            None => mesh
                .currents(w, &series, hp)
                .map(|i| w.iter().zip(mesh.memristors()).map(|(&wi, &k)| hp.alpha * wi - sign * i[k] / hp.beta).collect()),
        };
        match result {
            Ok(v) => dw.copy_from_slice(&v),
            Err(e) => {
                failure = Some(e);
                dw.iter_mut().for_each(|d| *d = T::zero());
            }
        }
    };
    let mut final_rate = T::zero();
    let out = integrate_with(
        rhs,
        &w0,
        spec,
        |_, w| w.iter_mut().for_each(|x| *x = x.clamp(T::zero(), T::one())),
        |step| {
            final_rate = max_abs(step.rate);
            steady_tol.is_some_and(|tol| final_rate < tol)
        },
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let names: Vec<String> = (0..w0.len()).map(|k| format!("w{k}")).collect();
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut trace = out.trace.rename(&name_refs)?;
    let n = T::lit(w0.len() as f64);
    let mean: Vec<T> = (0..trace.len())
        .map(|k| trace.channels().iter().fold(T::zero(), |a, c| a + c[k]) / n)
        .collect();
    trace.push_channel("mean", mean)?;
    Ok(NetworkRun { trace, steady_at: out.stopped_at, final_rate })
}

/// Default finite-difference step of [`linearize`].
pub const JACOBIAN_STEP: f64 = 1e-6;

/// Central-difference Jacobian of [`memnet_rhs`] at `w`.
pub fn linearize<T: Scalar>(omega: &Projector<T>, hp: &HpParams<T>, w: &NetworkState<T>, s: &[T], step: T) -> Result<DMatrix<T>> {
    let n = w.0.len();
    check_len(omega.dim(), n)?;
    let mut a = DMatrix::zeros(n, n);
    let mut probe = w.0.clone();
    let two_h = step + step;
    for j in 0..n {
        probe[j] = w.0[j] + step;
        let up = memnet_rhs(&probe, s, omega, hp)?;
        probe[j] = w.0[j] - step;
        let down = memnet_rhs(&probe, s, omega, hp)?;
        probe[j] = w.0[j];
        for i in 0..n {
            a[(i, j)] = (up[i] - down[i]) / two_h;
        }
    }
    if a.iter().any(|x| !x.is_finite_val()) {
        return Err(Error::Singular("non-finite Jacobian entry".into()));
    }
    Ok(a)
}

/// Closed-form Jacobian `alpha I + sign (chi/beta) M^-1 Omega diag(x)` with
/// `M = I + chi Omega W` and `x = M^-1 Omega S`.
pub fn analytic_jacobian<T: Scalar>(omega: &Projector<T>, hp: &HpParams<T>, w: &NetworkState<T>, s: &[T]) -> Result<DMatrix<T>> {
    let chi = hp.xi();
    let (m, x) = loop_response(&w.0, s, omega, chi)?;
    let n = w.0.len();
    let mo = m.lu().solve(omega.matrix()).ok_or_else(|| Error::Singular("I + chi Omega W".into()))?;
    let k = hp.polarity.sign::<T>() * chi / hp.beta;
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let d = if i == j { hp.alpha } else { T::zero() };
        d + k * mo[(i, j)] * x[j]
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devices::{hp_rhs, WindowSpec};
    use crate::network::graph::{random_graph, Edge};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hp(alpha: f64, chi: f64) -> HpParams<f64> {
        HpParams::new(alpha, 1.0, 1.0, 1.0 + chi).unwrap()
    }

    #[test]
    fn no_drive_no_motion() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g: CircuitGraph<f64> = random_graph(8, 14, &mut rng).unwrap();
        let om = cycle_projector(&g).unwrap();
        let w = g.initial_memory();
        let d = memnet_rhs(&w, &[0.0; 14], &om, &hp(0.0, 10.0)).unwrap();
        assert!(d.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn single_edge_reduces_to_device() {
        let g = CircuitGraph::<f64>::memristive(1, &[(0, 0)], 0.3).unwrap();
        let om = cycle_projector(&g).unwrap();
        for (alpha, chi, w, v) in [(0.0, 10.0, 0.3, 1.0), (0.2, 99.0, 0.9, -0.4), (1.5, 0.0, 0.0, 2.0)] {
            let p = HpParams::new(alpha, 0.7, 2.0, 2.0 * (1.0 + chi)).unwrap();
            let d = memnet_rhs(&[w], &[v / p.r_on], &om, &p).unwrap()[0];
            let i = v / hp_resistance(w, &p);
            let want = hp_rhs(w, i, &p, &WindowSpec::default());
            assert!((d - want).abs() < 1e-12, "{d} vs {want}");
        }
    }

    #[test]
    fn zero_contrast_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g: CircuitGraph<f64> = random_graph(6, 10, &mut rng).unwrap();
        let om = cycle_projector(&g).unwrap();
        let s: Vec<f64> = (0..10).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w: Vec<f64> = (0..10).map(|_| rng.random::<f64>()).collect();
        let d = memnet_rhs(&w, &s, &om, &hp(0.3, 0.0)).unwrap();
        let os = om.matrix() * DVector::from_vec(s);
        for k in 0..10 {
            assert!((d[k] - (0.3 * w[k] - os[k])).abs() < 1e-13);
        }
    }

    #[test]
    fn projector_form_matches_mesh_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let g: CircuitGraph<f64> = random_graph(10, 20, &mut rng).unwrap();
            let om = cycle_projector(&g).unwrap();
            let p = HpParams::new(0.0, 1.0, 3.0, 30.0).unwrap();
            let w: Vec<f64> = (0..20).map(|_| rng.random::<f64>()).collect();
            let v: Vec<f64> = (0..20).map(|_| rng.random_range(-1.0..1.0)).collect();
            let s: Vec<f64> = v.iter().map(|x| x / p.r_on).collect();
            let d = memnet_rhs(&w, &s, &om, &p).unwrap();
            let i = mesh_currents(&g, &w, &v, &p).unwrap();
            for k in 0..20 {
                assert!((d[k] + i[k]).abs() < 1e-10, "{} vs {}", d[k], -i[k]);
            }
        }
    }

    #[test]
    fn mesh_series_chain() {
        // source 1 V across two 1-ohm memristors in series
        let g = CircuitGraph::new(
            3,
            vec![
                Edge { tail: 0, head: 1, role: EdgeRole::Memristor { w0: 0.0 } },
                Edge { tail: 1, head: 2, role: EdgeRole::Memristor { w0: 0.0 } },
                Edge { tail: 2, head: 0, role: EdgeRole::Source { volts: 1.0 } },
            ],
        )
        .unwrap();
        let i = mesh_currents(&g, &[0.0, 0.0], &[0.0, 0.0], &hp(0.0, 5.0)).unwrap();
        for x in i {
            assert!((x - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn dc_drive_saturates_and_stays_clamped() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let g: CircuitGraph<f64> = random_graph(10, 18, &mut rng).unwrap();
        let s: Vec<f64> = (0..18).map(|_| rng.random_range(-1.0..1.0)).collect();
        let run = simulate_network(&g, &NetworkDrive::dc(s), &hp(0.0, 10.0), &IntegratorSpec::euler(0.02, 400.0), Some(1e-6))
            .unwrap();
        assert!(run.steady_at.is_some());
        assert!(run.final_rate < 1e-6);
        for ch in run.trace.channels() {
            assert!(ch.iter().all(|&x| (0.0..=1.0).contains(&x)));
        }
    }

    #[test]
    fn volatile_growth_without_drive() {
        let g = CircuitGraph::<f64>::memristive(3, &[(0, 1), (1, 2), (2, 0)], 0.1).unwrap();
        let run = simulate_network(&g, &NetworkDrive::none(3), &hp(0.5, 10.0), &IntegratorSpec::rk4(0.01, 8.0), None).unwrap();
        let w = run.trace.channel("w0").unwrap();
        let t = 2.0;
        let k = (t / 0.01) as usize;
        assert!((w[k] - 0.1 * (0.5f64 * t).exp()).abs() < 1e-8);
        assert_eq!(*w.last().unwrap(), 1.0);
    }

    #[test]
    fn symmetric_drive_symmetric_orbits() {
        let g = CircuitGraph::<f64>::memristive(4, &[(0, 1), (1, 2), (2, 3), (3, 0)], 0.4).unwrap();
        let run = simulate_network(&g, &NetworkDrive::dc(vec![0.3; 4]), &hp(0.1, 5.0), &IntegratorSpec::rk4(0.01, 5.0), None).unwrap();
        let c = run.trace.channels();
        for k in 1..4 {
            for (a, b) in c[0].iter().zip(&c[k]) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn jacobian_single_edge_matches_hand_derivative() {
        let g = CircuitGraph::<f64>::memristive(1, &[(0, 0)], 0.3).unwrap();
        let om = cycle_projector(&g).unwrap();
        let (alpha, chi, s, w) = (0.2, 9.0, 0.8, 0.35);
        let p = hp(alpha, chi);
        let a = linearize(&om, &p, &NetworkState(vec![w]), &[s], 1e-6).unwrap();
        let want = alpha + s * chi / (1.0 + chi * w).powi(2);
        assert!((a[(0, 0)] - want).abs() < 1e-8);
    }

    #[test]
    fn jacobian_zero_when_linear_and_undriven_drift_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g: CircuitGraph<f64> = random_graph(6, 9, &mut rng).unwrap();
        let om = cycle_projector(&g).unwrap();
        let s: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a = linearize(&om, &hp(0.0, 0.0), &NetworkState(g.initial_memory()), &s, 1e-6).unwrap();
        assert!(a.amax() < 1e-9);
    }

    #[test]
    fn jacobian_richardson_and_analytic() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g: CircuitGraph<f64> = random_graph(8, 15, &mut rng).unwrap();
        let om = cycle_projector(&g).unwrap();
        let p = hp(0.1, 10.0);
        let s: Vec<f64> = (0..15).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w = NetworkState(g.initial_memory());
        let exact = analytic_jacobian(&om, &p, &w, &s).unwrap();
        let e1 = (linearize(&om, &p, &w, &s, 1e-2).unwrap() - &exact).amax();
        let e2 = (linearize(&om, &p, &w, &s, 5e-3).unwrap() - &exact).amax();
        // second-order scheme: halving the step quarters the error
        assert!(e1 / e2 > 3.0 && e1 / e2 < 5.0, "{}", e1 / e2);
        assert!((linearize(&om, &p, &w, &s, JACOBIAN_STEP).unwrap() - exact).amax() < 1e-6);
    }
}
