use memnet::devices::HpParams;
use memnet::learning::{
    coefficients_to_csv, fit_readout, lca_simulate, linear_convolution_oracle, nef_decode, nef_decode_rms, nef_encode,
    nef_fit_decoders, rc_run, Encoder, Grid, LcaProblem, NefPopulation, Reservoir, ReservoirDynamics,
};
use memnet::network::random_graph;
use memnet::sim::{DriveSignal, IntegratorSpec, Trace};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{no_integrator, no_literal, override_integrator, Experiment, Flags};
use crate::error::{CliError, CliResult};
use crate::output::{csv, Artifacts};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ReservoirKind {
    /// `dq/dt = A q + B u` with `A = -decay I + coupling * N(0, 1) / sqrt(size)`.
    Linear { size: usize, decay: f64, coupling: f64 },
    /// Random memristive graph; the state is the vector of memristor currents.
    Memristive { nodes: usize, edges: usize, hp: HpParams<f64> },
}

/// Delay-recall task: a ridge readout on the reservoir features reproduces
/// the input `delay` seconds in the past.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RcConfig {
    pub reservoir: ReservoirKind,
    /// Rows of the feature mixing matrix `H`.
    pub features: usize,
    /// Summed into the scalar input `u(t)`.
    pub input: Vec<DriveSignal<f64>>,
    pub input_gain: f64,
    pub delay: f64,
    /// Samples before this time are discarded.
    pub washout: f64,
    /// Fraction of the remaining samples used for fitting.
    pub train_fraction: f64,
    pub ridge: f64,
    pub integrator: IntegratorSpec<f64>,
}

pub struct RcDemo;

fn nrmse(pred: &[f64], want: &[f64]) -> f64 {
    let n = want.len() as f64;
    let mean = want.iter().sum::<f64>() / n;
    let var = want.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n;
    let mse = pred.iter().zip(want).map(|(p, y)| (p - y).powi(2)).sum::<f64>() / n;
    (mse / var.max(f64::MIN_POSITIVE)).sqrt()
}

impl Experiment for RcDemo {
    const NAME: &'static str = "rc-demo";
    type Config = RcConfig;

    fn presets() -> &'static [(&'static str, &'static str)] {
        &[
            ("rc-linear", include_str!("../../presets/rc-linear.json")),
            ("rc-memristive", include_str!("../../presets/rc-memristive.json")),
        ]
    }

    fn adjust(cfg: &mut RcConfig, _: u64, flags: &Flags) -> CliResult<()> {
        no_literal(Self::NAME, flags)?;
        override_integrator(&mut cfg.integrator, flags)
    }

    fn run(cfg: &RcConfig, seed: u64, _: &Flags) -> CliResult<Artifacts> {
        if cfg.input.is_empty() {
            return Err(CliError::invalid("config.input needs at least one signal"));
        }
        if !(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0) {
            return Err(CliError::invalid("config.train_fraction must lie in (0, 1)"));
        }
        if !(cfg.delay >= 0.0 && cfg.washout >= 0.0) {
            return Err(CliError::invalid("config.delay and config.washout must be >= 0"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut normal = move || -> f64 { StandardNormal.sample(&mut rng) };
        let dynamics = match &cfg.reservoir {
            ReservoirKind::Linear { size, decay, coupling } => {
                let scale = coupling / (*size as f64).sqrt();
                let mut a = DMatrix::from_fn(*size, *size, |_, _| scale * normal());
                for i in 0..*size {
                    a[(i, i)] -= decay;
                }
                ReservoirDynamics::Linear { a }
            }
            ReservoirKind::Memristive { nodes, edges, hp } => {
                let mut graph_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
                ReservoirDynamics::Memristive { graph: random_graph(*nodes, *edges, &mut graph_rng)?, hp: *hp }
            }
        };
        let q = match &dynamics {
            ReservoirDynamics::Linear { a } => a.nrows(),
            ReservoirDynamics::Memristive { graph, .. } => graph.memristor_edges().len(),
        };
        let b = DMatrix::from_fn(q, 1, |_, _| normal());
        let h = DMatrix::from_fn(cfg.features, q, |_, _| normal() / (q as f64).sqrt());
        let encoder = Encoder { gain: cfg.input_gain, offset: 0.0 };
        let r = Reservoir::new(encoder, b, dynamics, h)?;
        let signal = |t: f64| cfg.input.iter().map(|s| s.eval(t)).sum::<f64>();
        let u = |t: f64| vec![signal(t)];
        let g = rc_run(&r, u, &cfg.integrator)?;

        let mut a = Artifacts::default();
        if matches!(cfg.reservoir, ReservoirKind::Linear { .. }) {
            let oracle = linear_convolution_oracle(&r, u, cfg.integrator.dt, g.len() - 1)?;
            let err = oracle
                .iter()
                .enumerate()
                .flat_map(|(k, o)| o.iter().enumerate().map(move |(c, &v)| (k, c, v)))
                .fold(0.0f64, |m, (k, c, v)| m.max((g.channels()[c][k] - v).abs()));
            a.metric("convolution_oracle_error", err);
            a.say(format!("features vs direct convolution: max error {err:.3e}"));
            a.check(err < 1e-4, || format!("reservoir features differ from the convolution by {err:.3e}"));
        }

        let start = (0..g.len()).find(|&k| g.time(k) >= cfg.washout + cfg.delay).unwrap_or(g.len());
        let used: Vec<usize> = (start..g.len()).collect();
        let n_train = (used.len() as f64 * cfg.train_fraction) as usize;
        if n_train < cfg.features + 1 || used.len() - n_train < 2 {
            return Err(CliError::invalid("not enough samples after the washout; increase t_end"));
        }
        let design = DMatrix::from_fn(used.len(), cfg.features + 1, |k, c| {
            if c == cfg.features {
                1.0
            } else {
                g.channels()[c][used[k]]
            }
        });
        let target: Vec<f64> = used.iter().map(|&k| signal(g.time(k) - cfg.delay)).collect();
        let train = design.rows(0, n_train).into_owned();
        let readout = fit_readout(&train, &DVector::from_column_slice(&target[..n_train]), cfg.ridge)?;
        let pred = readout.predict(&design)?;
        let (train_err, test_err) = (
            nrmse(&pred.as_slice()[..n_train], &target[..n_train]),
            nrmse(&pred.as_slice()[n_train..], &target[n_train..]),
        );
        let rows: Vec<Vec<String>> = used
            .iter()
            .enumerate()
            .map(|(k, &s)| {
                vec![g.time(s).to_string(), target[k].to_string(), pred[k].to_string(), u8::from(k < n_train).to_string()]
            })
            .collect();
        a.file("features.csv", g.to_csv_string());
        a.file("prediction.csv", csv(&["t", "target", "prediction", "train"], &rows));
        a.file("readout.csv", coefficients_to_csv(&readout.coef));
        a.metric("state_dim", q);
        a.metric("train_nrmse", train_err);
        a.metric("test_nrmse", test_err);
        a.metric("readout_min_norm", readout.min_norm);
        a.say(format!("delay {} recall: NRMSE {train_err:.3e} (train), {test_err:.3e} (test)", cfg.delay));
        Ok(a)
    }
}

/// Decoding random sinusoids `c sin(k x + phase)` from population rates.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NefConfig {
    /// Population sizes to compare.
    pub neurons: Vec<usize>,
    pub grid: Grid<f64>,
    pub tau0: f64,
    pub tau_rc: f64,
    pub i_f: f64,
    pub reg: f64,
    pub train_functions: usize,
    pub test_functions: usize,
    pub amplitude_range: [f64; 2],
    pub wavenumber_range: [f64; 2],
}

pub struct NefDemo;

impl Experiment for NefDemo {
    const NAME: &'static str = "nef-demo";
    type Config = NefConfig;

    fn presets() -> &'static [(&'static str, &'static str)] {
        &[("nef-sines", include_str!("../../presets/nef-sines.json"))]
    }

    fn adjust(_: &mut NefConfig, _: u64, flags: &Flags) -> CliResult<()> {
        no_literal(Self::NAME, flags)?;
        no_integrator(Self::NAME, flags)
    }

    fn run(cfg: &NefConfig, seed: u64, _: &Flags) -> CliResult<Artifacts> {
        if cfg.neurons.is_empty() || cfg.train_functions == 0 || cfg.test_functions == 0 {
            return Err(CliError::invalid("config: neurons, train_functions and test_functions must be nonempty"));
        }
        let ([c0, c1], [k0, k1]) = (cfg.amplitude_range, cfg.wavenumber_range);
        if !(c1 >= c0 && k1 >= k0) {
            return Err(CliError::invalid("config: ranges must be [low, high]"));
        }
        cfg.grid.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = |n: usize, rng: &mut ChaCha8Rng| -> Vec<Vec<f64>> {
            (0..n)
                .map(|_| {
                    let c = rng.random_range(c0..=c1);
                    let k = rng.random_range(k0..=k1);
                    let ph = rng.random_range(0.0..std::f64::consts::TAU);
                    cfg.grid.sample(|x| c * (k * x + ph).sin())
                })
                .collect()
        };
        let train = draw(cfg.train_functions, &mut rng);
        let test = draw(cfg.test_functions, &mut rng);
        let mut rows = Vec::new();
        let mut errors = Vec::new();
        let mut example = None;
        for &n in &cfg.neurons {
            let p = NefPopulation::random(n, cfg.grid, cfg.tau0, cfg.tau_rc, cfg.i_f, &mut rng)?;
            let d = nef_fit_decoders(&p, &train, cfg.reg)?;
            let train_rms = nef_decode_rms(&p, &d, &train)?;
            let test_rms = nef_decode_rms(&p, &d, &test)?;
            let silent = test.iter().try_fold(0usize, |acc, f| {
                nef_encode(f, &p).map(|r| acc + r.iter().filter(|&&x| x == 0.0).count())
            })?;
            rows.push(vec![n.to_string(), train_rms.to_string(), test_rms.to_string(), silent.to_string()]);
            errors.push(test_rms);
            example = Some((p, d));
        }
        let (p, d) = example.expect("neurons is nonempty");
        let decoded = nef_decode(&nef_encode(&test[0], &p)?, &d)?;
        let ex_rows: Vec<Vec<String>> = cfg
            .grid
            .xs()
            .iter()
            .enumerate()
            .map(|(k, x)| vec![x.to_string(), test[0][k].to_string(), decoded[k].to_string()])
            .collect();
        let mut a = Artifacts::default();
        a.file("decode_error.csv", csv(&["neurons", "train_rms", "test_rms", "silent_rates"], &rows));
        a.file("example.csv", csv(&["x", "f", "decoded"], &ex_rows));
        for (n, e) in cfg.neurons.iter().zip(&errors) {
            a.metric(format!("test_rms_{n}"), e);
            a.say(format!("N = {n}: test RMS decode error {e:.4e}"));
        }
        let (first, last) = (errors[0], errors[errors.len() - 1]);
        if cfg.neurons.len() > 1 && cfg.neurons[cfg.neurons.len() - 1] > cfg.neurons[0] {
            a.check(last < first, || format!("largest population decodes worse ({last:.3e}) than the smallest ({first:.3e})"));
        }
        Ok(a)
    }
}

/// Sparse code of a signal built from a few atoms of a random unit-norm dictionary.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LcaConfig {
    pub dim: usize,
    pub atoms: usize,
    /// Number of active atoms in the generated signal.
    pub active: usize,
    /// Active coefficients are drawn from this range (must be positive).
    pub coefficient_range: [f64; 2],
    pub lambda: f64,
    pub tau: f64,
    pub integrator: IntegratorSpec<f64>,
}

pub struct Lca;

impl Experiment for Lca {
    const NAME: &'static str = "lca";
    type Config = LcaConfig;

    fn presets() -> &'static [(&'static str, &'static str)] {
        &[("lca-sparse", include_str!("../../presets/lca-sparse.json"))]
    }

    fn adjust(cfg: &mut LcaConfig, _: u64, flags: &Flags) -> CliResult<()> {
        no_literal(Self::NAME, flags)?;
        override_integrator(&mut cfg.integrator, flags)
    }

    fn run(cfg: &LcaConfig, seed: u64, _: &Flags) -> CliResult<Artifacts> {
        let [lo, hi] = cfg.coefficient_range;
        if !(lo > 0.0 && hi >= lo) {
            return Err(CliError::invalid("config.coefficient_range must be positive and increasing"));
        }
        if cfg.dim == 0 || cfg.active == 0 || cfg.active > cfg.atoms {
            return Err(CliError::invalid("config: need dim > 0 and 0 < active <= atoms"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut phi = DMatrix::from_fn(cfg.dim, cfg.atoms, |_, _| -> f64 { StandardNormal.sample(&mut rng) });
        for mut col in phi.column_iter_mut() {
            col.normalize_mut();
        }
        let mut support: Vec<usize> = rand::seq::index::sample(&mut rng, cfg.atoms, cfg.active).into_vec();
        support.sort_unstable();
        let mut coef = DVector::zeros(cfg.atoms);
        for &k in &support {
            coef[k] = rng.random_range(lo..=hi);
        }
        let x = &phi * &coef;
        let p = LcaProblem::new(phi.clone(), cfg.lambda, cfg.tau)?;
        let res = lca_simulate(&p, &x, &cfg.integrator)?;
        let found: Vec<usize> = (0..cfg.atoms).filter(|&k| res.a[k] != 0.0).collect();

        // at a fixed point the active coefficients solve least squares on their own atoms
        let sub = phi.select_columns(&found);
        let lstsq = if found.is_empty() {
            DVector::zeros(0)
        } else {
            sub.clone().svd(true, true).solve(&x, 1e-12).map_err(|e| CliError::Numerical(e.to_string()))?
        };
        let fixed_point_err =
            found.iter().enumerate().map(|(s, &k)| (res.a[k] - lstsq[s]).abs()).fold(0.0f64, f64::max);
        let residual = (&x - &phi * &res.a).norm() / x.norm();
        let energy = res.trace.require("energy")?;
        let rises = energy.windows(2).filter(|w| w[1] > w[0] + 1e-12).count();

        let rows: Vec<Vec<String>> = (0..cfg.atoms)
            .map(|k| vec![k.to_string(), coef[k].to_string(), res.a[k].to_string()])
            .collect();
        let mut a = Artifacts::default();
        a.file("coefficients.csv", csv(&["atom", "true", "lca"], &rows));
        a.file("trace.csv", energy_trace(&res.trace)?);
        a.metric("converged", res.converged);
        a.metric("support_recovered", found == support);
        a.metric("active_found", found.len());
        a.metric("fixed_point_error", fixed_point_err);
        a.metric("relative_residual", residual);
        a.metric("energy_increases", rises);
        a.say(format!(
            "{} of {} atoms active (true support {:?}, found {:?}); residual {residual:.3e}",
            found.len(),
            cfg.atoms,
            support,
            found
        ));
        a.say(format!("active coefficients vs least squares on the found atoms: {fixed_point_err:.3e}"));
        a.check(res.converged, || "LCA did not reach a fixed point before t_end".into());
        a.check(fixed_point_err < 1e-6, || format!("fixed point differs from least squares by {fixed_point_err:.3e}"));
        Ok(a)
    }
}

/// The LCA trace thinned to every tenth sample.
fn energy_trace(tr: &Trace<f64>) -> CliResult<String> {
    let keep: Vec<Vec<f64>> = tr.channels().iter().map(|c| c.iter().step_by(10).copied().collect()).collect();
    Ok(Trace::new(tr.t0(), tr.dt() * 10.0, tr.names().to_vec(), keep)?.to_csv_string())
}
