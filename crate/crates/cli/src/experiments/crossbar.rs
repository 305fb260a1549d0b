use memnet::crossbar::{
    apply_update, energy_estimates, nodal_oracle, program_matrix_clamped, pulse_memory, pulse_memory_exact, read_bit,
    read_mvm, stdp_program, switching_time, write_pulse, Crossbar, EnergyParams, PulseSpec, StdpKernel, UpdateRule,
    STDP_REST,
};
use memnet::devices::{hp_volatile_analytic, HpParams};
use memnet::sim::DriveSignal;
use memnet::Error;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{no_integrator, no_literal, Experiment, Flags};
use crate::error::{CliError, CliResult};
use crate::output::{csv, Artifacts};

fn matrix_csv(m: &DMatrix<f64>) -> String {
    let rows: Vec<Vec<String>> = m.row_iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
    let header: Vec<String> = (0..m.ncols()).map(|j| format!("c{j}")).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    csv(&header, &rows)
}

/// Random bit pattern written into a crossbar, read back repeatedly, then
/// left idle and read again.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WriteReadConfig {
    pub hp: HpParams<f64>,
    pub rows: usize,
    pub cols: usize,
    pub r_out: f64,
    pub v_write: f64,
    /// Write pulse length in switching times.
    pub write_factor: f64,
    pub v_read: f64,
    /// Read pulse length in switching times.
    pub read_fraction: f64,
    pub reads: usize,
    /// Volatility `alpha` (1/s) acting while the array is idle.
    pub retention_alpha: f64,
    /// Idle time in seconds.
    pub retention_time: f64,
}

pub struct WriteRead;

impl Experiment for WriteRead {
    const NAME: &'static str = "write-read";
    type Config = WriteReadConfig;

    fn presets() -> &'static [(&'static str, &'static str)] {
        &[
            ("storage-8x8", include_str!("../../presets/storage-8x8.json")),
            ("storage-volatile", include_str!("../../presets/storage-volatile.json")),
        ]
    }

    fn adjust(_: &mut WriteReadConfig, _: u64, flags: &Flags) -> CliResult<()> {
        no_literal(Self::NAME, flags)?;
        no_integrator(Self::NAME, flags)
    }

    fn run(cfg: &WriteReadConfig, seed: u64, _: &Flags) -> CliResult<Artifacts> {
        if !(cfg.retention_alpha >= 0.0 && cfg.retention_time >= 0.0) {
            return Err(CliError::invalid("config.retention_alpha and config.retention_time must be >= 0"));
        }
        let tau = switching_time(&cfg.hp, cfg.v_write)?;
        let pulse = PulseSpec {
            v_write: cfg.v_write,
            duration: cfg.write_factor * tau,
            v_read: cfg.v_read,
            read_duration: cfg.read_fraction * tau,
        };
        pulse.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hp = cfg.hp;
        let mut x = Crossbar::uniform(cfg.rows, cfg.cols, 0.5 * (hp.r_on + hp.r_off), cfg.r_out, hp)?;
        let cells: Vec<(usize, usize)> = (0..cfg.rows).flat_map(|i| (0..cfg.cols).map(move |j| (i, j))).collect();
        let pattern: Vec<bool> = cells.iter().map(|_| rng.random()).collect();
        for (&(i, j), &bit) in cells.iter().zip(&pattern) {
            x = write_pulse(&x, i, j, &if bit { pulse } else { pulse.reversed() })?;
        }
        let written = x.clone();
        let mut rows = Vec::new();
        let mut errors = 0usize;
        for (&(i, j), &bit) in cells.iter().zip(&pattern) {
            let mut cell = x.clone();
            let mut disturbance = 0.0f64;
            let mut resistance = f64::NAN;
            let mut wrong = 0usize;
            for _ in 0..cfg.reads {
                let r = read_bit(&cell, i, j, &pulse)?;
                wrong += usize::from(r.bit != bit);
                disturbance += r.disturbance;
                resistance = r.resistance;
                cell = r.crossbar;
            }
            errors += wrong;
            x = x.with_memory(i, j, cell.memory(i, j)?)?;
            rows.push(vec![
                i.to_string(),
                j.to_string(),
                u8::from(bit).to_string(),
                wrong.to_string(),
                resistance.to_string(),
                disturbance.to_string(),
            ]);
        }
        // idle: zero drive, volatile drift only
        let idle = HpParams { alpha: cfg.retention_alpha, ..hp };
        let mut retention_rows = Vec::new();
        let mut lost = 0usize;
        for (&(i, j), &bit) in cells.iter().zip(&pattern) {
            let w0 = x.memory(i, j)?;
            let w = hp_volatile_analytic(&DriveSignal::zero(), w0, &idle, cfg.retention_time).clamp(0.0, 1.0);
            let after = x.with_memory(i, j, w)?;
            let read = match read_bit(&after, i, j, &pulse) {
                Ok(r) => Some(r.bit),
                Err(Error::AmbiguousBit { .. }) => None,
                Err(e) => return Err(e.into()),
            };
            lost += usize::from(read != Some(bit));
            retention_rows.push(vec![
                i.to_string(),
                j.to_string(),
                u8::from(bit).to_string(),
                w0.to_string(),
                w.to_string(),
                read.map_or("ambiguous".into(), |b| u8::from(b).to_string()),
            ]);
        }
        let mut a = Artifacts::default();
        a.file("readback.csv", csv(&["row", "col", "bit", "read_errors", "resistance", "total_disturbance"], &rows));
        a.file("retention.csv", csv(&["row", "col", "bit", "w_before", "w_after", "read"], &retention_rows));
        a.file("memristances.csv", matrix_csv(written.memristances()));
        let total = cells.len() * cfg.reads;
        a.metric("switching_time_s", tau);
        a.metric("reads", total);
        a.metric("bit_errors", errors);
        a.metric("bits_lost_after_idle", lost);
        a.say(format!("{} cells, {total} reads: {errors} bit errors; switching time {tau:.4e} s", cells.len()));
        a.say(format!("after {} s idle at alpha = {}: {lost} bits lost", cfg.retention_time, cfg.retention_alpha));
        a.check(errors == 0, || format!("{errors} bit errors before the idle period"));
        Ok(a)
    }
}

/// Random crossbars read through the transfer matrix and through a nodal
/// solve, and random targets programmed from a uniform start.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MvmConfig {
    pub hp: HpParams<f64>,
    pub max_rows: usize,
    pub max_cols: usize,
    pub r_out_range: [f64; 2],
    pub trials: usize,
    pub program_trials: usize,
}

pub struct CrossbarMvm;

impl Experiment for CrossbarMvm {
    const NAME: &'static str = "crossbar-mvm";
    type Config = MvmConfig;

    fn presets() -> &'static [(&'static str, &'static str)] {
        &[("mvm-8", include_str!("../../presets/mvm-8.json"))]
    }

    fn adjust(_: &mut MvmConfig, _: u64, flags: &Flags) -> CliResult<()> {
        no_literal(Self::NAME, flags)?;
        no_integrator(Self::NAME, flags)
    }

    fn run(cfg: &MvmConfig, seed: u64, _: &Flags) -> CliResult<Artifacts> {
        let [lo, hi] = cfg.r_out_range;
        if !(lo > 0.0 && hi >= lo) || cfg.max_rows == 0 || cfg.max_cols == 0 {
            return Err(CliError::invalid("config: need 0 < r_out_range[0] <= r_out_range[1] and nonzero sizes"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut worst = 0.0f64;
        for trial in 0..cfg.trials {
            let (r, c) = (rng.random_range(1..=cfg.max_rows), rng.random_range(1..=cfg.max_cols));
            let x = Crossbar::random(r, c, rng.random_range(lo..=hi), cfg.hp, &mut rng)?;
            let xi: Vec<f64> = (0..c).map(|_| rng.random_range(-1.0..1.0)).collect();
            let fast = read_mvm(&x, &xi)?;
            let nodal = nodal_oracle(&x, &xi)?;
            let scale = nodal.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
            for (k, (p, q)) in fast.iter().zip(&nodal).enumerate() {
                worst = worst.max((p - q).abs() / scale);
                rows.push(vec![trial.to_string(), k.to_string(), p.to_string(), q.to_string()]);
            }
        }
        let mut prog_rows = Vec::new();
        let mut residual = 0.0f64;
        for trial in 0..cfg.program_trials {
            let (r, c) = (rng.random_range(1..=cfg.max_rows), rng.random_range(1..=cfg.max_cols));
            let r_out = rng.random_range(lo..=hi);
            let target = Crossbar::random(r, c, r_out, cfg.hp, &mut rng)?.transfer_matrix();
            let start = Crossbar::uniform(r, c, 0.5 * (cfg.hp.r_on + cfg.hp.r_off), r_out, cfg.hp)?;
            let p = program_matrix_clamped(&start, &target)?;
            residual = residual.max(p.residual);
            prog_rows.push(vec![
                trial.to_string(),
                r.to_string(),
                c.to_string(),
                p.sweeps.to_string(),
                p.residual.to_string(),
                p.clamped.len().to_string(),
            ]);
        }
        let mut a = Artifacts::default();
        a.file("mvm.csv", csv(&["trial", "output", "transfer", "nodal"], &rows));
        a.file("programming.csv", csv(&["trial", "rows", "cols", "sweeps", "residual", "clamped"], &prog_rows));
        a.metric("max_relative_error", worst);
        a.metric("max_program_residual", residual);
        a.say(format!("transfer matrix vs nodal solve over {} arrays: max relative error {worst:.3e}", cfg.trials));
        a.say(format!("programming {} targets: max residual {residual:.3e}", cfg.program_trials));
        a.check(worst < 1e-9, || format!("transfer matrix disagrees with the nodal solve by {worst:.3e}"));
        a.check(residual < 1e-6, || format!("programming residual {residual:.3e}"));
        Ok(a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainRule {
    Adaline,
    Sanger,
    Gradient,
}

/// Online training on Gaussian inputs `x = Q diag(sd) z` with a random rotation `Q`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub rule: TrainRule,
    pub eta: f64,
    pub samples: usize,
    /// Standard deviation along each principal axis; its length is the input dimension.
    pub sd: Vec<f64>,
    /// Rows of the weight matrix (Sanger: components to extract; gradient: target dimension).
    pub outputs: usize,
    pub log_every: usize,
}

pub struct CrossbarTrain;

/// Unsigned angle in degrees between two vectors.
fn angle_deg(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a.dot(b).abs() / (a.norm() * b.norm())).min(1.0).acos().to_degrees()
}

impl Experiment for CrossbarTrain {
    const NAME: &'static str = "crossbar-train";
    type Config = TrainConfig;

    fn presets() -> &'static [(&'static str, &'static str)] {
        &[
            ("sanger-2d", include_str!("../../presets/sanger-2d.json")),
            ("sanger-4d", include_str!("../../presets/sanger-4d.json")),
            ("adaline-3d", include_str!("../../presets/adaline-3d.json")),
            ("gradient-3d", include_str!("../../presets/gradient-3d.json")),
        ]
    }

    fn adjust(cfg: &mut TrainConfig, _: u64, flags: &Flags) -> CliResult<()> {
        no_integrator(Self::NAME, flags)?;
        if flags.literal && (cfg.rule != TrainRule::Sanger || cfg.outputs != cfg.sd.len()) {
            return Err(CliError::invalid("--literal needs rule `sanger` with a square weight matrix (outputs = len(sd))"));
        }
        Ok(())
    }

    fn run(cfg: &TrainConfig, seed: u64, flags: &Flags) -> CliResult<Artifacts> {
        let dim = cfg.sd.len();
        if dim == 0 || cfg.outputs == 0 || cfg.samples == 0 || cfg.log_every == 0 {
            return Err(CliError::invalid("config: sd, outputs, samples and log_every must be nonzero"));
        }
        if cfg.sd.iter().any(|&s| !(s > 0.0)) {
            return Err(CliError::invalid("config.sd entries must be > 0"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
        let q = DMatrix::from_fn(dim, dim, |_, _| normal()).qr().q();
        let scale = DMatrix::from_diagonal(&DVector::from_column_slice(&cfg.sd));
        let mix = &q * scale;
        let xs: Vec<DVector<f64>> = (0..cfg.samples).map(|_| &mix * DVector::from_fn(dim, |_, _| normal())).collect();
        let (rows, cols) = match cfg.rule {
            TrainRule::Adaline => (dim, dim),
            _ => (cfg.outputs, dim),
        };
        let w0 = DMatrix::from_fn(rows, cols, |_, _| 0.1 * normal());
        let truth = DMatrix::from_fn(cfg.outputs, dim, |_, _| normal());
        let rule = match (cfg.rule, flags.literal) {
            (TrainRule::Adaline, _) => UpdateRule::Adaline { eta: cfg.eta },
            (TrainRule::Sanger, false) => UpdateRule::Sanger { eta: cfg.eta },
            (TrainRule::Sanger, true) => UpdateRule::SangerLiteral { eta: cfg.eta },
            (TrainRule::Gradient, _) => UpdateRule::Gradient { eta: cfg.eta },
        };

        // oracles, computed from the same samples
        let n = cfg.samples as f64;
        let cov = xs.iter().fold(DMatrix::zeros(dim, dim), |c, x| c + x * x.transpose()) / n;
        let eig = cov.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        let axes: Vec<DVector<f64>> = order.iter().map(|&k| eig.eigenvectors.column(k).into_owned()).collect();

        let error = |w: &DMatrix<f64>, seen: usize| -> f64 {
            match cfg.rule {
                TrainRule::Sanger => (0..rows.min(dim)).map(|k| angle_deg(&w.row(k).transpose(), &axes[k])).fold(0.0, f64::max),
                TrainRule::Gradient => (w - &truth).amax(),
                TrainRule::Adaline => {
                    let partial = xs[..seen].iter().fold(DMatrix::zeros(dim, dim), |c, x| c + x * x.transpose());
                    (w - (&w0 + partial * cfg.eta)).amax()
                }
            }
        };
        let mut w = w0.clone();
        let mut history = vec![vec!["0".to_string(), error(&w, 0).to_string()]];
        for (k, x) in xs.iter().enumerate() {
            let target = (cfg.rule == TrainRule::Gradient).then(|| &truth * x);
            w = apply_update(&w, &rule, x, target.as_ref())?;
            if !w.iter().all(|v| v.is_finite()) {
                return Err(CliError::Numerical(format!("weights diverged at sample {}", k + 1)));
            }
            if (k + 1) % cfg.log_every == 0 || k + 1 == xs.len() {
                history.push(vec![(k + 1).to_string(), error(&w, k + 1).to_string()]);
            }
        }
        let mut a = Artifacts::default();
        a.file("weights.csv", matrix_csv(&w));
        let err_name = match cfg.rule {
            TrainRule::Sanger => "max_angle_deg",
            TrainRule::Gradient => "max_weight_error",
            TrainRule::Adaline => "deviation_from_sum",
        };
        a.file("history.csv", csv(&["samples", err_name], &history));
        match cfg.rule {
            TrainRule::Sanger => {
                let angles: Vec<f64> = (0..rows.min(dim)).map(|k| angle_deg(&w.row(k).transpose(), &axes[k])).collect();
                for (k, ang) in angles.iter().enumerate() {
                    a.metric(format!("angle_{k}_deg"), ang);
                }
                a.say(format!(
                    "{} rule: angles to the covariance eigenvectors {:?} deg",
                    if flags.literal { "literal Sanger" } else { "Sanger" },
                    angles.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>()
                ));
                if !flags.literal {
                    a.check(angles[0] < 5.0, || format!("leading component off by {:.2} deg", angles[0]));
                }
            }
            TrainRule::Gradient => {
                let e = (&w - &truth).amax();
                a.metric("max_weight_error", e);
                a.say(format!("gradient rule: max |W - W_true| = {e:.3e}"));
                a.check(e < 1e-3, || format!("weights did not converge: {e:.3e}"));
            }
            TrainRule::Adaline => {
                let adaline_final = &w0 + &cov * (cfg.eta * n);
                let e = (&w - &adaline_final).amax();
                let rel = e / adaline_final.amax();
                a.metric("relative_deviation_from_sum", rel);
                a.say(format!("adaline: relative deviation from W0 + eta sum x x^T = {rel:.3e}"));
                a.check(rel < 1e-12, || format!("accumulated updates differ from the closed sum by {rel:.3e}"));
            }
        }
        Ok(a)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StdpConfig {
    pub kernel: StdpKernel<f64>,
    pub hp: HpParams<f64>,
    pub v_write: f64,
    pub v_read: f64,
    /// Spike timing differences `t_post - t_pre` in seconds: `[min, max]`.
    pub delta_t_range: [f64; 2],
    pub points: usize,
}

pub struct Stdp;

impl Experiment for Stdp {
    const NAME: &'static str = "stdp";
    type Config = StdpConfig;

    fn presets() -> &'static [(&'static str, &'static str)] {
        &[("stdp-storage", include_str!("../../presets/stdp-storage.json"))]
    }

    fn adjust(_: &mut StdpConfig, _: u64, flags: &Flags) -> CliResult<()> {
        no_literal(Self::NAME, flags)?;
        no_integrator(Self::NAME, flags)
    }

    fn run(cfg: &StdpConfig, _: u64, _: &Flags) -> CliResult<Artifacts> {
        let [lo, hi] = cfg.delta_t_range;
        if cfg.points < 2 || !(hi > lo) {
            return Err(CliError::invalid("config: need points >= 2 and delta_t_range[1] > delta_t_range[0]"));
        }
        let mut rows = Vec::new();
        let (mut worst_exact, mut worst_ode, mut unreachable) = (0.0f64, 0.0f64, 0usize);
        for k in 0..cfg.points {
            let dt = lo + (hi - lo) * k as f64 / (cfg.points - 1) as f64;
            let want = cfg.kernel.eval(dt);
            match stdp_program(dt, &cfg.kernel, &cfg.hp, cfg.v_write, cfg.v_read) {
                Ok(p) => {
                    let exact = STDP_REST - pulse_memory_exact(&cfg.hp, STDP_REST, p.v_write, p.duration)?;
                    let ode = STDP_REST - pulse_memory(&cfg.hp, STDP_REST, p.v_write, p.duration)?;
                    worst_exact = worst_exact.max((exact - want).abs());
                    worst_ode = worst_ode.max((ode - want).abs());
                    rows.push(vec![
                        dt.to_string(),
                        want.to_string(),
                        p.v_write.to_string(),
                        p.duration.to_string(),
                        exact.to_string(),
                        ode.to_string(),
                    ]);
                }
                Err(Error::Unreachable { .. }) => {
                    unreachable += 1;
                    rows.push(vec![dt.to_string(), want.to_string(), String::new(), String::new(), String::new(), String::new()]);
                }
                Err(e) => return Err(e.into()),
            }
        }
        let mut a = Artifacts::default();
        a.file("stdp.csv", csv(&["delta_t", "kernel", "v_write", "duration", "dw_closed_form", "dw_ode"], &rows));
        a.metric("max_error_closed_form", worst_exact);
        a.metric("max_error_ode", worst_ode);
        a.metric("unreachable", unreachable);
        a.say(format!(
            "{} timings: weight change matches the kernel to {worst_exact:.2e} (closed form), {worst_ode:.2e} (ODE); {unreachable} unreachable",
            cfg.points
        ));
        a.check(worst_exact < 1e-9, || format!("closed-form weight change off by {worst_exact:.3e}"));
        a.check(worst_ode < 1e-8, || format!("simulated weight change off by {worst_ode:.3e}"));
        Ok(a)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyConfig {
    pub p_err: f64,
    pub l_bits: f64,
    pub kt: f64,
    /// Synapse / neuron counts to tabulate.
    pub n: Vec<f64>,
}

pub struct Energy;

impl Experiment for Energy {
    const NAME: &'static str = "energy";
    type Config = EnergyConfig;

    fn presets() -> &'static [(&'static str, &'static str)] {
        &[("landauer", include_str!("../../presets/landauer.json"))]
    }

    fn adjust(_: &mut EnergyConfig, _: u64, flags: &Flags) -> CliResult<()> {
        no_literal(Self::NAME, flags)?;
        no_integrator(Self::NAME, flags)
    }

    fn run(cfg: &EnergyConfig, _: u64, _: &Flags) -> CliResult<Artifacts> {
        if cfg.n.is_empty() {
            return Err(CliError::invalid("config.n must list at least one count"));
        }
        let mut rows = Vec::new();
        let mut a = Artifacts::default();
        let mut crossover = None;
        for &n in &cfg.n {
            let e = energy_estimates(&EnergyParams { p_err: cfg.p_err, l_bits: cfg.l_bits, n, kt: cfg.kt })?;
            if crossover.is_none() && e.e_memr > e.e_dig {
                crossover = Some(n);
            }
            rows.push(vec![n.to_string(), e.e_gate.to_string(), e.e_dig.to_string(), e.e_memr.to_string()]);
        }
        a.file("energy.csv", csv(&["n", "e_gate_j", "e_digital_j", "e_memristive_j"], &rows));
        a.metric("memristive_exceeds_digital_at", crossover.map_or("none".into(), |n| n.to_string()));
        a.say(match crossover {
            Some(n) => format!("memristive estimate exceeds digital from N = {n}"),
            None => "memristive estimate stays below digital over the listed N".into(),
        });
        Ok(a)
    }
}
