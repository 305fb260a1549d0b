//! One module per group of subcommands. Every experiment has a typed config,
//! embedded presets and a `run` that returns artifacts.

use std::path::PathBuf;

use memnet::sim::IntegratorSpec;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::output::Artifacts;

pub mod circuits;
pub mod crossbar;
pub mod learning;
pub mod network;

/// Flags that reach the experiment itself.
#[derive(Debug, Clone, Default)]
pub struct Flags {
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub literal: bool,
    pub maze: Option<PathBuf>,
}

pub trait Experiment {
    const NAME: &'static str;
    type Config: Serialize + DeserializeOwned;

    /// `(name, json)`; the first entry is the default.
    fn presets() -> &'static [(&'static str, &'static str)];

    /// Applies the command-line overrides to the loaded config.
    fn adjust(cfg: &mut Self::Config, seed: u64, flags: &Flags) -> CliResult<()>;

    fn run(cfg: &Self::Config, seed: u64, flags: &Flags) -> CliResult<Artifacts>;
}

/// Overrides for experiments with one integrator.
pub fn override_integrator(spec: &mut IntegratorSpec<f64>, flags: &Flags) -> CliResult<()> {
    if let Some(dt) = flags.dt {
        spec.dt = dt;
    }
    if let Some(t) = flags.t_end {
        spec.t_end = t;
    }
    spec.validate().map_err(CliError::from)
}

/// Rejects `--dt` / `--t-end` for experiments without a time integrator.
pub fn no_integrator(name: &str, flags: &Flags) -> CliResult<()> {
    if flags.dt.is_some() || flags.t_end.is_some() {
        return Err(CliError::invalid(format!("{name} has no integrator; --dt and --t-end do not apply")));
    }
    Ok(())
}

pub fn no_literal(name: &str, flags: &Flags) -> CliResult<()> {
    if flags.literal {
        return Err(CliError::invalid(format!("--literal only applies to crossbar-train, not {name}")));
    }
    Ok(())
}
