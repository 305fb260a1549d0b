//! `memnet`: runs the named experiments and writes CSV artifacts.

// `!(x > 0)` is the NaN-rejecting form of a range check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod config;
mod error;
mod experiments;
mod output;

use error::{CliError, CliResult};
use experiments::{circuits, crossbar, learning, network, Experiment, Flags};
use output::RunInfo;

#[derive(Parser)]
#[command(name = "memnet", version, about = "Memristive circuit and network experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Embedded parameter set (defaults to the experiment's first preset).
    #[arg(long)]
    preset: Option<String>,
    /// JSON config file, as an alternative to --preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: $MEMNET_OUT/<experiment> or memnet-out/<experiment>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Integrator step override.
    #[arg(long)]
    dt: Option<f64>,
    /// Integrator end time override.
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// Use the update rule exactly as printed (crossbar-train with rule `sanger`, square weights).
    #[arg(long)]
    literal: bool,
    /// Maze file (`#` wall, `.` open, `S` entrance, `E` exit) instead of a random maze.
    #[arg(long)]
    maze: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Pinched I-V loops of one device at several drive frequencies.
    Hysteresis(Common),
    /// SET/RESET a bit pattern into a crossbar, read it back, then idle.
    WriteRead(Common),
    /// Capacitor discharging through a memristor against its Lambert-W closed form.
    McVolatility(Common),
    /// Adaptive RLC circuit with a threshold memristor.
    Amoeba(Common),
    /// Plant memristor with an optional parasitic RC branch.
    Plant(Common),
    /// Squid-axon channels as memristive gates under a voltage clamp.
    Hh(Common),
    /// Relaxation spectrum of a random memristive network.
    NetworkSoc(Common),
    /// Maze solving by a memristive grid.
    Maze(Common),
    /// Crossbar read-out against a nodal solve, and transfer-matrix programming.
    CrossbarMvm(Common),
    /// Online adaline, Sanger or gradient training.
    CrossbarTrain(Common),
    /// Write pulses realizing a spike-timing kernel.
    Stdp(Common),
    /// Delay recall with a linear or memristive reservoir.
    RcDemo(Common),
    /// Function decoding from rate-coded populations of several sizes.
    NefDemo(Common),
    /// Sparse coding with a locally competitive network.
    Lca(Common),
    /// Gate, digital and memristive energy estimates.
    Energy(Common),
}

fn execute<E: Experiment>(c: &Common) -> CliResult<()> {
    let mut env = config::load::<E::Config>(E::NAME, E::presets(), c.preset.as_deref(), c.config.as_deref())?;
    if let Some(seed) = c.seed {
        env.seed = seed;
    }
    let flags = Flags { dt: c.dt, t_end: c.t_end, literal: c.literal, maze: c.maze.clone() };
    E::adjust(&mut env.config, env.seed, &flags)?;
    let hash = env.hash()?;
    let config_json = serde_json::to_string_pretty(&env).map_err(|e| CliError::invalid(e.to_string()))? + "\n";
    let artifacts = E::run(&env.config, env.seed, &flags)?;
    let root = std::env::var_os("MEMNET_OUT").map(PathBuf::from);
    let dir = output::out_dir(c.out.as_deref(), root.as_deref(), E::NAME);
    let preset = match (&c.preset, &c.config) {
        (Some(p), _) => Some(p.as_str()),
        (None, None) => Some(E::presets()[0].0),
        (None, Some(_)) => None,
    };
    let info = RunInfo { experiment: E::NAME, preset, seed: env.seed, config_sha256: &hash, config_json };
    output::write(&dir, &info, &artifacts)?;
    // a closed stdout must not turn a finished run into a failure
    let mut out = std::io::stdout().lock();
    for line in &artifacts.summary {
        let _ = writeln!(out, "{line}");
    }
    let _ = writeln!(out, "artifacts: {}", dir.display());
    match artifacts.check_failure {
        Some(msg) => Err(CliError::Numerical(msg)),
        None => Ok(()),
    }
}

fn dispatch(cmd: &Command) -> CliResult<()> {
    match cmd {
        Command::Hysteresis(c) => execute::<circuits::Hysteresis>(c),
        Command::WriteRead(c) => execute::<crossbar::WriteRead>(c),
        Command::McVolatility(c) => execute::<circuits::McVolatility>(c),
        Command::Amoeba(c) => execute::<circuits::Amoeba>(c),
        Command::Plant(c) => execute::<circuits::Plant>(c),
        Command::Hh(c) => execute::<circuits::Hh>(c),
        Command::NetworkSoc(c) => execute::<network::NetworkSoc>(c),
        Command::Maze(c) => execute::<network::Maze>(c),
        Command::CrossbarMvm(c) => execute::<crossbar::CrossbarMvm>(c),
        Command::CrossbarTrain(c) => execute::<crossbar::CrossbarTrain>(c),
        Command::Stdp(c) => execute::<crossbar::Stdp>(c),
        Command::RcDemo(c) => execute::<learning::RcDemo>(c),
        Command::NefDemo(c) => execute::<learning::NefDemo>(c),
        Command::Lca(c) => execute::<learning::Lca>(c),
        Command::Energy(c) => execute::<crossbar::Energy>(c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("memnet: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
