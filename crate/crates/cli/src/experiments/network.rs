use std::fs;

use memnet::devices::HpParams;
use memnet::network::{random_unique_maze, soc_experiment, solve_maze, BranchFit, MazeConfig, MazeSpec, SocConfig};
use memnet::sim::IntegratorSpec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{no_literal, override_integrator, Experiment, Flags};
use crate::error::{CliError, CliResult};
use crate::output::{csv, Artifacts};

/// Random-network relaxation; the graph and sources are drawn from the run seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SocRun {
    pub nodes: usize,
    pub edges: usize,
    pub hp: HpParams<f64>,
    pub source_range: f64,
    pub integrator: IntegratorSpec<f64>,
    pub steady_tol: f64,
}

pub struct NetworkSoc;

impl Experiment for NetworkSoc {
    const NAME: &'static str = "network-soc";
    type Config = SocRun;

    fn presets() -> &'static [(&'static str, &'static str)] {
        &[("soc-40", include_str!("../../presets/soc-40.json"))]
    }

    fn adjust(cfg: &mut SocRun, _: u64, flags: &Flags) -> CliResult<()> {
        no_literal(Self::NAME, flags)?;
        override_integrator(&mut cfg.integrator, flags)
    }

    fn run(cfg: &SocRun, seed: u64, _: &Flags) -> CliResult<Artifacts> {
        let soc = SocConfig {
            nodes: cfg.nodes,
            edges: cfg.edges,
            hp: cfg.hp,
            source_range: cfg.source_range,
            integrator: cfg.integrator,
            steady_tol: cfg.steady_tol,
            seed,
        };
        let r = soc_experiment(&soc)?;
        let mut a = Artifacts::default();
        let mut rows = vec![branch_row("negative", &r.negative)];
        if let Some(p) = &r.positive {
            rows.push(branch_row("positive", p));
        }
        a.file(
            "branches.csv",
            csv(&["branch", "modes", "rate_min", "rate_max", "gamma", "gamma_r2", "slope", "in_band_slope"], &rows),
        );
        let b = r.negative;
        a.metric("gamma", b.gamma);
        a.metric("gamma_r2", b.gamma_r2);
        a.metric("slope", b.slope);
        a.metric("modes", b.modes);
        a.metric("steady_at", r.steady_at.map_or("never".into(), |t| t.to_string()));
        a.metric("final_rate", r.final_rate);
        a.say(format!(
            "{} memristors: <w(t)> ~ t^{:.3} (R^2 {:.3}), spectrum slope {:.3}",
            cfg.edges, b.gamma, b.gamma_r2, b.slope
        ));
        Ok(a)
    }
}

fn branch_row(name: &str, b: &BranchFit<f64>) -> Vec<String> {
    vec![
        name.into(),
        b.modes.to_string(),
        b.rate_min.to_string(),
        b.rate_max.to_string(),
        b.gamma.to_string(),
        b.gamma_r2.to_string(),
        b.slope.to_string(),
        b.in_band_slope.map_or(String::new(), |s| s.to_string()),
    ]
}

/// Solver settings plus the size bound of the random maze drawn when no
/// `--maze` file is given.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MazeRun {
    pub solver: MazeConfig<f64>,
    pub max_cells: usize,
}

pub struct Maze;

impl Experiment for Maze {
    const NAME: &'static str = "maze";
    type Config = MazeRun;

    fn presets() -> &'static [(&'static str, &'static str)] {
        &[("maze-4", include_str!("../../presets/maze-4.json"))]
    }

    fn adjust(cfg: &mut MazeRun, _: u64, flags: &Flags) -> CliResult<()> {
        no_literal(Self::NAME, flags)?;
        override_integrator(&mut cfg.solver.integrator, flags)
    }

    fn run(cfg: &MazeRun, seed: u64, flags: &Flags) -> CliResult<Artifacts> {
        let maze = match &flags.maze {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| CliError::invalid(format!("{}: {e}", p.display())))?;
                MazeSpec::parse(&text)?
            }
            None => random_unique_maze(cfg.max_cells, &mut ChaCha8Rng::seed_from_u64(seed))?,
        };
        let s = solve_maze(&maze, &cfg.solver)?;
        let bfs = maze.shortest_path();
        let mut a = Artifacts::default();
        a.file("maze.txt", maze.to_text());
        let path_rows: Vec<Vec<String>> =
            s.path.iter().enumerate().map(|(k, (r, c))| vec![k.to_string(), r.to_string(), c.to_string()]).collect();
        a.file("path.csv", csv(&["step", "row", "col"], &path_rows));
        let on_path: Vec<bool> = (0..s.currents.len()).map(|k| s.path_edges.contains(&k)).collect();
        let edge_rows: Vec<Vec<String>> = s
            .circuit
            .edge_cells
            .iter()
            .enumerate()
            .map(|(k, ((r0, c0), (r1, c1)))| {
                vec![
                    r0.to_string(),
                    c0.to_string(),
                    r1.to_string(),
                    c1.to_string(),
                    s.currents[k].to_string(),
                    s.final_w[k].to_string(),
                    on_path[k].to_string(),
                ]
            })
            .collect();
        a.file("edges.csv", csv(&["row0", "col0", "row1", "col1", "current", "w", "on_path"], &edge_rows));
        let matches = s.path == bfs;
        let unique = maze.shortest_path_count() == 1;
        a.metric("path_length", s.path.len());
        a.metric("contrast", s.contrast);
        a.metric("matches_bfs", matches);
        a.metric("unique_shortest_path", unique);
        a.metric("steady_at", s.steady_at.map_or("never".into(), |t| t.to_string()));
        let fmt_path = |p: &[(usize, usize)]| p.iter().map(|(r, c)| format!("({r},{c})")).collect::<Vec<_>>().join(" ");
        a.say(format!("path: {}", fmt_path(&s.path)));
        a.say(format!("contrast {:.3}, {} cells", s.contrast, s.path.len()));
        if !unique {
            a.say("warning: the maze has several shortest paths; BFS picks one of them");
        }
        a.check(matches, || format!("recovered path differs from BFS: {}", fmt_path(&bfs)));
        Ok(a)
    }
}
