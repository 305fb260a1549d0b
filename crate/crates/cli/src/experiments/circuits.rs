use memnet::circuits::{
    amoeba_settling, amoeba_simulate, hh_simulate, mc_analytic, mc_simulate, plant_simulate, PlantParams,
};
use memnet::devices::HhParams;
use memnet::presets::{hysteresis_sweep, AmoebaConfig, HysteresisConfig, McConfig};
use memnet::sim::{max_abs, DriveSignal, IntegratorSpec};
use serde::{Deserialize, Serialize};

use super::{no_integrator, no_literal, override_integrator, Experiment, Flags};
use crate::error::{CliError, CliResult};
use crate::output::{csv, Artifacts};

pub struct Hysteresis;

impl Experiment for Hysteresis {
    const NAME: &'static str = "hysteresis";
    type Config = HysteresisConfig;

    fn presets() -> &'static [(&'static str, &'static str)] {
        &[("hp-fig", include_str!("../../presets/hp-fig.json"))]
    }

    fn adjust(_: &mut HysteresisConfig, _: u64, flags: &Flags) -> CliResult<()> {
        no_literal(Self::NAME, flags)?;
        no_integrator(Self::NAME, flags)
    }

    fn run(cfg: &HysteresisConfig, _: u64, _: &Flags) -> CliResult<Artifacts> {
        if cfg.frequencies.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::invalid("config.frequencies must be strictly increasing"));
        }
        let loops = hysteresis_sweep(cfg)?;
        let mut a = Artifacts::default();
        let mut rows = Vec::new();
        for (k, l) in loops.iter().enumerate() {
            a.file(format!("iv_{k}.csv"), l.trace.to_csv_string());
            rows.push(vec![l.frequency.to_string(), l.area.to_string()]);
            a.metric(format!("area_{k}"), l.area);
            a.say(format!("f = {} Hz: loop area {:.4e} V A", l.frequency, l.area));
        }
        a.file("loop_areas.csv", csv(&["frequency_hz", "area_va"], &rows));
        let monotone = loops.windows(2).all(|w| w[1].area < w[0].area);
        a.metric("areas_decreasing", monotone);
        a.check(monotone, || "loop area does not decrease with frequency".into());
        Ok(a)
    }
}

pub struct McVolatility;

impl Experiment for McVolatility {
    const NAME: &'static str = "mc-volatility";
    type Config = McConfig;

    fn presets() -> &'static [(&'static str, &'static str)] {
        &[("mc-ref", include_str!("../../presets/mc-ref.json"))]
    }

    fn adjust(cfg: &mut McConfig, _: u64, flags: &Flags) -> CliResult<()> {
        no_literal(Self::NAME, flags)?;
        let tau = cfg.params.time_constant();
        if let Some(dt) = flags.dt {
            if !(dt > 0.0) {
                return Err(CliError::invalid("--dt must be > 0"));
            }
            cfg.steps_per_time_constant = (tau / dt).round().max(1.0) as usize;
        }
        if let Some(t) = flags.t_end {
            cfg.time_constants = t / tau;
        }
        Ok(())
    }

    fn run(cfg: &McConfig, _: u64, _: &Flags) -> CliResult<Artifacts> {
        let p = cfg.params.with_initial_charge(cfg.q0)?;
        let tau = p.time_constant();
        let mut tr = mc_simulate(&p, cfg.q0, &cfg.integrator())?;
        let exact: Vec<f64> = tr.times().into_iter().map(|t| mc_analytic(t, &p)).collect::<Result<_, _>>()?;
        let q = tr.require("q")?;
        let worst = (0..tr.len())
            .filter(|&k| tr.time(k) > 5.0 * tau)
            .map(|k| (q[k] - exact[k]).abs() / exact[k])
            .fold(0.0, f64::max);
        tr.push_channel("q_closed_form", exact)?;
        let mut a = Artifacts::default();
        a.file("trace.csv", tr.to_csv_string());
        a.metric("time_constant_s", tau);
        a.metric("c1", p.c1);
        a.metric("max_rel_error_after_5tau", worst);
        a.say(format!("closed form vs ODE after 5 r_on C: max relative error {worst:.3e}"));
        a.check(worst < 0.01, || format!("closed form differs from the ODE by {worst:.3e}"));
        Ok(a)
    }
}

pub struct Amoeba;

impl Experiment for Amoeba {
    const NAME: &'static str = "amoeba";
    type Config = AmoebaConfig;

    fn presets() -> &'static [(&'static str, &'static str)] {
        &[("amoeba-fig", include_str!("../../presets/amoeba-fig.json"))]
    }

    fn adjust(cfg: &mut AmoebaConfig, _: u64, flags: &Flags) -> CliResult<()> {
        no_literal(Self::NAME, flags)?;
        override_integrator(&mut cfg.integrator, flags)
    }

    fn run(cfg: &AmoebaConfig, _: u64, _: &Flags) -> CliResult<Artifacts> {
        let tr = amoeba_simulate(&cfg.params, &cfg.init, &cfg.schedule, &cfg.integrator)?;
        let settling = amoeba_settling(&tr, &cfg.schedule, &cfg.params, 1e-3)?;
        let m = tr.require("m")?;
        let (lo, hi) = m.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
        let mut a = Artifacts::default();
        a.file("trace.csv", tr.to_csv_string());
        let mut rows = Vec::new();
        for (k, s) in settling.iter().enumerate() {
            let after = s.settled_at.map(|t| t - s.segment_start);
            a.metric(format!("segment_{k}_settled_after"), after.map_or("never".into(), |t| t.to_string()));
            a.say(match after {
                Some(t) => format!("stimulus {k} (from t = {}): settled after {t:.1}", s.segment_start),
                None => format!("stimulus {k} (from t = {}): not settled, final rate {:.3e}", s.segment_start, s.final_rate),
            });
            rows.push(vec![
                s.segment_start.to_string(),
                after.map_or(String::new(), |t| t.to_string()),
                s.final_rate.to_string(),
            ]);
        }
        a.file("settling.csv", csv(&["segment_start", "settled_after", "final_rate"], &rows));
        a.metric("m_min", lo);
        a.metric("m_max", hi);
        let (r1, r2) = (cfg.params.dev.r1, cfg.params.dev.r2);
        a.check(lo >= r1 && hi <= r2, || format!("M left [{r1}, {r2}]"));
        Ok(a)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantConfig {
    pub params: PlantParams<f64>,
    pub drive: DriveSignal<f64>,
    pub integrator: IntegratorSpec<f64>,
}

pub struct Plant;

impl Experiment for Plant {
    const NAME: &'static str = "plant";
    type Config = PlantConfig;

    fn presets() -> &'static [(&'static str, &'static str)] {
        &[
            ("plant-exp", include_str!("../../presets/plant-exp.json")),
            ("plant-rc", include_str!("../../presets/plant-rc.json")),
        ]
    }

    fn adjust(cfg: &mut PlantConfig, _: u64, flags: &Flags) -> CliResult<()> {
        no_literal(Self::NAME, flags)?;
        override_integrator(&mut cfg.integrator, flags)
    }

    fn run(cfg: &PlantConfig, _: u64, _: &Flags) -> CliResult<Artifacts> {
        let tr = plant_simulate(&cfg.params, &cfg.drive, &cfg.integrator)?;
        let mut a = Artifacts::default();
        let peak = max_abs(tr.require("i")?);
        let last = *tr.require("i_m")?.last().expect("trace is never empty");
        a.file("trace.csv", tr.to_csv_string());
        a.metric("peak_current", peak);
        a.metric("final_memristor_current", last);
        a.say(format!("peak current {peak:.4e}, final memristor current {last:.4e}"));
        Ok(a)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HhConfig {
    #[serde(default)]
    pub params: HhParams<f64>,
    pub drive: DriveSignal<f64>,
    pub w0: [f64; 3],
    pub integrator: IntegratorSpec<f64>,
}

pub struct Hh;

impl Experiment for Hh {
    const NAME: &'static str = "hh";
    type Config = HhConfig;

    fn presets() -> &'static [(&'static str, &'static str)] {
        &[("hh-clamp", include_str!("../../presets/hh-clamp.json"))]
    }

    fn adjust(cfg: &mut HhConfig, _: u64, flags: &Flags) -> CliResult<()> {
        no_literal(Self::NAME, flags)?;
        override_integrator(&mut cfg.integrator, flags)
    }

    fn run(cfg: &HhConfig, _: u64, _: &Flags) -> CliResult<Artifacts> {
        let tr = hh_simulate(&cfg.params, &cfg.drive, cfg.w0, &cfg.integrator)?;
        let mut a = Artifacts::default();
        let last = tr.last_row();
        for (k, name) in tr.names().iter().enumerate() {
            a.metric(format!("final_{name}"), last[k]);
        }
        a.say(format!("final gates w1 = {:.4}, w2 = {:.4}, w3 = {:.4}", last[0], last[1], last[2]));
        a.file("trace.csv", tr.to_csv_string());
        Ok(a)
    }
}
