//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use memnet::circuits::{amoeba_settling, amoeba_simulate, lambert_w, mc_analytic, mc_simulate};
use memnet::crossbar::{
    energy_estimates, nodal_oracle, program_matrix, read_bit, read_mvm, storage_device, storage_pulse, switching_time,
    write_pulse, apply_update, Crossbar, EnergyParams, UpdateRule,
};
use memnet::devices::{hp_analytic_w, hp_resistance, hp_rhs, simulate_hp, HpDrive, HpParams, WindowSpec};
use memnet::learning::{
    lca_simulate, lif_response, linear_convolution_oracle, rc_run, Encoder, LcaProblem, Reservoir, ReservoirDynamics,
};
use memnet::network::{
    cycle_projector, memnet_rhs, random_graph, random_unique_maze, soc_experiment, solve_maze, CircuitGraph, MazeConfig,
    SocConfig,
};
use memnet::presets::{hysteresis_sweep, AmoebaConfig, HysteresisConfig, McConfig};
use memnet::sim::{integrate_with, DriveSignal, IntegratorSpec};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

type Check = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn hysteresis() -> Check {
    let cfg = HysteresisConfig::figure();
    let loops = hysteresis_sweep(&cfg).map_err(err)?;
    for l in &loops {
        let (v, i) = (l.trace.require("v").map_err(err)?, l.trace.require("i").map_err(err)?);
        for (&vk, &ik) in v.iter().zip(i) {
            ensure(vk.abs() >= 1e-9 || ik.abs() < 1e-9, || format!("f = {}: I = {ik} at V = {vk}", l.frequency))?;
        }
    }
    ensure(loops.windows(2).all(|p| p[1].area < p[0].area), || {
        format!("areas not decreasing: {:?}", loops.iter().map(|l| l.area).collect::<Vec<_>>())
    })?;
    let last = loops.last().ok_or("no frequencies")?;
    let (v, i) = (last.trace.require("v").map_err(err)?, last.trace.require("i").map_err(err)?);
    let n = v.len() as f64;
    let (mv, mi) = (v.iter().sum::<f64>() / n, i.iter().sum::<f64>() / n);
    let sxy: f64 = v.iter().zip(i).map(|(a, b)| (a - mv) * (b - mi)).sum();
    let sxx: f64 = v.iter().map(|a| (a - mv) * (a - mv)).sum();
    let slope = sxy / sxx;
    let dev = v.iter().zip(i).map(|(a, b)| (b - (mi + slope * (a - mv))).abs()).fold(0.0, f64::max);
    let peak = i.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    ensure(dev < 0.02 * peak, || format!("line deviation {:.3}% of peak", 100.0 * dev / peak))?;
    Ok(format!(
        "areas {:?}, line deviation {:.3}% at {} Hz",
        loops.iter().map(|l| format!("{:.3e}", l.area)).collect::<Vec<_>>(),
        100.0 * dev / peak,
        last.frequency
    ))
}

fn analytic_equivalence() -> Check {
    let hp = HysteresisConfig::figure().hp;
    let (amp, f, w0) = (0.2, 1.0, 0.5);
    let drive = HpDrive::Voltage(DriveSignal::sine(amp, f));
    let error = |dt: f64| -> Result<f64, String> {
        let tr = simulate_hp(&hp, &WindowSpec::default(), &drive, w0, &IntegratorSpec::rk4(dt, 1.0 / f)).map_err(err)?;
        let w = tr.require("w").map_err(err)?;
        let mut worst = 0.0f64;
        for (k, &wn) in w.iter().enumerate() {
            let t = tr.time(k);
            let flux = amp * (1.0 - (2.0 * std::f64::consts::PI * f * t).cos()) / (2.0 * std::f64::consts::PI * f);
            let wa = hp_analytic_w(flux, w0, &hp).map_err(err)?;
            worst = worst.max((wn - wa).abs() / wa.abs());
        }
        Ok(worst)
    };
    let (coarse, fine) = (error(0.02)?, error(0.01)?);
    ensure(fine < 1e-6, || format!("max relative error {fine:.2e}"))?;
    ensure(coarse / fine >= 8.0, || format!("halving ratio {:.2}", coarse / fine))?;
    Ok(format!("max relative error {fine:.2e}, halving ratio {:.1}", coarse / fine))
}

fn lambert_volatility() -> Check {
    let cfg = McConfig::reference();
    let p = cfg.params.with_initial_charge(cfg.q0).map_err(err)?;
    let tau = p.time_constant();
    let tr = mc_simulate(&p, cfg.q0, &cfg.integrator()).map_err(err)?;
    let q = tr.require("q").map_err(err)?;
    let mut worst = 0.0f64;
    for (k, &qk) in q.iter().enumerate() {
        let t = tr.time(k);
        if t > 5.0 * tau {
            let a = mc_analytic(t, &p).map_err(err)?;
            worst = worst.max((a - qk).abs() / a);
        }
    }
    ensure(worst < 0.01, || format!("closed form vs ODE {worst:.2e}"))?;
    let mut rc = cfg.params;
    rc.hp.beta = 1e12;
    let rc = rc.with_initial_charge(cfg.q0).map_err(err)?;
    let mut rc_worst = 0.0f64;
    for k in 0..=300 {
        let t = 5.0 * tau + k as f64 * 15.0 * tau / 300.0;
        let want = cfg.q0 * (-t / tau).exp();
        rc_worst = rc_worst.max((mc_analytic(t, &rc).map_err(err)? - want).abs() / want);
    }
    ensure(rc_worst < 1e-3, || format!("large-beta limit off RC by {rc_worst:.2e}"))?;
    let mut identity = 0.0f64;
    for k in 0..=2000 {
        let x = -1.0 / std::f64::consts::E + 1e-6 + (k as f64 / 2000.0).powi(3) * 1e3;
        let w = lambert_w(x).map_err(err)?;
        identity = identity.max((w * w.exp() - x).abs() / x.abs().max(1e-300));
    }
    ensure(identity < 1e-12, || format!("W e^W identity off by {identity:.2e}"))?;
    Ok(format!("ODE {worst:.1e}, RC limit {rc_worst:.1e}, identity {identity:.1e}"))
}

fn storage() -> Check {
    let hp = storage_device();
    let pulse = storage_pulse(&hp).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut x = Crossbar::uniform(8, 8, 0.5 * (hp.r_on + hp.r_off), 100.0, hp).map_err(err)?;
    let pattern: Vec<Vec<bool>> = (0..8).map(|_| (0..8).map(|_| rng.random()).collect()).collect();
    for round in 0..2 {
        for i in 0..8 {
            for j in 0..8 {
                let bit = pattern[i][j] ^ (round == 1);
                let p = if bit { pulse } else { pulse.reversed() };
                x = write_pulse(&x, i, j, &p).map_err(err)?;
            }
        }
        for i in 0..8 {
            for j in 0..8 {
                let mut cell = x.clone();
                for read in 0..100 {
                    let r = read_bit(&cell, i, j, &pulse).map_err(err)?;
                    if r.bit != (pattern[i][j] ^ (round == 1)) {
                        return Err(format!("cell ({i}, {j}) read {read} returned {}", r.bit));
                    }
                    cell = r.crossbar;
                }
            }
        }
    }
    let tau = switching_time(&hp, -1.0).map_err(err)?;
    let out = integrate_with(
        |_, w: &[f64], dw: &mut [f64]| dw[0] = 1.0 / (hp.beta * hp_resistance(w[0], &hp)),
        &[0.0],
        &IntegratorSpec::rk4(tau / 20_000.0, 2.0 * tau),
        |_, _| {},
        |s| s.state[0] >= 1.0,
    )
    .map_err(err)?;
    let t = out.stopped_at.ok_or("ODE never reached w = 1")?;
    let rel = (t - tau).abs() / tau;
    ensure(rel < 0.05, || format!("switching time {t:.3e} vs {tau:.3e}"))?;
    Ok(format!("0 bit errors over 2 patterns x 64 cells x 100 reads, switching time off by {:.2}%", 100.0 * rel))
}

fn crossbar_mvm() -> Check {
    let hp = HpParams::new(0.0, 1e-3, 100.0, 16e3).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (r, c) = (rng.random_range(1..=8), rng.random_range(1..=8));
        let x = Crossbar::random(r, c, rng.random_range(50.0..2000.0), hp, &mut rng).map_err(err)?;
        let xi: Vec<f64> = (0..c).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a = read_mvm(&x, &xi).map_err(err)?;
        let b = nodal_oracle(&x, &xi).map_err(err)?;
        let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        worst = worst.max(a.iter().zip(&b).fold(0.0, |m, (p, q)| m.max((p - q).abs() / scale)));
    }
    ensure(worst < 1e-9, || format!("MVM vs nodal {worst:.2e}"))?;
    let mut residual = 0.0f64;
    for _ in 0..20 {
        let (r, c) = (rng.random_range(1..=8), rng.random_range(1..=8));
        let r_out = rng.random_range(50.0..2000.0);
        let target = Crossbar::random(r, c, r_out, hp, &mut rng).map_err(err)?.transfer_matrix();
        let start = Crossbar::uniform(r, c, 0.5 * (hp.r_on + hp.r_off), r_out, hp).map_err(err)?;
        let out = program_matrix(&start, &target).map_err(err)?;
        residual = residual.max((out.transfer_matrix() - target).amax());
    }
    ensure(residual < 1e-6, || format!("programming residual {residual:.2e}"))?;
    Ok(format!("MVM relative error {worst:.1e}, programming residual {residual:.1e}"))
}

fn amoeba() -> Check {
    let cfg = AmoebaConfig::figure();
    let tr = amoeba_simulate(&cfg.params, &cfg.init, &cfg.schedule, &cfg.integrator).map_err(err)?;
    let m = tr.require("m").map_err(err)?;
    ensure(m.iter().all(|&x| (3.0..=20.0).contains(&x)), || "M left [3, 20]".into())?;
    let s = amoeba_settling(&tr, &cfg.schedule, &cfg.params, 1e-3).map_err(err)?;
    let times: Vec<f64> = s
        .iter()
        .map(|x| x.settled_at.map(|t| t - x.segment_start).ok_or(format!("segment at {} never settles", x.segment_start)))
        .collect::<Result<_, _>>()?;
    Ok(format!("settled {:?} after each stimulus change", times.iter().map(|t| format!("{t:.1}")).collect::<Vec<_>>()))
}

fn maze() -> Check {
    let cfg = MazeConfig::preset();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut ok = 0;
    let mut min_contrast = f64::INFINITY;
    for k in 0..20 {
        let m = random_unique_maze(4, &mut rng).map_err(err)?;
        let s = solve_maze(&m, &cfg).map_err(|e| format!("maze {k}: {e}"))?;
        ensure(s.path == m.shortest_path(), || format!("maze {k}: path differs from BFS"))?;
        ensure(s.contrast > 1.0, || format!("maze {k}: contrast {}", s.contrast))?;
        min_contrast = min_contrast.min(s.contrast);
        ok += 1;
    }
    Ok(format!("{ok}/20 match BFS, minimum contrast {min_contrast:.2}"))
}

fn soc() -> Check {
    let cfg = SocConfig::preset();
    let r = soc_experiment(&cfg).map_err(err)?;
    let b = r.negative;
    ensure((b.gamma + 1.0).abs() <= 0.3, || format!("gamma {:.3}", b.gamma))?;
    let want = -(1.0 - b.gamma);
    ensure((b.slope - want).abs() <= 0.3, || format!("slope {:.3} vs {want:.3}", b.slope))?;
    // informational seed sweep
    let mut pass = 0;
    let seeds = 20;
    for seed in 1..=seeds {
        if let Ok(rs) = soc_experiment(&SocConfig { seed, ..cfg.clone() }) {
            let g = rs.negative.gamma;
            if (g + 1.0).abs() <= 0.3 && (rs.negative.slope + 1.0 - g).abs() <= 0.3 {
                pass += 1;
            }
        }
    }
    Ok(format!(
        "N = {} memristors, gamma {:.3} (R^2 {:.3}), slope {:.3}; {pass}/{seeds} seeds within tolerance",
        cfg.edges, b.gamma, b.gamma_r2, b.slope
    ))
}

fn network_reduction() -> Check {
    let hp = HpParams::new(0.2, 2.0, 1.0, 7.0).map_err(err)?;
    let g = CircuitGraph::memristive(1, &[(0, 0)], 0.5).map_err(err)?;
    let omega = cycle_projector(&g).map_err(err)?;
    let mut worst = 0.0f64;
    for k in 0..=20 {
        let w = k as f64 / 20.0;
        for volts in [-1.5, -0.3, 0.0, 0.4, 2.0] {
            let net = memnet_rhs(&[w], &[volts / hp.r_on], &omega, &hp).map_err(err)?[0];
            let dev = hp_rhs(w, volts / hp_resistance(w, &hp), &hp, &WindowSpec::default());
            worst = worst.max((net - dev).abs());
        }
    }
    ensure(worst < 1e-12, || format!("one-edge reduction off by {worst:.2e}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut defect = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(2..12);
        let e = rng.random_range(n - 1..=(n * (n - 1) / 2).min(3 * n));
        let g: CircuitGraph<f64> = random_graph(n, e, &mut rng).map_err(err)?;
        let (asym, idem) = cycle_projector(&g).map_err(err)?.defects();
        defect = defect.max(asym).max(idem);
    }
    ensure(defect < 1e-10, || format!("projector defect {defect:.2e}"))?;
    Ok(format!("reduction error {worst:.1e}, projector defect {defect:.1e}"))
}

fn learning() -> Check {
    // Sanger against the sample covariance's leading eigenvector
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let (nx, ny) = (Normal::new(0.0, 2.0).map_err(err)?, Normal::new(0.0, 1.0).map_err(err)?);
    let samples: Vec<DVector<f64>> = (0..500).map(|_| DVector::from_vec(vec![nx.sample(&mut rng), ny.sample(&mut rng)])).collect();
    let mut w = DMatrix::from_row_slice(1, 2, &[0.3, 0.8]);
    for x in &samples {
        w = apply_update(&w, &UpdateRule::Sanger { eta: 0.005 }, x, None).map_err(err)?;
    }
    let cov = samples.iter().fold(DMatrix::zeros(2, 2), |c, x| c + x * x.transpose()) / samples.len() as f64;
    let eig = cov.symmetric_eigen();
    let lead = eig.eigenvectors.column(eig.eigenvalues.imax()).into_owned();
    let row = w.row(0).transpose();
    let angle = (row.dot(&lead).abs() / row.norm()).min(1.0).acos().to_degrees();
    ensure(angle < 5.0, || format!("Sanger angle {angle:.2} deg"))?;

    // LCA on an orthonormal dictionary
    let phi = DMatrix::<f64>::from_fn(6, 6, |_, _| rng.random_range(-1.0..1.0)).qr().q();
    let coef = DVector::from_fn(6, |_, _| rng.random_range(0.1..2.0));
    let x = &phi * &coef;
    let lca = LcaProblem::new(phi, 0.0, 0.01).map_err(err)?;
    let res = lca_simulate(&lca, &x, &IntegratorSpec::rk4(1e-4, 1.0)).map_err(err)?;
    let lca_err = (&res.a - &coef).amax();
    ensure(res.converged && lca_err < 1e-6, || format!("LCA error {lca_err:.2e}, converged {}", res.converged))?;
    let energy = res.trace.require("energy").map_err(err)?;
    ensure(energy.windows(2).all(|p| p[1] <= p[0] + 1e-12), || "LCA energy increased".into())?;

    // LIF limits
    let (tau0, tau_rc, i_f) = (0.002f64, 0.02, 1.0);
    ensure(lif_response(i_f, tau0, tau_rc, i_f) == 0.0 && lif_response(0.3, tau0, tau_rc, i_f) == 0.0, || {
        "LIF fires at or below threshold".into()
    })?;
    let high = lif_response(1e12, tau0, tau_rc, i_f);
    ensure((high * tau0 - 1.0).abs() < 1e-9, || format!("LIF saturation {high}"))?;

    // linear reservoir against direct convolution
    let q = 6;
    let mut a = DMatrix::<f64>::from_fn(q, q, |_, _| rng.random_range(-0.4..0.4));
    for i in 0..q {
        a[(i, i)] -= 1.5;
    }
    let b = DMatrix::from_fn(q, 2, |_, _| rng.random_range(-1.0..1.0));
    let h = DMatrix::from_fn(4, q, |_, _| rng.random_range(-1.0..1.0));
    let r = Reservoir::new(Encoder::identity(), b, ReservoirDynamics::Linear { a }, h).map_err(err)?;
    let u = |t: f64| vec![(3.0 * t).sin(), 0.5 * (1.3 * t).cos() + 0.2];
    let (dt, steps) = (1e-3, 3000);
    let g = rc_run(&r, u, &IntegratorSpec::rk4(dt, dt * steps as f64)).map_err(err)?;
    let oracle = linear_convolution_oracle(&r, u, dt, steps).map_err(err)?;
    let rc_err = oracle
        .iter()
        .enumerate()
        .flat_map(|(k, o)| o.iter().enumerate().map(move |(c, &v)| (k, c, v)))
        .fold(0.0f64, |m, (k, c, v)| m.max((g.channels()[c][k] - v).abs()));
    ensure(rc_err < 1e-4, || format!("reservoir vs convolution {rc_err:.2e}"))?;
    Ok(format!("Sanger {angle:.2} deg, LCA {lca_err:.1e}, LIF max rate {high:.1}, reservoir {rc_err:.1e}"))
}

fn energy() -> Check {
    let hand = energy_estimates(&EnergyParams { p_err: (-1.0f64).exp(), l_bits: 2.0, n: 1.0, kt: 1.0 }).map_err(err)?;
    ensure(hand.e_gate == 2.0 && hand.e_dig == 24.0 && hand.e_memr == 4.0 / 24.0, || format!("{hand:?}"))?;
    let base = EnergyParams { p_err: 1e-6f64, l_bits: 8.0, n: 1.0, kt: 4.1e-21 };
    let e1 = energy_estimates(&base).map_err(err)?;
    for n in [2.0, 4.0, 8.0] {
        let e = energy_estimates(&EnergyParams { n, ..base }).map_err(err)?;
        ensure((e.e_dig / e1.e_dig - n).abs() < 1e-12 * n, || format!("e_dig at N = {n}"))?;
        ensure((e.e_memr / e1.e_memr - n * n).abs() < 1e-12 * n * n, || format!("e_memr at N = {n}"))?;
        ensure(e.e_gate == e1.e_gate, || "e_gate depends on N".into())?;
    }
    Ok("hand values exact, e_dig ~ N, e_memr ~ N^2 over N in {1, 2, 4, 8}".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("pinched hysteresis", 5, hysteresis),
        ("analytic-numeric equivalence", 1, analytic_equivalence),
        ("Lambert-W volatility", 1, lambert_volatility),
        ("write/read storage", 10, storage),
        ("crossbar MVM oracle", 5, crossbar_mvm),
        ("amoeba adaptation", 1, amoeba),
        ("maze shortest path", 30, maze),
        ("SOC spectrum", 60, soc),
        ("network reduction", 5, network_reduction),
        ("learning suite", 20, learning),
        ("energy formulas", 1, energy),
    ];
    let mut failed = 0;
    for (k, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = outcome.and_then(|d| {
            if took <= Duration::from_secs(*limit) {
                Ok(d)
            } else {
                Err(format!("{d}; took {:.2} s, limit {limit} s", took.as_secs_f64()))
            }
        });
        match outcome {
            Ok(d) => println!("PASS {:>2} {name} ({:.2} s): {d}", k + 1, took.as_secs_f64()),
            Err(e) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({:.2} s): {e}", k + 1, took.as_secs_f64());
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
