use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::devices::HpParams;
use crate::error::{Error, Result};
use crate::linalg::eigenvalues;
use crate::network::graph::{random_graph, CircuitGraph};
use crate::network::dynamics::{linearize, simulate_network, NetworkDrive, JACOBIAN_STEP};
use crate::network::projector::cycle_projector;
use crate::network::spectral::{fit_relaxation_exponent, log_grid};
use crate::scalar::Scalar;
use crate::sim::{spectrum_fit, IntegratorSpec, Window};

/// Random-network relaxation experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct SocConfig<T> {
    pub nodes: usize,
    pub edges: usize,
    pub hp: HpParams<T>,
    /// Series source voltages are drawn from `U[-source_range, source_range]`.
    pub source_range: T,
    pub integrator: IntegratorSpec<T>,
    pub steady_tol: T,
    pub seed: u64,
}

impl SocConfig<f64> {
    /// 40 nodes, 100 edges, `r_off / r_on = 11`, no drift.
    pub fn preset() -> Self {
        SocConfig {
            nodes: 40,
            edges: 100,
            hp: HpParams { alpha: 0.0, beta: 1.0, r_on: 1.0, r_off: 11.0, polarity: Default::default() },
            source_range: 1.0,
            integrator: IntegratorSpec::euler(0.02, 120.0),
            steady_tol: 1e-6,
            seed: 1,
        }
    }
}

/// Fits for one branch of the linearized spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchFit<T> {
    pub modes: usize,
    pub rate_min: T,
    pub rate_max: T,
    /// Exponent of `<w(t)> ~ t^gamma` between the slowest and fastest time scales.
    pub gamma: T,
    pub gamma_r2: T,
    /// Periodogram slope of `<w(t)>` over `[f_c, 10 f_c]`, `f_c = rate_max / 2 pi`.
    pub slope: T,
    /// Periodogram slope between the two corner frequencies, when resolvable.
    pub in_band_slope: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SocReport<T> {
    /// Decaying modes (`Re lambda < 0`), relaxation towards `w = 0`.
    pub negative: BranchFit<T>,
    /// Growing modes after `w -> 1 - w`, when there are any.
    pub positive: Option<BranchFit<T>>,
    pub steady_at: Option<T>,
    pub final_rate: T,
}

const R2_GATE: f64 = 0.9;
const FIT_POINTS: usize = 60;
/// Rate spreads narrower than this use a fixed window around the geometric mean.
const MIN_SPREAD: f64 = 10.0;
const NARROW_DECADES: f64 = 1.5;
const SAMPLES_PER_CORNER: f64 = 80.0;
const MAX_SAMPLES: usize = 1 << 20;
/// Modes with `|Re lambda|` below this fraction of the spectral radius count as zero.
const ZERO_MODE_CUT: f64 = 1e-6;

/// Relaxation `sum_k weight * exp(-rate_k t)` for positive decay rates: fits
/// its time exponent and its power-spectrum slope.
pub fn relaxation_branch<T: Scalar>(rates: &[T], weight: T) -> Result<BranchFit<T>> {
    if rates.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, found: 0 });
    }
    if rates.iter().any(|&r| !(r > T::zero()) || !r.is_finite_val()) {
        return Err(Error::invalid("rates", "must be finite and > 0"));
    }
    let rate_min = rates.iter().fold(rates[0], |m, &r| m.min(r));
    let rate_max = rates.iter().fold(rates[0], |m, &r| m.max(r));
    let signal = |t: T| rates.iter().fold(T::zero(), |a, &r| a + weight * (-r * t).exp());

    let (t_lo, t_hi) = if rate_max / rate_min >= T::lit(MIN_SPREAD) {
        (T::one() / rate_max, T::one() / rate_min)
    } else {
        let centre = T::one() / (rate_min * rate_max).sqrt();
        let half = T::lit(10f64.powf(NARROW_DECADES / 2.0));
        (centre / half, centre * half)
    };
    let ts = log_grid(t_lo, t_hi, FIT_POINTS);
    let ys: Vec<T> = ts.iter().map(|&t| signal(t)).collect();
    let fit = fit_relaxation_exponent(&ts, &ys, T::lit(R2_GATE))?;

    let f_c = rate_max / T::two_pi();
    let dt = T::one() / (T::lit(SAMPLES_PER_CORNER) * f_c);
    let wanted = (T::lit(10.0) / (rate_min * dt)).to_f64_lossy().ceil() as usize;
    let n = wanted.next_power_of_two().clamp(crate::sim::spectrum::MIN_SAMPLES, MAX_SAMPLES);
    let mut x = vec![T::zero(); n];
    for &r in rates {
        let step = (-r * dt).exp();
        let mut v = weight;
        for s in x.iter_mut() {
            *s += v;
            v *= step;
        }
    }
    let slope = spectrum_fit(&x, dt, (f_c, T::lit(10.0) * f_c), Window::Rectangular)?.slope;
    let in_band_slope = if rate_max / rate_min >= T::lit(MIN_SPREAD) {
        spectrum_fit(&x, dt, (rate_min / T::two_pi(), f_c), Window::Rectangular).ok().map(|f| f.slope)
    } else {
        None
    };
    Ok(BranchFit { modes: rates.len(), rate_min, rate_max, gamma: fit.slope, gamma_r2: fit.r2, slope, in_band_slope })
}

/// Drives `g` with DC series sources `series` (volts) to a fixed point,
/// linearizes there and fits both branches of the relaxation.
///
/// Memories are taken as randomly initialized, `<w0> = 1/2`, so each mode
/// contributes `1/(2N)` to `<w(t)>`. Complex modes enter through their decay
/// rate `-Re lambda`.
pub fn soc_analyze<T: Scalar>(
    g: &CircuitGraph<T>,
    series: &[T],
    hp: &HpParams<T>,
    spec: &IntegratorSpec<T>,
    steady_tol: T,
) -> Result<SocReport<T>> {
    let run = simulate_network(g, &NetworkDrive::dc(series.to_vec()), hp, spec, Some(steady_tol))?;
    let omega = cycle_projector(g)?;
    let s: Vec<T> = series.iter().map(|&v| v / hp.r_on).collect();
    let a = linearize(&omega, hp, &run.final_state(), &s, T::lit(JACOBIAN_STEP))?;
    let lambda = eigenvalues(&a)?;
    let n = lambda.len();
    let weight = T::one() / T::lit(2.0 * n as f64);
    // the kernel of the projector leaves exactly-zero modes; finite
    // differences smear them to about 1e-9 relative
    let radius = lambda.iter().fold(T::zero(), |m, z| m.max(z.re.abs()));
    let cut = radius * T::lit(ZERO_MODE_CUT);
    let neg: Vec<T> = lambda.iter().filter(|z| z.re < -cut).map(|z| -z.re).collect();
    let pos: Vec<T> = lambda.iter().filter(|z| z.re > cut).map(|z| z.re).collect();
    let negative = relaxation_branch(&neg, weight)?;
    let positive = if pos.is_empty() { None } else { relaxation_branch(&pos, weight).ok() };
    Ok(SocReport { negative, positive, steady_at: run.steady_at, final_rate: run.final_rate })
}

/// [`soc_analyze`] on a seeded random graph with uniform random sources.
pub fn soc_experiment<T: Scalar>(cfg: &SocConfig<T>) -> Result<SocReport<T>> {
    cfg.hp.validate()?;
    if !(cfg.source_range > T::zero()) {
        return Err(Error::invalid("source_range", "must be > 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let g: CircuitGraph<T> = random_graph(cfg.nodes, cfg.edges, &mut rng)?;
    let a = cfg.source_range.to_f64_lossy();
    let series: Vec<T> = (0..cfg.edges).map(|_| T::lit(rng.random_range(-a..a))).collect();
    soc_analyze(&g, &series, &cfg.hp, &cfg.integrator, cfg.steady_tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_memristor_has_no_power_law() {
        let g = CircuitGraph::<f64>::memristive(1, &[(0, 0)], 0.5).unwrap();
        let hp = HpParams::new(0.0, 1.0, 1.0, 11.0).unwrap();
        let r = soc_analyze(&g, &[-1.0], &hp, &IntegratorSpec::euler(0.02, 50.0), 1e-6);
        assert!(matches!(r, Err(Error::FitRejected { .. })), "{r:?}");
    }

    #[test]
    fn uniform_rate_density_gives_inverse_time() {
        let rates: Vec<f64> = (1..=400).map(|k| k as f64 * 0.05).collect();
        let b = relaxation_branch(&rates, 1.0 / 800.0).unwrap();
        assert!((b.gamma + 1.0).abs() < 0.3, "{}", b.gamma);
        assert!((b.slope + 2.0).abs() < 0.3, "{}", b.slope);
    }

    #[test]
    fn empty_branch_errors() {
        assert!(relaxation_branch::<f64>(&[], 0.5).is_err());
    }
}
