use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sim::trace::Trace;

/// Taper applied before the FFT.
///
/// `Hann` suits stationary signals. `Rectangular` suits one-sided transients
/// (relaxations), where a Hann taper suppresses the slowly decaying head of the
/// signal and steepens the fitted slope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    #[default]
    Hann,
    Rectangular,
}

/// One-sided periodogram; bin `k` sits at `k / (n dt)`.
#[derive(Debug, Clone)]
pub struct Periodogram<T> {
    pub freqs: Vec<T>,
    pub power: Vec<T>,
}

pub const MIN_SAMPLES: usize = 1024;

pub fn periodogram<T: Scalar>(x: &[T], dt: T, window: Window) -> Result<Periodogram<T>> {
    let n = x.len();
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, found: n });
    }
    let nf = T::lit(n as f64);
    let mut buf: Vec<Complex<T>> = x
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let w = match window {
                Window::Rectangular => T::one(),
                Window::Hann => {
                    let c = (T::two_pi() * T::lit(k as f64) / nf).cos();
                    T::lit(0.5) * (T::one() - c)
                }
            };
            Complex::new(v * w, T::zero())
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    let scale = dt / nf;
    let freqs = (0..=half).map(|k| T::lit(k as f64) / (nf * dt)).collect();
    let power = buf[..=half].iter().map(|c| c.norm_sqr() * scale).collect();
    Ok(Periodogram { freqs, power })
}

/// Ordinary least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit<T> {
    pub slope: T,
    pub intercept: T,
    pub r2: T,
    pub points: usize,
}

pub fn fit_power_law<T: Scalar>(xs: &[T], ys: &[T]) -> Result<PowerLawFit<T>> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch { expected: xs.len(), found: ys.len() });
    }
    let pts: Vec<(T, T)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > T::zero() && **y > T::zero())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::TooFewSamples { needed: 3, found: pts.len() });
    }
    let m = T::lit(pts.len() as f64);
    let mx = pts.iter().fold(T::zero(), |a, p| a + p.0) / m;
    let my = pts.iter().fold(T::zero(), |a, p| a + p.1) / m;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for &(x, y) in &pts {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == T::zero() {
        return Err(Error::Singular("all abscissae equal".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == T::zero() { T::one() } else { sxy * sxy / (sxx * syy) };
    Ok(PowerLawFit { slope, intercept: my - slope * mx, r2, points: pts.len() })
}

/// Fraction of band power above which the band is treated as one spectral line.
const LINE_FRACTION: f64 = 0.99;

/// Slope of the log-periodogram against log-frequency over `band`.
pub fn spectrum_fit<T: Scalar>(x: &[T], dt: T, band: (T, T), window: Window) -> Result<PowerLawFit<T>> {
    if x.len() < MIN_SAMPLES {
        return Err(Error::TooFewSamples { needed: MIN_SAMPLES, found: x.len() });
    }
    let nyquist = T::lit(0.5) / dt;
    let (lo, hi) = band;
    if !(lo > T::zero() && lo < hi && hi < nyquist) {
        return Err(Error::invalid("fit_band", format!("need 0 < f_lo < f_hi < {}", nyquist)));
    }
    let p = periodogram(x, dt, window)?;
    let idx: Vec<usize> = (0..p.freqs.len()).filter(|&k| p.freqs[k] >= lo && p.freqs[k] <= hi).collect();
    if idx.len() < 3 {
        return Err(Error::EmptyBand { f_lo: lo.to_f64_lossy(), f_hi: hi.to_f64_lossy() });
    }
    let total = idx.iter().fold(T::zero(), |a, &k| a + p.power[k]);
    if total > T::zero() && idx.len() > 5 {
        let peak = idx.iter().copied().max_by(|&a, &b| p.power[a].partial_cmp(&p.power[b]).unwrap()).unwrap();
        let near = idx
            .iter()
            .filter(|&&k| k + 2 >= peak && k <= peak + 2)
            .fold(T::zero(), |a, &k| a + p.power[k]);
        let fraction = (near / total).to_f64_lossy();
        if fraction > LINE_FRACTION {
            return Err(Error::SpectralLine { fraction });
        }
    }
    let fs: Vec<T> = idx.iter().map(|&k| p.freqs[k]).collect();
    let ps: Vec<T> = idx.iter().map(|&k| p.power[k]).collect();
    fit_power_law(&fs, &ps)
}

/// Power-spectrum exponent of one trace channel over `band` (Hz).
pub fn power_spectrum_exponent<T: Scalar>(tr: &Trace<T>, channel: &str, band: (T, T), window: Window) -> Result<T> {
    spectrum_fit(tr.require(channel)?, tr.dt(), band, window).map(|f| f.slope)
}
