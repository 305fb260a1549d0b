use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sim::{integrate_with, DriveSignal, IntegratorSpec, Trace};

/// Sign in front of the drive term of the memory equation.
///
/// `Standard` gives `dw/dt = alpha w - I/beta`: positive current lowers `w`
/// (towards `r_on`). `Reversed` flips the drive term, which is the convention
/// under which the closed-form solution carries `+ integral V dt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    #[default]
    Standard,
    Reversed,
}

impl Polarity {
    pub fn sign<T: Scalar>(self) -> T {
        match self {
            Polarity::Standard => T::one(),
            Polarity::Reversed => -T::one(),
        }
    }
}

/// Linear drift (TiO2) memristor.
///
/// Units: `alpha` 1/s, `beta` s^-1 A^-1 (so `i / beta` is a rate), resistances in ohms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HpParams<T> {
    #[serde(default)]
    pub alpha: T,
    pub beta: T,
    pub r_on: T,
    pub r_off: T,
    #[serde(default)]
    pub polarity: Polarity,
}

impl<T: Scalar> HpParams<T> {
    pub fn new(alpha: T, beta: T, r_on: T, r_off: T) -> Result<Self> {
        let p = HpParams { alpha, beta, r_on, r_off, polarity: Polarity::Standard };
        p.validate()?;
        Ok(p)
    }

    pub fn with_polarity(mut self, polarity: Polarity) -> Self {
        self.polarity = polarity;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (n, v) in [("alpha", self.alpha), ("beta", self.beta), ("r_on", self.r_on), ("r_off", self.r_off)] {
            if !v.is_finite_val() {
                return Err(Error::invalid(n, "must be finite"));
            }
        }
        if !(self.r_on > T::zero()) {
            return Err(Error::invalid("r_on", "must be > 0"));
        }
        if self.r_off < self.r_on {
            return Err(Error::invalid("r_off", "must be >= r_on"));
        }
        if self.alpha < T::zero() {
            return Err(Error::invalid("alpha", "must be >= 0"));
        }
        if !(self.beta > T::zero()) {
            return Err(Error::invalid("beta", "must be > 0"));
        }
        Ok(())
    }

    /// Relative resistance contrast `(r_off - r_on) / r_on`.
    pub fn xi(&self) -> T {
        (self.r_off - self.r_on) / self.r_on
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    #[default]
    None,
    Joglekar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub kind: WindowKind,
    #[serde(default = "one")]
    pub p: u32,
}

fn one() -> u32 {
    1
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec { kind: WindowKind::None, p: 1 }
    }
}

impl WindowSpec {
    pub fn joglekar(p: u32) -> Self {
        WindowSpec { kind: WindowKind::Joglekar, p }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::invalid("p", "window exponent must be >= 1"));
        }
        Ok(())
    }

    pub fn eval<T: Scalar>(&self, w: T) -> T {
        match self.kind {
            WindowKind::None => T::one(),
            WindowKind::Joglekar => joglekar_window(w, self.p),
        }
    }
}

/// `1 - (2w - 1)^(2p)`.
pub fn joglekar_window<T: Scalar>(w: T, p: u32) -> T {
    let x = T::lit(2.0) * w - T::one();
    T::one() - x.powi(2 * p as i32)
}

/// `R(w) = r_on (1 - w) + r_off w`.
pub fn hp_resistance<T: Scalar>(w: T, p: &HpParams<T>) -> T {
    p.r_on * (T::one() - w) + p.r_off * w
}

/// `dw/dt = alpha w - s F(w) i / beta`, with `s` the polarity sign.
pub fn hp_rhs<T: Scalar>(w: T, i: T, p: &HpParams<T>, win: &WindowSpec) -> T {
    p.alpha * w - p.polarity.sign::<T>() * win.eval(w) * i / p.beta
}

/// Closed-form non-volatile (`alpha = 0`, unwindowed) state after a voltage
/// flux `v_integral = integral_0^t V dt`.
///
/// Integrating `R(w) dw = -s V dt / beta` gives
/// `xi/2 w^2 + w = xi/2 w0^2 + w0 + phi` with `phi = -s v_integral / (beta r_on)`,
/// solved for the positive root. Written as `2c / (1 + sqrt(1 + 2 xi c))`, which
/// is exact and reduces to `w0 + phi` at `xi = 0`.
pub fn hp_analytic_w<T: Scalar>(v_integral: T, w0: T, p: &HpParams<T>) -> Result<T> {
    let xi = p.xi();
    let phi = -p.polarity.sign::<T>() * v_integral / (p.beta * p.r_on);
    let c = xi / T::lit(2.0) * w0 * w0 + w0 + phi;
    let disc = T::one() + T::lit(2.0) * xi * c;
    if disc < T::zero() {
        return Err(Error::Saturation { w: f64::NAN });
    }
    let w = T::lit(2.0) * c / (T::one() + disc.sqrt());
    let tol = T::lit(1e-12);
    if w < -tol || w > T::one() + tol {
        return Err(Error::Saturation { w: w.to_f64_lossy() });
    }
    Ok(w)
}

/// Volatile, unwindowed state under a prescribed current:
/// `w(t) = e^(alpha t) (w0 - (s/beta) integral_0^t e^(-alpha tau) i(tau) dtau)`,
/// with the integral evaluated by composite Simpson quadrature.
pub fn hp_volatile_analytic<T: Scalar>(i_signal: &DriveSignal<T>, w0: T, p: &HpParams<T>, t: T) -> T {
    if t == T::zero() {
        return w0;
    }
    let periods = (i_signal.frequency * t.abs()).to_f64_lossy();
    let mut n = (200.0 * periods).ceil().max(2000.0) as usize;
    n += n % 2;
    let h = t / T::lit(n as f64);
    let g = |tau: T| (-p.alpha * tau).exp() * i_signal.eval(tau);
    let mut s = g(T::zero()) + g(t);
    for k in 1..n {
        let wgt = if k % 2 == 1 { T::lit(4.0) } else { T::lit(2.0) };
        s += wgt * g(h * T::lit(k as f64));
    }
    let integral = s * h / T::lit(3.0);
    (p.alpha * t).exp() * (w0 - p.polarity.sign::<T>() * integral / p.beta)
}

/// What the source in series with the device imposes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HpDrive<T> {
    Voltage(DriveSignal<T>),
    Current(DriveSignal<T>),
}

/// Simulates a single driven device. Channels: `w, v, i, r`.
///
/// `w` is clamped to `[0, 1]` after every step. With a Joglekar window the
/// clamp only matters when a single step is large enough to overshoot.
pub fn simulate_hp<T: Scalar>(
    p: &HpParams<T>,
    win: &WindowSpec,
    drive: &HpDrive<T>,
    w0: T,
    spec: &IntegratorSpec<T>,
) -> Result<Trace<T>> {
    p.validate()?;
    win.validate()?;
    if !(w0 >= T::zero() && w0 <= T::one()) {
        return Err(Error::invalid("w0", "must lie in [0, 1]"));
    }
    let current = |t: T, w: T| match drive {
        HpDrive::Voltage(s) => s.eval(t) / hp_resistance(w, p),
        HpDrive::Current(s) => s.eval(t),
    };
    let out = integrate_with(
        |t, x: &[T], dx: &mut [T]| dx[0] = hp_rhs(x[0], current(t, x[0]), p, win),
        &[w0],
        spec,
        |_, x: &mut [T]| x[0] = x[0].clamp(T::zero(), T::one()),
        |_| false,
    )?;
    let tr = out.trace;
    let w = tr.channels()[0].clone();
    let times = tr.times();
    let r: Vec<T> = w.iter().map(|&x| hp_resistance(x, p)).collect();
    let i: Vec<T> = times.iter().zip(&w).map(|(&t, &x)| current(t, x)).collect();
    let v: Vec<T> = match drive {
        HpDrive::Voltage(s) => times.iter().map(|&t| s.eval(t)).collect(),
        HpDrive::Current(_) => i.iter().zip(&r).map(|(&i, &r)| i * r).collect(),
    };
    Trace::new(
        tr.t0(),
        tr.dt(),
        ["w", "v", "i", "r"].iter().map(|s| s.to_string()).collect(),
        vec![w, v, i, r],
    )
}

/// Thin-film material constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilmParams<T> {
    /// Dopant mobility, m^2 / (V s).
    pub mu_e: T,
    /// Film thickness, m.
    pub d: T,
    pub r_on: T,
}

impl<T: Scalar> FilmParams<T> {
    pub fn validate(&self) -> Result<()> {
        for (n, v) in [("mu_e", self.mu_e), ("d", self.d), ("r_on", self.r_on)] {
            if !(v > T::zero()) || !v.is_finite_val() {
                return Err(Error::invalid(n, "must be finite and > 0"));
            }
        }
        Ok(())
    }

    /// Coefficient of `q` in `R(q) ~ r_off (1 - mu_e r_on q / d^2)`.
    pub fn charge_coefficient(&self) -> T {
        self.mu_e * self.r_on / (self.d * self.d)
    }
}

/// `beta = d / (mu_e r_on)`.
pub fn beta_from_film<T: Scalar>(f: &FilmParams<T>) -> T {
    f.d / (f.mu_e * f.r_on)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{integrate, IntegratorSpec};
    use proptest::prelude::*;

    fn fig() -> HpParams<f64> {
        HpParams::new(0.0, 3e-4, 1e3, 6e3).unwrap()
    }

    #[test]
    fn rhs_examples() {
        let win = WindowSpec::default();
        assert_eq!(hp_rhs(0.3, 0.0, &fig(), &win), 0.0);
        let mut p = fig();
        p.alpha = 0.1;
        assert!((hp_rhs(0.2, 0.0, &p, &win) - 0.02).abs() < 1e-15);
        assert!((hp_rhs(0.5, 3e-4, &fig(), &win) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn resistance_examples() {
        let p = fig();
        assert_eq!(hp_resistance(0.0, &p), 1e3);
        assert_eq!(hp_resistance(1.0, &p), 6e3);
        assert_eq!(hp_resistance(0.5, &p), 3.5e3);
    }

    #[test]
    fn window_examples() {
        assert_eq!(joglekar_window(0.0, 3), 0.0);
        assert_eq!(joglekar_window(1.0, 3), 0.0);
        assert_eq!(joglekar_window(0.5, 4), 1.0);
        assert!((joglekar_window(0.25, 1) - 0.75f64).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        assert!(HpParams::new(0.0, 1.0, 2.0, 1.0).is_err());
        assert!(HpParams::new(-1.0, 1.0, 1.0, 2.0).is_err());
        assert!(HpParams::new(0.0, 0.0, 1.0, 2.0).is_err());
        assert!(HpParams::new(0.0, 1.0, 0.0, 2.0).is_err());
    }

    #[test]
    fn analytic_zero_flux() {
        for w0 in [0.0, 0.3, 0.8, 1.0] {
            assert!((hp_analytic_w(0.0, w0, &fig()).unwrap() - w0).abs() < 1e-15);
        }
    }

    #[test]
    fn analytic_matches_rk4_dc() {
        for pol in [Polarity::Standard, Polarity::Reversed] {
            let p = fig().with_polarity(pol);
            let v = 0.2;
            let w0 = 0.5;
            let spec = IntegratorSpec::rk4(1e-4, 0.5);
            let tr = integrate(
                |_, x: &[f64], dx: &mut [f64]| dx[0] = hp_rhs(x[0], v / hp_resistance(x[0], &p), &p, &WindowSpec::default()),
                &[w0],
                &spec,
            )
            .unwrap();
            let w_num = *tr.channels()[0].last().unwrap();
            let w_an = hp_analytic_w(v * 0.5, w0, &p).unwrap();
            assert!((w_num - w_an).abs() / w_an < 1e-6, "{pol:?}: {w_num} vs {w_an}");
        }
    }

    #[test]
    fn analytic_saturation() {
        assert!(matches!(hp_analytic_w(10.0, 0.5, &fig()), Err(Error::Saturation { .. })));
        assert!(matches!(hp_analytic_w(-10.0, 0.5, &fig()), Err(Error::Saturation { .. })));
    }

    #[test]
    fn analytic_linear_when_no_contrast() {
        let p = HpParams::<f64>::new(0.0, 2.0, 5.0, 5.0).unwrap();
        let w = hp_analytic_w(-1.0, 0.2, &p).unwrap();
        assert!((w - (0.2 + 1.0 / 10.0)).abs() < 1e-15);
    }

    #[test]
    fn volatile_decay() {
        let p = HpParams::new(0.3, 1.0, 1.0, 10.0).unwrap();
        let w = hp_volatile_analytic(&DriveSignal::zero(), 0.1, &p, 2.0);
        assert!((w - 0.1 * (0.6f64).exp()).abs() < 1e-14);
        assert_eq!(hp_volatile_analytic(&DriveSignal::dc(1.0), 0.4, &p, 0.0), 0.4);
    }

    #[test]
    fn volatile_matches_rk4() {
        let p = HpParams::<f64>::new(0.5, 10.0, 1.0, 10.0).unwrap();
        for sig in [DriveSignal::dc(0.3), DriveSignal::sine(2.0, 1.5)] {
            let spec = IntegratorSpec::rk4(1e-3, 1.0);
            let tr = simulate_hp(&p, &WindowSpec::default(), &HpDrive::Current(sig), 0.5, &spec).unwrap();
            let w_num = *tr.channel("w").unwrap().last().unwrap();
            let w_an = hp_volatile_analytic(&sig, 0.5, &p, 1.0);
            assert!((w_num - w_an).abs() / w_an < 1e-6, "{w_num} vs {w_an}");
        }
    }

    #[test]
    fn film_beta() {
        let f = FilmParams::<f64> { mu_e: 1e-10, d: 1e-8, r_on: 100.0 };
        assert!((beta_from_film(&f) - 1e-8 / (1e-10 * 100.0)).abs() < 1e-12);
        let f2 = FilmParams { d: 2e-8, ..f };
        assert!((1.0 / beta_from_film(&f2) - 0.5 / beta_from_film(&f)).abs() < 1e-15);
        let micro = FilmParams { d: 1e-6, ..f };
        let nano = FilmParams { d: 1e-9, ..f };
        assert!((nano.charge_coefficient() / micro.charge_coefficient() - 1e6).abs() < 1e-3);
    }

    #[test]
    fn pinched_at_zero_voltage() {
        let p = fig();
        let spec = IntegratorSpec::rk4(1e-4, 1.0);
        let tr = simulate_hp(&p, &WindowSpec::default(), &HpDrive::Voltage(DriveSignal::sine(1.0, 1.0)), 0.8, &spec).unwrap();
        for (v, i) in tr.channel("v").unwrap().iter().zip(tr.channel("i").unwrap()) {
            if *v == 0.0 {
                assert_eq!(*i, 0.0);
            }
        }
    }

    proptest! {
        #[test]
        fn window_symmetric(w in 0.0f64..1.0, p in 1u32..6) {
            prop_assert!((joglekar_window(w, p) - joglekar_window(1.0 - w, p)).abs() < 1e-12);
            let f = joglekar_window(w, p);
            prop_assert!((0.0..=1.0).contains(&f));
        }

        #[test]
        fn resistance_in_range(w in 0.0f64..=1.0, r_on in 1.0f64..1e3, k in 1.0f64..100.0) {
            let p = HpParams::new(0.0, 1.0, r_on, r_on * k).unwrap();
            let r = hp_resistance(w, &p);
            prop_assert!(r >= p.r_on * (1.0 - 1e-12) && r <= p.r_off * (1.0 + 1e-12));
        }

        #[test]
        fn trajectories_stay_in_unit_interval(amp in 0.1f64..50.0, f in 0.1f64..5.0, w0 in 0.0f64..=1.0, jog in proptest::bool::ANY) {
            let win = if jog { WindowSpec::joglekar(2) } else { WindowSpec::default() };
            let p = HpParams::new(0.0, 1e-3, 10.0, 100.0).unwrap();
            let spec = IntegratorSpec::rk4(1e-3, 2.0);
            if let Ok(tr) = simulate_hp(&p, &win, &HpDrive::Voltage(DriveSignal::sine(amp, f)), w0, &spec) {
                for &w in tr.channel("w").unwrap() {
                    prop_assert!((-1e-9..=1.0 + 1e-9).contains(&w));
                }
            }
        }
    }
}
