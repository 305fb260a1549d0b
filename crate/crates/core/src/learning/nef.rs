use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ridge_lstsq;
use crate::scalar::Scalar;

/// Firing rate of a leaky integrate-and-fire neuron with constant soma
/// current: `1 / (tau0 - tau_rc ln(1 - i_f / i))` above `i_f`, 0 otherwise.
pub fn lif_response<T: Scalar>(i: T, tau0: T, tau_rc: T, i_f: T) -> T {
    if i > i_f {
        T::one() / (tau0 - tau_rc * (T::one() - i_f / i).ln())
    } else {
        T::zero()
    }
}

/// Uniform domain grid of `points` samples spanning `[x_min, x_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid<T> {
    pub x_min: T,
    pub x_max: T,
    pub points: usize,
}

impl<T: Scalar> Grid<T> {
    pub fn new(x_min: T, x_max: T, points: usize) -> Result<Self> {
        let g = Grid { x_min, x_max, points };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_max > self.x_min) || !self.x_min.is_finite_val() || !self.x_max.is_finite_val() {
            return Err(Error::invalid("grid", "need finite x_min < x_max"));
        }
        if self.points < 2 {
            return Err(Error::invalid("grid", "need at least 2 points"));
        }
        Ok(())
    }

    pub fn xs(&self) -> Vec<T> {
        let step = (self.x_max - self.x_min) / T::lit((self.points - 1) as f64);
        (0..self.points).map(|k| self.x_min + step * T::lit(k as f64)).collect()
    }

    pub fn sample(&self, f: impl Fn(T) -> T) -> Vec<T> {
        self.xs().into_iter().map(f).collect()
    }
}

/// Rate-coded neuron population over a function space on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NefPopulation<T: Scalar> {
    pub gains: Vec<T>,
    pub biases: Vec<T>,
    /// One row per neuron, one column per grid point.
    pub encoders: DMatrix<T>,
    pub tau0: T,
    pub tau_rc: T,
    pub i_f: T,
    pub grid: Grid<T>,
}

impl<T: Scalar> NefPopulation<T> {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        let n = self.gains.len();
        if n == 0 {
            return Err(Error::invalid("population", "no neurons"));
        }
        if self.biases.len() != n || self.encoders.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "{n} gains, {} biases, {} encoder rows",
                self.biases.len(),
                self.encoders.nrows()
            )));
        }
        if self.encoders.ncols() != self.grid.points {
            return Err(Error::LengthMismatch { expected: self.grid.points, found: self.encoders.ncols() });
        }
        if !(self.tau0 > T::zero()) {
            return Err(Error::invalid("tau0", "must be > 0"));
        }
        if !(self.tau_rc >= T::zero()) {
            return Err(Error::invalid("tau_rc", "must be >= 0"));
        }
        if !(self.i_f > T::zero()) {
            return Err(Error::invalid("i_f", "must be > 0"));
        }
        Ok(())
    }

    /// Random population: each encoder is `+1` or `-1` on a random
    /// contiguous run of grid points and 0 elsewhere; gains in `[1, 5)`,
    /// biases in `[0.8, 2)` times `i_f`.
    pub fn random<R: Rng>(neurons: usize, grid: Grid<T>, tau0: T, tau_rc: T, i_f: T, rng: &mut R) -> Result<Self> {
        grid.validate()?;
        let np = grid.points;
        let mut encoders = DMatrix::zeros(neurons, np);
        for i in 0..neurons {
            let a = rng.random_range(0..np);
            let b = rng.random_range(0..np);
            let sign = if rng.random::<bool>() { T::one() } else { -T::one() };
            for k in a.min(b)..=a.max(b) {
                encoders[(i, k)] = sign;
            }
        }
        let gains = (0..neurons).map(|_| T::lit(rng.random_range(1.0..5.0))).collect();
        let biases = (0..neurons).map(|_| i_f * T::lit(rng.random_range(0.8..2.0))).collect();
        let p = NefPopulation { gains, biases, encoders, tau0, tau_rc, i_f, grid };
        p.validate()?;
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }
}

/// Soma currents `gain * mean_x(f * encoder) + bias`.
pub fn nef_currents<T: Scalar>(f: &[T], p: &NefPopulation<T>) -> Result<Vec<T>> {
    p.validate()?;
    if f.len() != p.grid.points {
        return Err(Error::LengthMismatch { expected: p.grid.points, found: f.len() });
    }
    let np = T::lit(f.len() as f64);
    Ok((0..p.len())
        .map(|i| {
            let dot = p.encoders.row(i).iter().zip(f).fold(T::zero(), |a, (&e, &v)| a + e * v);
            p.gains[i] * dot / np + p.biases[i]
        })
        .collect())
}

/// Firing rates of the population for `f` sampled on its grid.
pub fn nef_encode<T: Scalar>(f: &[T], p: &NefPopulation<T>) -> Result<Vec<T>> {
    Ok(nef_currents(f, p)?.into_iter().map(|i| lif_response(i, p.tau0, p.tau_rc, p.i_f)).collect())
}

/// Decoding functions, one row per neuron.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoders<T: Scalar> {
    pub phi: DMatrix<T>,
    /// Set when some grid point needed the minimum-norm solution.
    pub min_norm: bool,
}

/// `f_hat(x) = sum_i a_i phi_i(x)`.
pub fn nef_decode<T: Scalar>(activities: &[T], d: &Decoders<T>) -> Result<Vec<T>> {
    if activities.len() != d.phi.nrows() {
        return Err(Error::LengthMismatch { expected: d.phi.nrows(), found: activities.len() });
    }
    Ok((d.phi.transpose() * DVector::from_column_slice(activities)).iter().copied().collect())
}

/// Per grid point `x`, minimizes `sum_f (sum_i a_i(f) phi_i(x) - f(x))^2 +
/// reg |phi(x)|^2` over the training functions.
pub fn nef_fit_decoders<T: Scalar>(p: &NefPopulation<T>, training: &[Vec<T>], reg: T) -> Result<Decoders<T>> {
    if training.is_empty() {
        return Err(Error::invalid("training", "need at least one function"));
    }
    let acts: Vec<Vec<T>> = training.iter().map(|f| nef_encode(f, p)).collect::<Result<_>>()?;
    let a = DMatrix::from_fn(training.len(), p.len(), |k, i| acts[k][i]);
    let mut phi = DMatrix::zeros(p.len(), p.grid.points);
    let mut min_norm = false;
    for x in 0..p.grid.points {
        let y = DVector::from_fn(training.len(), |k, _| training[k][x]);
        let s = ridge_lstsq(&a, &y, reg)?;
        min_norm |= s.min_norm;
        phi.set_column(x, &s.coef);
    }
    Ok(Decoders { phi, min_norm })
}

/// Root-mean-square decode error over the grid, averaged over `functions`.
pub fn nef_decode_rms<T: Scalar>(p: &NefPopulation<T>, d: &Decoders<T>, functions: &[Vec<T>]) -> Result<T> {
    let mut total = T::zero();
    for f in functions {
        let fh = nef_decode(&nef_encode(f, p)?, d)?;
        let sq = f.iter().zip(&fh).fold(T::zero(), |a, (&x, &y)| a + (x - y) * (x - y));
        total += (sq / T::lit(f.len() as f64)).sqrt();
    }
    Ok(total / T::lit(functions.len() as f64))
}
