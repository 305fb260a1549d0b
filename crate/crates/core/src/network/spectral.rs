use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::linalg::{complex_exp, eigen_decompose, expm};
use crate::network::dynamics::NetworkState;
use crate::scalar::Scalar;
use crate::sim::{fit_power_law, PowerLawFit};

/// Relative reconstruction tolerance below which the eigen route is trusted.
const EIGEN_TOL: f64 = 1e-9;

/// `<w(t)> = tr(exp(A t) W0) / N` with `W0 = diag(w0)`.
///
/// Uses an eigendecomposition when `A` is safely diagonalizable and falls
/// back to one matrix exponential per time point otherwise.
pub fn mean_relaxation<T: Scalar>(a: &DMatrix<T>, w0: &NetworkState<T>, ts: &[T]) -> Result<Vec<T>> {
    let n = w0.0.len();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::DimensionMismatch(format!("A is {}x{}, w0 has {n} entries", a.nrows(), a.ncols())));
    }
    match eigen_decompose(a, T::lit(EIGEN_TOL)) {
        Ok(e) => {
            let weights: Vec<Complex<T>> = (0..n)
                .map(|k| (0..n).fold(Complex::new(T::zero(), T::zero()), |acc, i| acc + e.vectors[(i, k)] * e.inverse[(k, i)] * w0.0[i]))
                .collect();
            let nf = T::lit(n as f64);
            Ok(ts
                .iter()
                .map(|&t| {
                    let s = e
                        .values
                        .iter()
                        .zip(&weights)
                        .fold(Complex::new(T::zero(), T::zero()), |acc, (&l, &c)| acc + c * complex_exp(l * t));
                    s.re / nf
                })
                .collect())
        }
        Err(_) => Ok(mean_relaxation_expm(a, w0, ts)),
    }
}

/// [`mean_relaxation`] evaluated directly with the matrix exponential.
pub fn mean_relaxation_expm<T: Scalar>(a: &DMatrix<T>, w0: &NetworkState<T>, ts: &[T]) -> Vec<T> {
    let nf = T::lit(w0.0.len() as f64);
    ts.iter()
        .map(|&t| {
            let e = expm(&(a * t));
            w0.0.iter().enumerate().fold(T::zero(), |acc, (i, &w)| acc + e[(i, i)] * w) / nf
        })
        .collect()
}

/// `count` log-spaced points over `[lo, hi]`.
pub fn log_grid<T: Scalar>(lo: T, hi: T, count: usize) -> Vec<T> {
    let (a, b) = (lo.ln(), hi.ln());
    let m = T::lit((count.max(2) - 1) as f64);
    (0..count).map(|k| (a + (b - a) * T::lit(k as f64) / m).exp()).collect()
}

/// Power-law fit `y ~ t^gamma`; rejected when the log-log `R^2` is below `r2_gate`.
pub fn fit_relaxation_exponent<T: Scalar>(ts: &[T], ys: &[T], r2_gate: T) -> Result<PowerLawFit<T>> {
    let fit = fit_power_law(ts, ys)?;
    if fit.r2 < r2_gate {
        return Err(Error::FitRejected { r2: fit.r2.to_f64_lossy(), gate: r2_gate.to_f64_lossy() });
    }
    Ok(fit)
}
