use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ridge_lstsq;
use crate::scalar::Scalar;

/// One dictionary function `g_k`, evaluated on a sample row.
pub type Feature<'a, T> = &'a dyn Fn(&[T]) -> T;

/// Design matrix `G[(i, k)] = g_k(x_i)` with samples as the rows of `xs`.
pub fn elm_features<T: Scalar>(xs: &DMatrix<T>, dictionary: &[Feature<'_, T>]) -> Result<DMatrix<T>> {
    if dictionary.is_empty() {
        return Err(Error::invalid("dictionary", "needs at least one function"));
    }
    let mut g = DMatrix::zeros(xs.nrows(), dictionary.len());
    let mut row = vec![T::zero(); xs.ncols()];
    for i in 0..xs.nrows() {
        for (c, r) in row.iter_mut().enumerate() {
            *r = xs[(i, c)];
        }
        for (k, f) in dictionary.iter().enumerate() {
            let v = f(&row);
            if !v.is_finite_val() {
                return Err(Error::invalid("features", format!("g_{k}(x_{i}) is not finite")));
            }
            g[(i, k)] = v;
        }
    }
    Ok(g)
}

/// Inverse link function applied to `x . eta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    #[default]
    Logistic,
    Tanh,
}

impl Link {
    pub fn inverse<T: Scalar>(self, z: T) -> T {
        match self {
            Link::Logistic => T::one() / (T::one() + (-z).exp()),
            Link::Tanh => z.tanh(),
        }
    }
}

/// Random projections `g_k(x) = link^-1(x . eta_k)`, `eta_k` drawn
/// independently per component from a normal prior.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomFeatures<T: Scalar> {
    /// One row per feature.
    pub etas: DMatrix<T>,
    pub link: Link,
}

impl<T: Scalar> RandomFeatures<T> {
    /// Prior `N(mean, sd^2)` per component; the default prior is standard normal.
    pub fn sample<R: Rng>(dim: usize, count: usize, link: Link, mean: f64, sd: f64, rng: &mut R) -> Result<Self> {
        let prior = Normal::new(mean, sd).map_err(|e| Error::invalid("prior", e.to_string()))?;
        Ok(RandomFeatures { etas: DMatrix::from_fn(count, dim, |_, _| T::lit(prior.sample(rng))), link })
    }

    pub fn features(&self, xs: &DMatrix<T>) -> Result<DMatrix<T>> {
        if xs.ncols() != self.etas.ncols() {
            return Err(Error::DimensionMismatch(format!("samples have {} columns, features expect {}", xs.ncols(), self.etas.ncols())));
        }
        let z = xs * self.etas.transpose();
        let g = z.map(|v| self.link.inverse(v));
        if g.iter().any(|v| !v.is_finite_val()) {
            return Err(Error::invalid("features", "non-finite value"));
        }
        Ok(g)
    }
}

/// Learned readout coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Readout<T: Scalar> {
    pub coef: DVector<T>,
    /// Set when the system was rank deficient or badly conditioned and the
    /// minimum-norm solution was returned.
    pub min_norm: bool,
}

impl<T: Scalar> Readout<T> {
    pub fn predict(&self, g: &DMatrix<T>) -> Result<DVector<T>> {
        if g.ncols() != self.coef.len() {
            return Err(Error::LengthMismatch { expected: self.coef.len(), found: g.ncols() });
        }
        Ok(g * &self.coef)
    }
}

/// Minimizes `|G c - y|^2 + ridge |c|^2`.
pub fn fit_readout<T: Scalar>(g: &DMatrix<T>, y: &DVector<T>, ridge: T) -> Result<Readout<T>> {
    let s = ridge_lstsq(g, y, ridge)?;
    Ok(Readout { coef: s.coef, min_norm: s.min_norm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_feature() {
        let xs = DMatrix::from_column_slice(3, 1, &[1.0, -2.0, 0.5]);
        let id = |x: &[f64]| x[0];
        let g = elm_features(&xs, &[&id]).unwrap();
        assert_eq!(g, xs);
    }

    #[test]
    fn elementwise_two_by_two() {
        let xs = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let f = |x: &[f64]| x[0] * x[1];
        let h = |x: &[f64]| x[0] - x[1];
        let g = elm_features(&xs, &[&f, &h]).unwrap();
        assert_eq!(g, DMatrix::from_row_slice(2, 2, &[2.0, -1.0, 12.0, -1.0]));
        let bad = |_: &[f64]| f64::NAN;
        assert!(elm_features(&xs, &[&bad]).is_err());
    }

    #[test]
    fn monte_carlo_matches_integral() {
        // E[sigma(x eta)], eta ~ N(0.5, 1), against trapezoid quadrature
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let n = 4000;
        let rf = RandomFeatures::<f64>::sample(1, n, Link::Logistic, 0.5, 1.0, &mut rng).unwrap();
        let xs = DMatrix::from_column_slice(3, 1, &[0.3, 1.0, 2.5]);
        let g = rf.features(&xs).unwrap();
        for i in 0..3 {
            let x = xs[(i, 0)];
            let mc = g.row(i).mean();
            let sd = (g.row(i).map(|v| (v - mc) * (v - mc)).sum() / (n - 1) as f64).sqrt();
            let quad: f64 = (0..=20_000)
                .map(|k| {
                    let e = -9.5 + 20.0 * k as f64 / 20_000.0;
                    let w = if k == 0 || k == 20_000 { 0.5 } else { 1.0 };
                    w * Link::Logistic.inverse(x * e) * (-(e - 0.5f64).powi(2) / 2.0).exp()
                })
                .sum::<f64>()
                * (20.0 / 20_000.0)
                / (2.0 * std::f64::consts::PI).sqrt();
            assert!((mc - quad).abs() < 4.0 * sd / (n as f64).sqrt(), "x={x} mc={mc} quad={quad}");
        }
    }

    #[test]
    fn readout_interpolates_and_shrinks() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 5.0]);
        let y = DVector::from_vec(vec![1.0, -1.0]);
        let r = fit_readout(&g, &y, 0.0).unwrap();
        assert!((r.predict(&g).unwrap() - &y).norm() < 1e-12);
        assert!(fit_readout(&g, &y, 1e14).unwrap().coef.norm() < 1e-12);
    }

    #[test]
    fn rank_deficient_is_flagged() {
        let g = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let r = fit_readout(&g, &y, 0.0).unwrap();
        assert!(r.min_norm);
        assert!((r.predict(&g).unwrap() - y).norm() < 1e-10);
    }

    proptest::proptest! {
        #[test]
        fn extra_column_never_hurts(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = DMatrix::<f64>::from_fn(12, 4, |_, _| rng.random_range(-1.0..1.0));
            let y = DVector::<f64>::from_fn(12, |_, _| rng.random_range(-1.0..1.0));
            let extra = DVector::<f64>::from_fn(12, |_, _| rng.random_range(-1.0..1.0));
            let r1 = fit_readout(&g, &y, 0.0).unwrap();
            let g2 = g.clone().insert_column(4, 0.0);
            let mut g2 = g2;
            g2.set_column(4, &extra);
            let r2 = fit_readout(&g2, &y, 0.0).unwrap();
            let e1 = (r1.predict(&g).unwrap() - &y).norm();
            let e2 = (r2.predict(&g2).unwrap() - &y).norm();
            proptest::prop_assert!(e2 <= e1 + 1e-12);
        }
    }
}
