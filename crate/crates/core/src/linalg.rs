//! Dense linear-algebra helpers on top of nalgebra.

use nalgebra::{Complex, DMatrix, DVector, Schur};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `A = V diag(values) V^-1` for a general real matrix, in complex arithmetic.
#[derive(Debug, Clone)]
pub struct EigenDecomp<T: Scalar> {
    pub values: Vec<Complex<T>>,
    pub vectors: DMatrix<Complex<T>>,
    pub inverse: DMatrix<Complex<T>>,
}

pub fn eigenvalues<T: Scalar>(a: &DMatrix<T>) -> Result<Vec<Complex<T>>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} matrix is not square", a.nrows(), a.ncols())));
    }
    if a.iter().any(|x| !x.is_finite_val()) {
        return Err(Error::Eigen("matrix has non-finite entries".into()));
    }
    let schur = Schur::try_new(a.clone(), T::default_epsilon(), 10_000)
        .ok_or_else(|| Error::Eigen("Schur iteration did not converge".into()))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Eigenvalues from the real Schur form, eigenvectors by complex inverse
/// iteration, inverse by LU. Fails when the eigenvector matrix does not
/// reproduce `a` to `tol` relative (defective or nearly defective `a`).
pub fn eigen_decompose<T: Scalar>(a: &DMatrix<T>, tol: T) -> Result<EigenDecomp<T>> {
    let n = a.nrows();
    let values = eigenvalues(a)?;
    let ac: DMatrix<Complex<T>> = a.map(|x| Complex::new(x, T::zero()));
    let scale = a.iter().fold(T::one(), |m, x| m.max(x.abs()));
    let mut vectors = DMatrix::<Complex<T>>::zeros(n, n);
    for (k, &lam) in values.iter().enumerate() {
        let shift = lam + Complex::new(scale * T::lit(1e-10), T::zero());
        let mut m = ac.clone();
        for i in 0..n {
            m[(i, i)] -= shift;
        }
        let lu = m.lu();
        // deterministic start vector with no structure shared across k
        let mut x = DVector::from_fn(n, |i, _| Complex::new(T::lit((1.0 + (i * 131 + k * 71) as f64).sin()), T::zero()));
        for _ in 0..3 {
            x = lu.solve(&x).ok_or_else(|| Error::Eigen("inverse iteration hit a singular shift".into()))?;
            let norm = x.norm();
            if !(norm > T::zero()) || !norm.is_finite_val() {
                return Err(Error::Eigen("inverse iteration diverged".into()));
            }
            x.unscale_mut(norm);
        }
        vectors.set_column(k, &x);
    }
    let inverse = vectors
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Eigen("eigenvector matrix is singular".into()))?;
    // a nearly dependent eigenvector set makes the reconstruction meaningless
    let cond = vectors.norm() * inverse.norm();
    if !(cond.is_finite_val() && cond < T::lit(1e8)) {
        return Err(Error::Eigen("eigenvector matrix is ill conditioned".into()));
    }
    let d = DMatrix::from_diagonal(&DVector::from_vec(values.clone()));
    let recon = &vectors * d * &inverse - ac;
    let err = recon.iter().fold(T::zero(), |m, z| m.max((z.re * z.re + z.im * z.im).sqrt()));
    if !(err <= tol * scale) {
        return Err(Error::Eigen(format!("reconstruction error {} exceeds tolerance", err)));
    }
    Ok(EigenDecomp { values, vectors, inverse })
}

/// `exp(z)` for a complex scalar.
pub fn complex_exp<T: Scalar>(z: Complex<T>) -> Complex<T> {
    let m = z.re.exp();
    Complex::new(m * z.im.cos(), m * z.im.sin())
}

/// Matrix exponential (Pade scaling and squaring).
pub fn expm<T: Scalar>(a: &DMatrix<T>) -> DMatrix<T> {
    a.exp()
}

/// Result of a least-squares solve.
#[derive(Debug, Clone)]
pub struct LstsqSolution<T: Scalar> {
    pub coef: DVector<T>,
    /// True when the minimum-norm (SVD) path was taken because the system was
    /// rank deficient or badly conditioned.
    pub min_norm: bool,
}

/// Condition number above which the normal equations are abandoned.
pub const COND_LIMIT: f64 = 1e10;

/// Minimizes `|G c - y|^2 + ridge |c|^2`.
///
/// Normal equations with Cholesky when the regularized Gram matrix is well
/// conditioned; otherwise the SVD of `G` gives the (ridge-damped)
/// minimum-norm solution.
pub fn ridge_lstsq<T: Scalar>(g: &DMatrix<T>, y: &DVector<T>, ridge: T) -> Result<LstsqSolution<T>> {
    if g.nrows() != y.len() {
        return Err(Error::LengthMismatch { expected: g.nrows(), found: y.len() });
    }
    if ridge < T::zero() {
        return Err(Error::invalid("ridge", "must be >= 0"));
    }
    if g.iter().chain(y.iter()).any(|x| !x.is_finite_val()) {
        return Err(Error::invalid("data", "non-finite entries"));
    }
    let svd = g.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(T::zero(), |m, &s| m.max(s));
    let smin = svd.singular_values.iter().fold(smax, |m, &s| m.min(s));
    let rank_full = g.ncols() <= g.nrows();
    let cond = if rank_full { (smax * smax + ridge) / (smin * smin + ridge) } else { T::lit(f64::INFINITY) };
    if rank_full && cond.is_finite_val() && cond < T::lit(COND_LIMIT) {
        let mut gram = g.transpose() * g;
        for i in 0..gram.nrows() {
            gram[(i, i)] += ridge;
        }
        if let Some(ch) = gram.cholesky() {
            return Ok(LstsqSolution { coef: ch.solve(&(g.transpose() * y)), min_norm: false });
        }
    }
    let u = svd.u.as_ref().expect("computed");
    let vt = svd.v_t.as_ref().expect("computed");
    let cutoff = smax * T::lit(1e-12) * T::lit(g.nrows().max(g.ncols()) as f64);
    let uty = u.transpose() * y;
    let mut z = DVector::zeros(svd.singular_values.len());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff {
            z[k] = s * uty[k] / (s * s + ridge);
        }
    }
    Ok(LstsqSolution { coef: vt.transpose() * z, min_norm: true })
}
