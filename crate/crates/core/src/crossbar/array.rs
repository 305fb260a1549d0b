use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::devices::HpParams;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Memristances `m[(i, j)]` between output line `i` and input line `j`, each
/// output line loaded by `r_out[i]` to ground.
#[derive(Debug, Clone, PartialEq)]
pub struct Crossbar<T: Scalar> {
    m: DMatrix<T>,
    r_out: Vec<T>,
    hp: HpParams<T>,
}

impl<T: Scalar> Crossbar<T> {
    pub fn new(m: DMatrix<T>, r_out: Vec<T>, hp: HpParams<T>) -> Result<Self> {
        hp.validate()?;
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::invalid("m", "crossbar needs at least one cell"));
        }
        if r_out.len() != m.nrows() {
            return Err(Error::LengthMismatch { expected: m.nrows(), found: r_out.len() });
        }
        if r_out.iter().any(|&r| !(r > T::zero()) || !r.is_finite_val()) {
            return Err(Error::invalid("r_out", "must be finite and > 0"));
        }
        if m.iter().any(|&x| !(x >= hp.r_on && x <= hp.r_off)) {
            return Err(Error::invalid("m", "memristances must lie in [r_on, r_off]"));
        }
        Ok(Crossbar { m, r_out, hp })
    }

    pub fn uniform(rows: usize, cols: usize, m: T, r_out: T, hp: HpParams<T>) -> Result<Self> {
        Self::new(DMatrix::from_element(rows, cols, m), vec![r_out; rows], hp)
    }

    /// Memristances drawn log-uniformly over `[r_on, r_off]`.
    pub fn random<R: Rng>(rows: usize, cols: usize, r_out: T, hp: HpParams<T>, rng: &mut R) -> Result<Self> {
        let (lo, hi) = (hp.r_on.to_f64_lossy().ln(), hp.r_off.to_f64_lossy().ln());
        let m = DMatrix::from_fn(rows, cols, |_, _| {
            let u = if hi > lo { rng.random_range(lo..=hi) } else { lo };
            T::lit(u.exp()).clamp(hp.r_on, hp.r_off)
        });
        Self::new(m, vec![r_out; rows], hp)
    }

    pub fn rows(&self) -> usize {
        self.m.nrows()
    }

    pub fn cols(&self) -> usize {
        self.m.ncols()
    }

    pub fn memristances(&self) -> &DMatrix<T> {
        &self.m
    }

    pub fn r_out(&self) -> &[T] {
        &self.r_out
    }

    pub fn hp(&self) -> &HpParams<T> {
        &self.hp
    }

    pub(crate) fn check_cell(&self, i: usize, j: usize) -> Result<()> {
        if i >= self.rows() || j >= self.cols() {
            return Err(Error::IndexOutOfRange { row: i, col: j, rows: self.rows(), cols: self.cols() });
        }
        Ok(())
    }

    /// Memory value of a cell, `w = (M - r_on) / (r_off - r_on)` (0 when the
    /// two limits coincide).
    pub fn memory(&self, i: usize, j: usize) -> Result<T> {
        self.check_cell(i, j)?;
        let span = self.hp.r_off - self.hp.r_on;
        Ok(if span > T::zero() { (self.m[(i, j)] - self.hp.r_on) / span } else { T::zero() })
    }

    /// Copy with one cell set to memory `w` (clamped to `[0, 1]`).
    pub fn with_memory(&self, i: usize, j: usize, w: T) -> Result<Self> {
        self.check_cell(i, j)?;
        let mut out = self.clone();
        out.m[(i, j)] = crate::devices::hp_resistance(w.clamp(T::zero(), T::one()), &self.hp);
        Ok(out)
    }

    /// Transfer matrix `A_ij = g_ij / (1/r_out_i + sum_s g_is)`, `g = 1/M`.
    pub fn transfer_matrix(&self) -> DMatrix<T> {
        let mut a = self.m.map(|x| T::one() / x);
        for i in 0..self.rows() {
            let denom = T::one() / self.r_out[i] + a.row(i).sum();
            a.row_mut(i).unscale_mut(denom);
        }
        a
    }

    /// One line per output row, memristances separated by commas.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for i in 0..self.rows() {
            let row: Vec<String> = (0..self.cols()).map(|j| self.m[(i, j)].to_string()).collect();
            writeln!(s, "{}", row.join(",")).expect("write to String");
        }
        s
    }

    pub fn from_csv(text: &str, r_out: Vec<T>, hp: HpParams<T>) -> Result<Self> {
        let rows: Vec<Vec<T>> = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .enumerate()
            .map(|(k, l)| {
                l.split(',')
                    .map(|x| x.trim().parse::<f64>().map(T::lit).map_err(|_| Error::Parse(format!("row {}: bad number `{x}`", k + 1))))
                    .collect()
            })
            .collect::<Result<_>>()?;
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Parse("ragged crossbar CSV".into()));
        }
        Self::new(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]), r_out, hp)
    }
}

/// Output-line voltages `eta = A xi`; the crossbar is not modified.
pub fn read_mvm<T: Scalar>(x: &Crossbar<T>, xi: &[T]) -> Result<Vec<T>> {
    if xi.len() != x.cols() {
        return Err(Error::LengthMismatch { expected: x.cols(), found: xi.len() });
    }
    Ok((x.transfer_matrix() * DVector::from_column_slice(xi)).iter().copied().collect())
}

/// Modified nodal analysis of the whole array: input lines driven by ideal
/// sources, output lines loaded to ground; returns the output-line voltages.
pub fn nodal_oracle<T: Scalar>(x: &Crossbar<T>, xi: &[T]) -> Result<Vec<T>> {
    let (rows, cols) = (x.rows(), x.cols());
    if xi.len() != cols {
        return Err(Error::LengthMismatch { expected: cols, found: xi.len() });
    }
    // unknowns: output nodes 0..rows, input nodes rows..rows+cols, then one
    // branch current per source
    let nodes = rows + cols;
    let size = nodes + cols;
    let mut k = DMatrix::<T>::zeros(size, size);
    let mut rhs = DVector::<T>::zeros(size);
    let stamp = |a: usize, b: Option<usize>, g: T, k: &mut DMatrix<T>| {
        k[(a, a)] += g;
        if let Some(b) = b {
            k[(b, b)] += g;
            k[(a, b)] -= g;
            k[(b, a)] -= g;
        }
    };
    for i in 0..rows {
        stamp(i, None, T::one() / x.r_out()[i], &mut k);
        for j in 0..cols {
            stamp(i, Some(rows + j), T::one() / x.memristances()[(i, j)], &mut k);
        }
    }
    for j in 0..cols {
        let (node, branch) = (rows + j, nodes + j);
        k[(node, branch)] += T::one();
        k[(branch, node)] += T::one();
        rhs[branch] = xi[j];
    }
    let sol = k.lu().solve(&rhs).ok_or_else(|| Error::Singular("nodal matrix".into()))?;
    Ok(sol.rows(0, rows).iter().copied().collect())
}

/// Outcome of [`program_matrix_clamped`].
#[derive(Debug, Clone)]
pub struct Programmed<T: Scalar> {
    pub crossbar: Crossbar<T>,
    /// `max |A_actual - A_target|`.
    pub residual: T,
    pub sweeps: usize,
    /// Cells pinned at `r_on` or `r_off`.
    pub clamped: Vec<(usize, usize)>,
}

pub const PROGRAM_TOL: f64 = 1e-6;
pub const PROGRAM_SWEEPS: usize = 1000;

fn check_target<T: Scalar>(x: &Crossbar<T>, target: &DMatrix<T>) -> Result<()> {
    if target.shape() != x.memristances().shape() {
        return Err(Error::DimensionMismatch(format!(
            "target is {}x{}, crossbar is {}x{}",
            target.nrows(),
            target.ncols(),
            x.rows(),
            x.cols()
        )));
    }
    let mut bad = Vec::new();
    for i in 0..target.nrows() {
        let sum = target.row(i).sum();
        for j in 0..target.ncols() {
            let a = target[(i, j)];
            if !a.is_finite_val() || a < T::zero() || sum >= T::one() {
                bad.push((i, j));
            }
        }
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::Unrealizable { entries: bad })
    }
}

/// Fixed-point programming: each sweep sets `g_ij = A_ij (1/r_out_i + sum_s g_is)`
/// from the previous sweep's row sums, clamped to `[1/r_off, 1/r_on]`.
///
/// Entries that cannot be reached are pinned at the nearest limit and listed
/// in `clamped`; `residual` reports how far the result is from the target.
pub fn program_matrix_clamped<T: Scalar>(x: &Crossbar<T>, target: &DMatrix<T>) -> Result<Programmed<T>> {
    check_target(x, target)?;
    let hp = *x.hp();
    let (g_lo, g_hi) = (T::one() / hp.r_off, T::one() / hp.r_on);
    let mut g = x.memristances().map(|m| T::one() / m);
    let mut sweeps = 0;
    let tol = T::lit(PROGRAM_TOL) * T::lit(1e-3);
    while sweeps < PROGRAM_SWEEPS {
        sweeps += 1;
        let mut change = T::zero();
        for i in 0..x.rows() {
            let denom = T::one() / x.r_out()[i] + g.row(i).sum();
            for j in 0..x.cols() {
                let new = (target[(i, j)] * denom).clamp(g_lo, g_hi);
                change = change.max((new - g[(i, j)]).abs() / g_hi);
                g[(i, j)] = new;
            }
        }
        if change < tol {
            break;
        }
    }
    let crossbar = Crossbar::new(g.map(|v| (T::one() / v).clamp(hp.r_on, hp.r_off)), x.r_out().to_vec(), hp)?;
    let residual = (crossbar.transfer_matrix() - target).amax();
    let clamped = (0..x.rows())
        .flat_map(|i| (0..x.cols()).map(move |j| (i, j)))
        .filter(|&(i, j)| {
            let m = crossbar.memristances()[(i, j)];
            (m == hp.r_on || m == hp.r_off) && (crossbar.transfer_matrix()[(i, j)] - target[(i, j)]).abs() > T::lit(PROGRAM_TOL)
        })
        .collect();
    Ok(Programmed { crossbar, residual, sweeps, clamped })
}

/// As [`program_matrix_clamped`], but fails unless the target is met to
/// within `1e-6`, listing the offending entries.
pub fn program_matrix<T: Scalar>(x: &Crossbar<T>, target: &DMatrix<T>) -> Result<Crossbar<T>> {
    let p = program_matrix_clamped(x, target)?;
    if p.residual < T::lit(PROGRAM_TOL) {
        return Ok(p.crossbar);
    }
    let a = p.crossbar.transfer_matrix();
    let entries = (0..x.rows())
        .flat_map(|i| (0..x.cols()).map(move |j| (i, j)))
        .filter(|&(i, j)| (a[(i, j)] - target[(i, j)]).abs() >= T::lit(PROGRAM_TOL))
        .collect();
    Err(Error::Unrealizable { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn hp() -> HpParams<f64> {
        HpParams::new(0.0, 1.0, 100.0, 16e3).unwrap()
    }

    #[test]
    fn single_cell_divider() {
        let x = Crossbar::uniform(1, 1, 300.0, 100.0, hp()).unwrap();
        let eta = read_mvm(&x, &[2.0]).unwrap()[0];
        assert!((eta - 2.0 * 100.0 / 400.0).abs() < 1e-15);
        let o = nodal_oracle(&x, &[2.0]).unwrap()[0];
        assert!((o - 0.5).abs() < 1e-14);
    }

    #[test]
    fn huge_memristance_decouples() {
        let p = HpParams::<f64>::new(0.0, 1.0, 1e30, 1e30).unwrap();
        let x = Crossbar::<f64>::uniform(2, 3, 1e30, 1.0, p).unwrap();
        let eta = read_mvm(&x, &[1.0, -2.0, 3.0]).unwrap();
        assert!(eta.iter().all(|e| e.abs() < 1e-25));
    }

    #[test]
    fn random_matches_nodal() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x = Crossbar::random(4, 5, 500.0, hp(), &mut rng).unwrap();
        let xi = [0.3, -0.1, 0.7, 0.2, -0.5];
        let a = read_mvm(&x, &xi).unwrap();
        let b = nodal_oracle(&x, &xi).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).abs() <= 1e-9 * q.abs().max(1e-12));
        }
    }

    #[test]
    fn rows_are_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let x = Crossbar::random(3, 3, 500.0, hp(), &mut rng).unwrap();
        let xi = [1.0, 2.0, 3.0];
        let before = read_mvm(&x, &xi).unwrap();
        let y = x.with_memory(2, 1, 0.9).unwrap();
        let after = read_mvm(&y, &xi).unwrap();
        assert_eq!(before[0], after[0]);
        assert_eq!(before[1], after[1]);
        assert_ne!(before[2], after[2]);
    }

    #[test]
    fn program_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let src = Crossbar::random(5, 4, 800.0, hp(), &mut rng).unwrap();
        let target = src.transfer_matrix();
        let start = Crossbar::uniform(5, 4, 5000.0, 800.0, hp()).unwrap();
        let out = program_matrix(&start, &target).unwrap();
        assert!((out.transfer_matrix() - target).amax() < 1e-6);
    }

    #[test]
    fn program_single_cell_closed_form() {
        let start = Crossbar::uniform(1, 1, 1000.0, 200.0, hp()).unwrap();
        let a = 0.3;
        let out = program_matrix(&start, &DMatrix::from_element(1, 1, a)).unwrap();
        let want = 200.0 * (1.0 - a) / a;
        assert!((out.memristances()[(0, 0)] - want).abs() / want < 1e-6);
    }

    #[test]
    fn zero_target_best_effort() {
        let start = Crossbar::uniform(2, 2, 1000.0, 200.0, hp()).unwrap();
        let zero = DMatrix::zeros(2, 2);
        let p = program_matrix_clamped(&start, &zero).unwrap();
        assert!(p.crossbar.memristances().iter().all(|&m| m == 16e3));
        // residual equals the weakest achievable coupling
        let floor = (1.0 / 16e3) / (1.0 / 200.0 + 2.0 / 16e3);
        assert!((p.residual - floor).abs() < 1e-15);
        assert_eq!(p.clamped.len(), 4);
        assert!(matches!(program_matrix(&start, &zero), Err(Error::Unrealizable { .. })));
    }

    #[test]
    fn infeasible_rows_listed() {
        let start = Crossbar::uniform(2, 2, 1000.0, 200.0, hp()).unwrap();
        let t = DMatrix::from_row_slice(2, 2, &[0.6, 0.5, 0.1, 0.1]);
        match program_matrix(&start, &t) {
            Err(Error::Unrealizable { entries }) => assert_eq!(entries, vec![(0, 0), (0, 1)]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn csv_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let x = Crossbar::random(3, 2, 500.0, hp(), &mut rng).unwrap();
        let y = Crossbar::from_csv(&x.to_csv(), vec![500.0; 3], hp()).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn index_errors() {
        let x = Crossbar::uniform(2, 2, 1000.0, 200.0, hp()).unwrap();
        assert!(matches!(x.memory(2, 0), Err(Error::IndexOutOfRange { .. })));
        assert!(read_mvm(&x, &[1.0]).is_err());
    }
}
