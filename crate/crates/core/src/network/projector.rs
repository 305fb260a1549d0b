use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::network::graph::{CircuitGraph, Edge, EdgeRole};
use crate::scalar::Scalar;

/// Orthogonal projector onto the cycle space of the memristive edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector<T: Scalar> {
    matrix: DMatrix<T>,
    rank: usize,
}

impl<T: Scalar> Projector<T> {
    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Largest entry of `|P - P^T|` and of `|P P - P|`.
    pub fn defects(&self) -> (T, T) {
        let p = &self.matrix;
        let asym = (p - p.transpose()).amax();
        let idem = (p * p - p).amax();
        (asym, idem)
    }
}

/// Dense cycle matrix (one row per fundamental cycle).
pub(crate) fn cycle_matrix_dense<T: Scalar>(g: &CircuitGraph<T>) -> DMatrix<T> {
    let rows = g.cycle_matrix();
    let e = g.edges().len();
    DMatrix::from_fn(rows.len(), e, |r, c| T::lit(rows[r][c] as f64))
}

/// `C^T (C C^T)^-1 C` with `C` the fundamental-cycle matrix of the
/// memristor-only subgraph. Source edges are ignored.
pub fn cycle_projector<T: Scalar>(g: &CircuitGraph<T>) -> Result<Projector<T>> {
    let mem: Vec<Edge<T>> = g.edges().iter().copied().filter(|e| matches!(e.role, EdgeRole::Memristor { .. })).collect();
    let sub = CircuitGraph::new(g.node_count(), mem)?;
    let c = cycle_matrix_dense(&sub);
    let e = sub.edges().len();
    let rank = c.nrows();
    if rank == 0 {
        return Ok(Projector { matrix: DMatrix::zeros(e, e), rank });
    }
    let gram = &c * c.transpose();
    let ch = gram.cholesky().ok_or_else(|| Error::Singular("cycle Gram matrix".into()))?;
    let matrix = c.transpose() * ch.solve(&c);
    Ok(Projector { matrix, rank })
}
