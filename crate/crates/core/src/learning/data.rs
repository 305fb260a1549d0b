use std::fmt::Write;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Numeric CSV with one sample per row. A first line that does not parse as
/// numbers is taken as a header and skipped.
pub fn matrix_from_csv<T: Scalar>(text: &str) -> Result<DMatrix<T>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty()).peekable();
    let parse_row = |l: &str| -> Option<Vec<f64>> { l.split(',').map(|x| x.trim().parse::<f64>().ok()).collect() };
    if let Some(first) = lines.peek() {
        if parse_row(first).is_none() {
            lines.next();
        }
    }
    let rows: Vec<Vec<f64>> = lines
        .enumerate()
        .map(|(k, l)| parse_row(l).ok_or_else(|| Error::Parse(format!("data row {}: bad number", k + 1))))
        .collect::<Result<_>>()?;
    let cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || cols == 0 {
        return Err(Error::Parse("empty data".into()));
    }
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Parse("ragged data".into()));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Parse("non-finite value in data".into()));
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| T::lit(rows[i][j])))
}

/// Coefficients as `index,value` lines under a header.
pub fn coefficients_to_csv<T: Scalar>(coef: &DVector<T>) -> String {
    let mut s = String::from("index,coefficient\n");
    for (k, c) in coef.iter().enumerate() {
        writeln!(s, "{k},{c}").expect("write to String");
    }
    s
}

pub fn coefficients_from_csv<T: Scalar>(text: &str) -> Result<DVector<T>> {
    let m = matrix_from_csv::<T>(text)?;
    if m.ncols() != 2 {
        return Err(Error::Parse("coefficient CSV needs `index,value` rows".into()));
    }
    Ok(m.column(1).into_owned())
}
