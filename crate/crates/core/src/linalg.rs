//! Small dense solves on top of nalgebra.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

/// Row-major complex matrix as used in reports.
pub(crate) fn to_rows(m: &DMatrix<Complex64>) -> Vec<Vec<Complex64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub(crate) fn inverse(m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    m.clone().try_inverse().ok_or(Error::Singular)
}

pub(crate) fn matvec(m: &DMatrix<Complex64>, v: &[Complex64]) -> Vec<Complex64> {
    (m * DVector::from_column_slice(v))
        .iter()
        .copied()
        .collect()
}

/// Solves the square real system `a x = b`.
pub(crate) fn solve(a: DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    a.lu()
        .solve(&DVector::from_column_slice(b))
        .map(|x| x.iter().copied().collect())
        .ok_or(Error::Singular)
}

/// `max_i |v_i|`.
pub(crate) fn max_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Largest absolute row sum.
pub(crate) fn inf_norm(m: &DMatrix<Complex64>) -> f64 {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}
