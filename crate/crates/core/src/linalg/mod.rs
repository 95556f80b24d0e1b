//! Dense kernels shared by the rest of the crate: matrix exponential,
//! general and symmetric eigenvalues, singular values and norms.
//!
//! Everything works on small `DMatrix<f64>` values; every routine allocates
//! its own workspace and is safe to call from several threads at once.

mod eigen;
mod expm;
mod svd;
mod symmetric;

pub use eigen::{eigenvalues, SpectrumReport};
pub use expm::{expm, integral_expm};
pub use svd::{singular_values, spectral_norm};
pub use symmetric::{is_positive_definite, symmetric_eigenvalues, Definiteness};

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Dense row/column matrix of doubles used throughout the crate.
pub type Matrix = DMatrix<f64>;

/// Largest absolute entry, 0 for an empty matrix.
pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Sum of absolute values down each column, maximised over columns.
pub fn norm_one(m: &Matrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub(crate) fn ensure_square(m: &Matrix, what: &'static str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare(what));
    }
    Ok(m.nrows())
}

pub(crate) fn ensure_finite(m: &Matrix, what: &'static str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub(crate) fn ensure_shape(m: &Matrix, what: &'static str, rows: usize, cols: usize) -> Result<()> {
    if m.shape() != (rows, cols) {
        return Err(Error::Shape {
            what,
            expected: (rows, cols),
            actual: m.shape(),
        });
    }
    Ok(())
}

/// Max-norm of `m - m^T`.
pub fn symmetry_residual(m: &Matrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    max_abs(&(m - m.transpose()))
}

pub(crate) fn ensure_symmetric(m: &Matrix, what: &'static str, tol: f64) -> Result<()> {
    ensure_square(m, what)?;
    let residual = symmetry_residual(m);
    if residual > tol {
        return Err(Error::NotSymmetric { what, residual });
    }
    Ok(())
}

/// Inverse of a nonsingular square matrix via partial-pivot LU.
pub(crate) fn inverse(m: &Matrix, what: &'static str) -> Result<Matrix> {
    ensure_square(m, what)?;
    m.clone().lu().try_inverse().ok_or(Error::Singular(what))
}

/// Builds a matrix from nested rows. Panics on ragged input; meant for
/// literals in tests and examples.
pub fn from_rows(rows: &[&[f64]]) -> Matrix {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    assert!(
        rows.iter().all(|r| r.len() == ncols),
        "ragged matrix literal"
    );
    Matrix::from_fn(nrows, ncols, |i, j| rows[i][j])
}

/// Block-diagonal matrix `diag(a, b)`.
pub fn block_diag(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = Matrix::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}
