//! Small dense linear-algebra helpers shared by the FPCA, pooled covariance
//! and simulation code.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Symmetric eigendecomposition with eigenvalues sorted in descending order.
#[derive(Debug, Clone)]
pub struct SortedEigen {
    pub values: DVector<f64>,
    /// Eigenvectors stored as columns, in the same order as `values`.
    pub vectors: DMatrix<f64>,
}

/// Largest absolute difference between `m` and its transpose.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Checks symmetry up to `rel_tol` times the largest absolute entry.
pub fn ensure_symmetric(m: &DMatrix<f64>, rel_tol: f64) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
            context: "square matrix",
        });
    }
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let asym = asymmetry(m);
    if asym > rel_tol * scale {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    Ok(())
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigendecomposition of a symmetric matrix, sorted by descending eigenvalue.
/// Only the lower triangle is trusted; the input is symmetrized first.
pub fn sorted_symmetric_eigen(m: &DMatrix<f64>) -> SortedEigen {
    let n = m.nrows();
    if n == 0 {
        return SortedEigen {
            values: DVector::zeros(0),
            vectors: DMatrix::zeros(0, 0),
        };
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    SortedEigen { values, vectors }
}

/// Projects a symmetric matrix onto the positive semidefinite cone by
/// clamping negative eigenvalues to zero.
pub fn nearest_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = sorted_symmetric_eigen(m);
    if eig.values.iter().all(|&v| v >= 0.0) {
        return symmetrize(m);
    }
    let clamped = eig.values.map(|v| v.max(0.0));
    let out = &eig.vectors * DMatrix::from_diagonal(&clamped) * eig.vectors.transpose();
    symmetrize(&out)
}
