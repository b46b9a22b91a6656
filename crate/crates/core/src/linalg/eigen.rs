use crate::error::{QpcpError, Result};

use super::matrix::{ComplexMatrix, HERMITIAN_TOL};

/// Spectral decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Column `j` is the unit eigenvector for `values[j]`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, j: usize) -> Vec<super::C64> {
        (0..self.vectors.rows()).map(|r| self.vectors.get(r, j)).collect()
    }
}

fn require_hermitian(h: &ComplexMatrix) -> Result<()> {
    if !h.is_square() {
        return Err(QpcpError::NonSquare { rows: h.rows(), cols: h.cols() });
    }
    let deviation = h.hermiticity_error();
    if deviation > HERMITIAN_TOL {
        return Err(QpcpError::NotHermitian { deviation });
    }
    Ok(())
}

/// Eigendecomposition after symmetrizing to (A+A†)/2. Backed by nalgebra's
/// Householder tridiagonalization followed by implicit QR sweeps.
pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<HermitianEigen> {
    require_hermitian(h)?;
    let sym = h.hermitian_part();
    let eig = sym.to_nalgebra().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let n = h.rows();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// Ascending eigenvalues only.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    require_hermitian(h)?;
    if h.rows() == 2 {
        let (lo, hi) = eig2(h);
        return Ok(vec![lo, hi]);
    }
    let mut values: Vec<f64> = h.hermitian_part().to_nalgebra().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

fn eig2(h: &ComplexMatrix) -> (f64, f64) {
    let a = h.get(0, 0).re;
    let d = h.get(1, 1).re;
    let b = (h.get(0, 1) + h.get(1, 0).conj()) * 0.5;
    let mid = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    (mid - rad, mid + rad)
}

pub fn min_eigenvalue(h: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(h)?.first().copied().unwrap_or(0.0))
}

pub fn max_eigenvalue(h: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(h)?.last().copied().unwrap_or(0.0))
}

/// Largest singular value.
pub fn operator_norm(a: &ComplexMatrix) -> Result<f64> {
    if !a.is_square() {
        return Err(QpcpError::NonSquare { rows: a.rows(), cols: a.cols() });
    }
    if a.rows() == 0 {
        return Ok(0.0);
    }
    if a.is_hermitian(1e-12) {
        let v = hermitian_eigenvalues(a)?;
        return Ok(v[0].abs().max(v[v.len() - 1].abs()));
    }
    Ok(a.to_nalgebra().singular_values().iter().copied().fold(0.0, f64::max))
}

/// Sum of singular values.
pub fn trace_norm(a: &ComplexMatrix) -> Result<f64> {
    if !a.is_square() {
        return Err(QpcpError::NonSquare { rows: a.rows(), cols: a.cols() });
    }
    if a.is_hermitian(1e-12) {
        return Ok(hermitian_eigenvalues(a)?.iter().map(|v| v.abs()).sum());
    }
    Ok(a.to_nalgebra().singular_values().iter().sum())
}
