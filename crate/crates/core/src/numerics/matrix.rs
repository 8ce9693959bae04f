use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{NumericsError, Result};

/// Dense square complex matrix; houses evaluated admittance matrices,
/// Kron-reduced matrices, pseudo-inverses and effective-impedance tables.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix { inner: DMatrix::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        ComplexMatrix { inner: DMatrix::identity(dim, dim) }
    }

    /// Row-major entries, `dim*dim` of them.
    pub fn from_rows(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(NumericsError::DimensionMismatch(format!(
                "expected {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(ComplexMatrix {
            inner: DMatrix::from_row_iterator(dim, dim, entries),
        })
    }

    pub fn from_dmatrix(m: DMatrix<Complex64>) -> Result<Self> {
        if !m.is_square() {
            return Err(NumericsError::DimensionMismatch(format!(
                "matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(ComplexMatrix { inner: m })
    }

    pub fn from_real(m: &DMatrix<f64>) -> Self {
        ComplexMatrix { inner: m.map(|x| Complex64::new(x, 0.0)) }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.inner[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.inner[(i, j)] = v;
    }

    pub fn inner(&self) -> &DMatrix<Complex64> {
        &self.inner
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.iter().fold(0.0f64, |a, z| a.max(z.norm()))
    }

    pub fn frobenius(&self) -> f64 {
        self.inner.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |A_nm - A_mn|` over all pairs.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.dim();
        let mut d = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                d = d.max((self.inner[(i, j)] - self.inner[(j, i)]).norm());
            }
        }
        d
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        let m = self.max_abs();
        m == 0.0 || self.symmetry_defect() <= rel_tol * m
    }

    pub fn row_sum(&self, i: usize) -> Complex64 {
        (0..self.dim()).map(|j| self.inner[(i, j)]).sum()
    }

    pub fn max_row_sum_abs(&self) -> f64 {
        (0..self.dim()).map(|i| self.row_sum(i).norm()).fold(0.0, f64::max)
    }

    pub fn mul(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix { inner: &self.inner * &rhs.inner }
    }

    pub fn add(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix { inner: &self.inner + &rhs.inner }
    }

    pub fn sub(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix { inner: &self.inner - &rhs.inner }
    }

    pub fn scale(&self, k: Complex64) -> ComplexMatrix {
        ComplexMatrix { inner: self.inner.map(|z| z * k) }
    }

    /// Solve `A X = B` by partial-pivoted LU. Errors with `SingularMatrix`
    /// when pivot growth collapses, which is how the pathological
    /// interior-block case surfaces.
    pub fn solve(&self, b: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.solve_dmatrix(&b.inner).map(|inner| ComplexMatrix { inner })
    }

    pub fn solve_dmatrix(&self, b: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        if b.nrows() != self.dim() {
            return Err(NumericsError::DimensionMismatch(format!(
                "rhs has {} rows, matrix is {}x{}",
                b.nrows(),
                self.dim(),
                self.dim()
            )));
        }
        let lu = self.inner.clone().lu();
        let u = lu.u();
        let mut pmin = f64::INFINITY;
        let mut pmax = 0.0f64;
        for i in 0..self.dim() {
            let p = u[(i, i)].norm();
            pmin = pmin.min(p);
            pmax = pmax.max(p);
        }
        if pmax == 0.0 || pmin <= 1e-14 * pmax {
            return Err(NumericsError::SingularMatrix);
        }
        lu.solve(b).ok_or(NumericsError::SingularMatrix)
    }

    pub fn solve_vector(&self, b: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        let m = DMatrix::from_column_slice(b.len(), 1, b.as_slice());
        let x = self.solve_dmatrix(&m)?;
        Ok(DVector::from_column_slice(x.as_slice()))
    }

    pub fn inverse(&self) -> Result<ComplexMatrix> {
        self.solve(&ComplexMatrix::identity(self.dim()))
    }

    /// Largest singular value.
    pub fn svd_max(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        self.inner.clone().svd(false, false).singular_values.max()
    }
}

/// Eigendecomposition of a real symmetric matrix: `M = Q diag(vals) Q^T` with
/// eigenvalues sorted ascending and `Q` columns matching that order.
pub fn sym_eig(m: &DMatrix<f64>, structural_tol: f64) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let scale = m.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let mut defect = 0.0f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            defect = defect.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    if scale > 0.0 && defect > structural_tol * scale {
        return Err(NumericsError::NotSymmetric { defect, tol: structural_tol * scale });
    }
    let n = m.nrows();
    let se = nalgebra::SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let vals: Vec<f64> = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let mut q = DMatrix::<f64>::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        q.set_column(col, &se.eigenvectors.column(k));
    }
    Ok((vals, q))
}
