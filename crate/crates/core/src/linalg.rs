//! Dense complex matrices and the handful of decompositions the lab needs.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::tolerance;

/// Dense complex matrix stored column-major by nalgebra; indexing is logical
/// `(row, col)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        Self(m)
    }

    /// Build from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, entries)))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Ok(Self(DMatrix::from_fn(r, c, |i, j| {
            Complex64::new(rows[i][j], 0.0)
        })))
    }

    pub fn from_nalgebra(m: DMatrix<Complex64>) -> Self {
        Self(m)
    }

    pub fn as_nalgebra(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_nalgebra(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.0[(row, col)] = value;
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.nrows() * self.ncols());
        for i in 0..self.nrows() {
            for j in 0..self.ncols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self(self.0.map(|z| z * c))
    }

    /// `(M + M*)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0))
    }

    /// Diagonal entries when the matrix is exactly diagonal with real entries.
    pub fn as_real_diagonal(&self) -> Option<Vec<f64>> {
        if !self.is_square() {
            return None;
        }
        let n = self.nrows();
        let mut diag = Vec::with_capacity(n);
        for j in 0..n {
            for i in 0..n {
                let z = self.0[(i, j)];
                if i == j {
                    if z.im != 0.0 {
                        return None;
                    }
                    diag.push(z.re);
                } else if z != Complex64::new(0.0, 0.0) {
                    return None;
                }
            }
        }
        Some(diag)
    }

    /// Matrix product, scaling rows or columns when a factor is exactly diagonal.
    pub fn product(&self, rhs: &Self) -> Self {
        assert_eq!(self.ncols(), rhs.nrows(), "product shape mismatch");
        if let Some(d) = self.as_real_diagonal() {
            let mut out = rhs.0.clone();
            for (i, &di) in d.iter().enumerate() {
                out.row_mut(i).scale_mut(di);
            }
            return Self(out);
        }
        if let Some(d) = rhs.as_real_diagonal() {
            let mut out = self.0.clone();
            for (j, &dj) in d.iter().enumerate() {
                out.column_mut(j).scale_mut(dj);
            }
            return Self(out);
        }
        Self(&self.0 * &rhs.0)
    }

    fn hermitian_residual(&self) -> f64 {
        (&self.0 - self.0.adjoint()).norm()
    }

    fn reference_scale(&self) -> f64 {
        self.frobenius_norm().max(1.0)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermitian_residual() <= tol * self.reference_scale()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let n = self.nrows();
        let residual = (self.0.adjoint() * &self.0 - DMatrix::<Complex64>::identity(n, n)).norm();
        residual <= tol * (n as f64).sqrt().max(1.0)
    }

    pub fn is_projection(&self, tol: f64) -> bool {
        if !self.is_hermitian(tol) {
            return false;
        }
        let residual = (&self.0 * &self.0 - &self.0).norm();
        residual <= tol * self.reference_scale()
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.product(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

/// Complex Gaussian matrix whose real and imaginary parts are independent
/// standard normals.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let mut m = DMatrix::zeros(rows, cols);
    // Fill in row-major order so the draw sequence does not depend on storage.
    for i in 0..rows {
        for j in 0..cols {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            m[(i, j)] = Complex64::new(re, im);
        }
    }
    ComplexMatrix(m)
}

/// First `cols` columns of a Haar unitary on `C^rows`.
///
/// A Ginibre matrix is orthonormalized by QR and each column is multiplied by
/// the phase `r_jj / |r_jj|`, so the triangular factor carries a positive
/// diagonal and the orthonormal factor is exactly Haar distributed.
pub fn haar_isometry<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> Result<ComplexMatrix> {
    if rows == 0 {
        return Err(Error::Dimension("Haar sampling needs N >= 1".into()));
    }
    if cols > rows {
        return Err(Error::Dimension(format!(
            "isometry with {cols} columns in dimension {rows}"
        )));
    }
    if cols == 0 {
        return Ok(ComplexMatrix::zeros(rows, 0));
    }
    let g = ginibre(rows, cols, rng);
    let qr = g.0.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        let d = r[(j, j)];
        let norm = d.norm();
        let phase = if norm > 0.0 {
            d / norm
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..rows {
            q[(i, j)] *= phase;
        }
    }
    Ok(ComplexMatrix(q))
}

/// Haar-distributed unitary in dimension `n`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<ComplexMatrix> {
    haar_isometry(n, n, rng)
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Columns are eigenvectors, in the order of `values`.
    pub vectors: Option<ComplexMatrix>,
}

/// Eigenvalues (ascending) and optionally eigenvectors of a Hermitian matrix.
pub fn hermitian_eigs(m: &ComplexMatrix, want_vectors: bool) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::Shape(format!(
            "eigensolver needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if !m.is_hermitian(tolerance::STRUCTURAL) {
        return Err(Error::Shape(format!(
            "matrix is not Hermitian (residual {:e})",
            m.hermitian_residual()
        )));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(HermitianEigen {
            values: Vec::new(),
            vectors: want_vectors.then(|| ComplexMatrix::zeros(0, 0)),
        });
    }
    let sym = m.hermitian_part().0;

    if !want_vectors {
        let mut values: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        return Ok(HermitianEigen {
            values,
            vectors: None,
        });
    }

    let eig = SymmetricEigen::try_new(sym.clone(), f64::EPSILON, tolerance::EIGEN_MAX_ITER)
        .ok_or_else(|| Error::numeric("Hermitian eigensolver did not converge", f64::NAN))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);

    let lambda = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(values[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let residual = (&sym - &vectors * lambda * vectors.adjoint()).norm();
    let scale = sym.norm().max(f64::MIN_POSITIVE);
    if residual > tolerance::EIGEN_RECONSTRUCTION * scale {
        return Err(Error::numeric(
            "eigendecomposition fails the reconstruction bound",
            residual / scale,
        ));
    }
    Ok(HermitianEigen {
        values,
        vectors: Some(ComplexMatrix(vectors)),
    })
}

/// `M^{-1/2}` for a Hermitian positive definite `M`.
pub fn inv_sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eigs(m, true)?;
    let n = m.nrows();
    let spectral_norm = eig.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let floor = n as f64 * 1e-12 * spectral_norm;
    let smallest = eig.values.first().copied().unwrap_or(0.0);
    if n > 0 && smallest <= floor {
        return Err(Error::numeric("matrix is singular or indefinite", smallest));
    }
    let v = eig.vectors.expect("vectors requested").0;
    let mut scaled = v.clone();
    for (j, &lam) in eig.values.iter().enumerate() {
        scaled.column_mut(j).scale_mut(1.0 / lam.sqrt());
    }
    let s = &scaled * v.adjoint();
    Ok(ComplexMatrix(s).hermitian_part())
}

/// Eigenvalues of a normal matrix, via a generic real combination of its
/// commuting Hermitian and skew parts.
///
/// Used as an independent cross-check on small unitary spectra.
pub fn normal_eigs(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(Error::Shape(
            "normal eigensolver needs a square matrix".into(),
        ));
    }
    let re = m.hermitian_part();
    let skew = (&m.0 - m.0.adjoint()) * Complex64::new(0.0, -0.5);
    let mix = std::f64::consts::SQRT_2 - 1.0;
    let h = ComplexMatrix(&re.0 + skew * Complex64::new(mix, 0.0));
    let eig = hermitian_eigs(&h, true)?;
    let v = eig.vectors.expect("vectors requested").0;
    Ok((0..m.nrows())
        .map(|j| {
            let col = v.column(j);
            (col.adjoint() * &m.0 * col)[(0, 0)]
        })
        .collect())
}
