//! Dense complex Hermitian linear algebra.
//!
//! Everything downstream (states, measurements, the minimax solver) is
//! expressed through [`ComplexMatrix`] and the handful of spectral
//! operations defined here. The eigensolver is nalgebra's Hermitian
//! tridiagonal QR; its contract is the reconstruction bound checked in the
//! tests, not any particular algorithm.

use std::ops::{Add, Deref, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default cap on the dimension of any constructed matrix.
pub const DEFAULT_DIM_CAP: usize = 4096;

/// Default relative threshold separating a support from numerical noise.
pub const DEFAULT_KERNEL_TOL: f64 = 1e-12;

const HERMITIAN_TOL: f64 = 1e-8;
const PSD_TOL: f64 = 1e-10;
const EIG_MAX_ITERS: usize = 1_000_000;

/// Dense square complex matrix with finite entries and dimension at least 1.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidMatrix(format!(
                "not square: {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidMatrix("dimension must be at least 1".into()));
        }
        if let Some(idx) = m.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidMatrix(format!(
                "non-finite entry at ({}, {})",
                idx % m.nrows(),
                idx / m.nrows()
            )));
        }
        Ok(Self(m))
    }

    /// Wraps a matrix produced by arithmetic on already-valid matrices.
    pub(crate) fn from_raw(m: DMatrix<Complex64>) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        Self(m)
    }

    /// Builds a matrix from row-major rows.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(Error::InvalidMatrix(format!(
                "row {i} has {} entries, expected {dim}",
                r.len()
            )));
        }
        Self::new(DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let v = DVector::from_iterator(diag.len(), diag.iter().map(|&x| Complex64::new(x, 0.0)));
        Self(DMatrix::from_diagonal(&v))
    }

    /// The rank-one operator |v><v|.
    pub fn outer(v: &DVector<Complex64>) -> Self {
        Self(v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// ||A - A^H||_F.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.0 - self.0.adjoint()).norm()
    }

    /// (A + A^H) / 2.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(&self.0 * Complex64::new(s, 0.0))
    }

    /// Re Tr(A B) without forming the product.
    pub fn trace_product_re(&self, other: &ComplexMatrix) -> f64 {
        let (a, b) = (&self.0, &other.0);
        let n = a.nrows();
        let mut acc = 0.0;
        for i in 0..n {
            for k in 0..n {
                let x = a[(i, k)] * b[(k, i)];
                acc += x.re;
            }
        }
        acc
    }
}

impl Deref for ComplexMatrix {
    type Target = DMatrix<Complex64>;

    fn deref(&self) -> &Self::Target {
        &self.0
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

/// Spectral decomposition A = V diag(eigenvalues) V^H with ascending
/// eigenvalues and orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct HermitianEigenSystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<Complex64>,
}

impl HermitianEigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("dimension is at least 1")
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Largest eigenvalue magnitude, i.e. the operator norm.
    pub fn spectral_norm(&self) -> f64 {
        self.max_eigenvalue().abs().max(self.min_eigenvalue().abs())
    }

    /// V f(Λ) V^H, hermitized.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            let s = f(lam);
            for z in scaled.column_mut(j).iter_mut() {
                *z *= s;
            }
        }
        ComplexMatrix(&scaled * v.adjoint()).hermitian_part()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_eigenvalues(|x| x)
    }

    /// Projector onto the span of eigenvectors whose eigenvalue satisfies `keep`.
    pub fn spectral_projector(&self, keep: impl Fn(f64) -> bool) -> ComplexMatrix {
        self.map_eigenvalues(|x| if keep(x) { 1.0 } else { 0.0 })
    }

    /// Columns of V whose eigenvalue satisfies `keep`, in ascending order.
    pub fn eigenvector_columns(&self, keep: impl Fn(f64) -> bool) -> DMatrix<Complex64> {
        let cols: Vec<usize> = (0..self.dim()).filter(|&j| keep(self.eigenvalues[j])).collect();
        DMatrix::from_fn(self.dim(), cols.len(), |i, k| self.eigenvectors[(i, cols[k])])
    }
}

fn psd_threshold(eig: &HermitianEigenSystem) -> f64 {
    PSD_TOL * eig.spectral_norm()
}

fn check_psd(eig: &HermitianEigenSystem) -> Result<()> {
    let min = eig.min_eigenvalue();
    if min < -psd_threshold(eig) {
        return Err(Error::NotPsd { eigenvalue: min });
    }
    Ok(())
}

pub fn herm_eig(a: &ComplexMatrix) -> Result<HermitianEigenSystem> {
    let defect = a.hermiticity_defect();
    if defect > HERMITIAN_TOL * a.frobenius_norm().max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    let h = a.hermitian_part().into_inner();
    let dim = h.nrows();
    let eig = h
        .try_symmetric_eigen(f64::EPSILON, EIG_MAX_ITERS)
        .ok_or_else(|| Error::NumericalFailure(format!("eigensolver did not converge (dim {dim})")))?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if eigenvalues.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericalFailure("non-finite eigenvalue".into()));
    }
    let eigenvectors = DMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermitianEigenSystem { eigenvalues, eigenvectors })
}

/// Principal square root of a PSD matrix; eigenvalues slightly below zero
/// (within 1e-10 of the spectral norm) are clamped. Eigenvalues below the
/// eigensolver's resolution are treated as exact zeros, since their square
/// roots would otherwise inject O(√ε) noise.
pub fn psd_sqrt(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = herm_eig(a)?;
    check_psd(&eig)?;
    let floor = resolution_floor(&eig);
    Ok(eig.map_eigenvalues(|x| if x > floor { x.sqrt() } else { 0.0 }))
}

fn resolution_floor(eig: &HermitianEigenSystem) -> f64 {
    4.0 * eig.dim() as f64 * f64::EPSILON * eig.spectral_norm()
}

/// Pseudo-inverse square root: λ ↦ λ^{-1/2} on eigenvalues above
/// `kernel_tol · λ_max`, zero elsewhere.
pub fn inv_sqrt_on_support(a: &ComplexMatrix, kernel_tol: f64) -> Result<ComplexMatrix> {
    if !(kernel_tol > 0.0) {
        return Err(Error::InvalidArgument(format!("kernel_tol must be positive, got {kernel_tol}")));
    }
    let eig = herm_eig(a)?;
    check_psd(&eig)?;
    let cut = kernel_tol * eig.max_eigenvalue().max(0.0);
    Ok(eig.map_eigenvalues(|x| if x > cut && x > 0.0 { x.sqrt().recip() } else { 0.0 }))
}

/// Sum of singular values.
pub fn trace_norm(a: &ComplexMatrix) -> Result<f64> {
    let svd = a
        .as_matrix()
        .clone()
        .try_svd(false, false, f64::EPSILON, EIG_MAX_ITERS)
        .ok_or_else(|| Error::NumericalFailure("SVD did not converge".into()))?;
    let s: f64 = svd.singular_values.iter().sum();
    if !s.is_finite() {
        return Err(Error::NumericalFailure("non-finite singular value".into()));
    }
    Ok(s)
}

/// Kronecker product with A's index major, refusing results above `DEFAULT_DIM_CAP`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    kron_capped(a, b, DEFAULT_DIM_CAP)
}

pub fn kron_capped(a: &ComplexMatrix, b: &ComplexMatrix, cap: usize) -> Result<ComplexMatrix> {
    let dim = a.dim() as u128 * b.dim() as u128;
    if dim > cap as u128 {
        return Err(Error::DimensionOverflow { dim, cap });
    }
    Ok(ComplexMatrix(a.as_matrix().kronecker(b.as_matrix())))
}

/// d^n as u128, saturating.
pub(crate) fn checked_power_dim(d: usize, n: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..n {
        acc = acc.saturating_mul(d as u128);
    }
    acc
}
