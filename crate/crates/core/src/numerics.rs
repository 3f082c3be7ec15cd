//! Dense complex linear algebra used throughout the crate.
//!
//! Matrices are plain `nalgebra` column-major containers over [`c64`]. This
//! module adds the handful of operations the optimizers need on top of them:
//! a sorted Hermitian eigendecomposition, the column-wise Khatri–Rao product,
//! column-stacking vectorization, and a few positive-definite helpers.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{dim_err, Error, Result};

#[allow(non_camel_case_types)]
pub type c64 = Complex64;
pub type CMat = DMatrix<c64>;
pub type CVec = DVector<c64>;

/// Relative Hermitian tolerance accepted by [`hermitian_eig`].
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Absolute tolerance used when an operand is exactly zero.
pub const ZERO_TOL: f64 = 1e-12;

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl EigenPair {
    /// Columns belonging to the `count` smallest eigenvalues.
    pub fn smallest(&self, count: usize) -> CMat {
        self.vectors.columns(0, count).into_owned()
    }
}

/// Hermitian eigendecomposition with eigenvalues sorted ascending.
///
/// The input is symmetrized as `(A + Aᴴ)/2` before decomposition. Inputs whose
/// asymmetry exceeds [`HERMITIAN_TOL`] relative to `‖A‖_F` are rejected.
pub fn hermitian_eig(a: &CMat) -> Result<EigenPair> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let adj = a.adjoint();
    let asym = (a - &adj).norm();
    let scale = a.norm();
    let allowed = if scale == 0.0 { ZERO_TOL } else { HERMITIAN_TOL * scale };
    if asym > allowed {
        return Err(Error::NotHermitian {
            asymmetry: if scale == 0.0 { asym } else { asym / scale },
        });
    }
    let sym = (a + adj).scale(0.5);
    let eig = SymmetricEigen::new(sym);

    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(EigenPair { values, vectors })
}

/// Column-wise Kronecker product: column `j` of the result is `a_j ⊗ b_j`.
///
/// With this ordering `vec(X·diag(y)·Z) = khatri_rao(Zᵀ, X)·y`.
pub fn khatri_rao(a: &CMat, b: &CMat) -> Result<CMat> {
    if a.ncols() != b.ncols() {
        return Err(dim_err(
            "khatri_rao",
            format!("column counts {} and {}", a.ncols(), b.ncols()),
        ));
    }
    let (m, n) = (a.nrows(), b.nrows());
    Ok(CMat::from_fn(m * n, a.ncols(), |row, col| {
        a[(row / n, col)] * b[(row % n, col)]
    }))
}

/// Stacks the columns of `m` into one vector.
pub fn vectorize(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

/// Sum of squared entry magnitudes.
pub fn frobenius_sq(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

pub fn hadamard(a: &CVec, b: &CVec) -> CVec {
    a.component_mul(b)
}

/// `A · diag(d)` without forming the diagonal matrix.
pub fn scale_columns(a: &CMat, d: &[c64]) -> CMat {
    debug_assert_eq!(a.ncols(), d.len());
    let mut out = a.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        col *= d[j];
    }
    out
}

/// `diag(d) · A` without forming the diagonal matrix.
pub fn scale_rows(a: &CMat, d: &[c64]) -> CMat {
    debug_assert_eq!(a.nrows(), d.len());
    let mut out = a.clone();
    for (i, mut row) in out.row_iter_mut().enumerate() {
        row *= d[i];
    }
    out
}

/// Diagonal entries of a square matrix.
pub fn diagonal(a: &CMat) -> CVec {
    a.diagonal()
}

pub fn real_diag(values: &[f64]) -> CMat {
    CMat::from_diagonal(&CVec::from_iterator(
        values.len(),
        values.iter().map(|&v| c64::new(v, 0.0)),
    ))
}

pub fn is_finite(a: &CMat) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn cholesky(a: &CMat) -> Result<Cholesky<c64, nalgebra::Dyn>> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let sym = (a + a.adjoint()).scale(0.5);
    let chol = Cholesky::new(sym).ok_or(Error::NotPositiveDefinite)?;
    // Complex Cholesky takes complex square roots, so a negative pivot
    // shows up as a non-real diagonal entry instead of a failure.
    let pivots_ok = chol
        .l_dirty()
        .diagonal()
        .iter()
        .all(|z| z.re > 0.0 && z.re.is_finite() && z.im.abs() <= ZERO_TOL * z.re);
    if pivots_ok {
        Ok(chol)
    } else {
        Err(Error::NotPositiveDefinite)
    }
}

/// Inverse of a Hermitian positive-definite matrix.
pub fn inverse_pd(a: &CMat) -> Result<CMat> {
    Ok(cholesky(a)?.inverse())
}

/// `log₂ det(A)` for a Hermitian positive-definite matrix.
pub fn log2_det_pd(a: &CMat) -> Result<f64> {
    let l = cholesky(a)?;
    let ln_det: f64 = l.l_dirty().diagonal().iter().map(|z| 2.0 * z.re.ln()).sum();
    Ok(ln_det / std::f64::consts::LN_2)
}

/// Ratio of largest to smallest singular value; infinite for a singular input.
pub fn condition_number(a: &CMat) -> f64 {
    let sv = a.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Real inner product `Re{xᴴy}` of the underlying real vector space.
pub fn real_inner(x: &CVec, y: &CVec) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| (a.conj() * b).re).sum()
}

pub fn norm_sq(x: &CVec) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}
