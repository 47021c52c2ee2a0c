//! Dense linear-algebra helpers built on nalgebra's decompositions.

use nalgebra::{DMatrix, DVector, SVD};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest accepted condition number for user-supplied transforms.
pub const MAX_CONDITION: f64 = 1e12;

/// Singular values in descending order.
pub fn singular_values<T: Real>(a: &DMatrix<T>) -> Vec<T> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<T> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// 2-norm condition number; infinite for rank-deficient matrices.
pub fn condition_number<T: Real>(a: &DMatrix<T>) -> f64 {
    let s = singular_values(a);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > T::zero() && s.len() == a.nrows().min(a.ncols()) => {
            (hi / lo).as_f64()
        }
        _ => f64::INFINITY,
    }
}

/// Numerical rank with singular values above `rel_tol · σ₁`.
pub fn rank<T: Real>(a: &DMatrix<T>, rel_tol: T) -> usize {
    let s = singular_values(a);
    match s.first() {
        Some(&hi) if hi > T::zero() => s.iter().filter(|&&v| v > rel_tol * hi).count(),
        _ => 0,
    }
}

/// Inverts a square matrix after checking its conditioning. `index` is the
/// 1-based position reported in the error (e.g. which transform failed).
pub fn checked_inverse<T: Real>(a: &DMatrix<T>, index: usize) -> Result<DMatrix<T>> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: a.ncols(),
        });
    }
    let condition = condition_number(a);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::SingularTransform { index, condition });
    }
    a.clone()
        .lu()
        .try_inverse()
        .ok_or(Error::SingularTransform { index, condition })
}

/// Orthonormal basis (as columns) of the null space of `a`, using singular
/// values below `rel_tol · σ₁` as zero.
pub fn null_space<T: Real>(a: &DMatrix<T>, rel_tol: T) -> DMatrix<T> {
    let (m, n) = a.shape();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    // Pad wide matrices to square so the SVD returns all n right singular vectors.
    let work = if m < n {
        let mut sq = DMatrix::zeros(n, n);
        sq.rows_mut(0, m).copy_from(a);
        sq
    } else {
        a.clone()
    };
    let svd = SVD::new(work, false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma = &svd.singular_values;
    let hi = sigma.iter().fold(T::zero(), |acc, &v| acc.max(v));
    let cutoff = rel_tol * hi;
    let cols: Vec<DVector<T>> = (0..sigma.len())
        .filter(|&i| hi == T::zero() || sigma[i] <= cutoff)
        .map(|i| v_t.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Orthonormal basis of the orthogonal complement of the column space of `v`.
pub fn orthogonal_complement<T: Real>(v: &DMatrix<T>, rel_tol: T) -> DMatrix<T> {
    null_space(&v.transpose(), rel_tol)
}

/// Power-iteration estimate of the largest singular value of `a`.
pub fn spectral_norm_estimate<T: Real>(a: &DMatrix<T>, iterations: usize) -> T {
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return T::zero();
    }
    // Deterministic, non-symmetric start so we do not begin orthogonal to the top vector.
    let mut x = DVector::from_fn(n, |i, _| T::one() + T::lit(0.1) * T::lit(((i * 7919) % 13) as f64));
    x /= x.norm();
    let mut est = T::zero();
    for _ in 0..iterations {
        let y = a.transpose() * (a * &x);
        let ny = y.norm();
        if ny == T::zero() {
            return T::zero();
        }
        est = ny.sqrt();
        x = y / ny;
    }
    let exact_on_x = (a * &x).norm();
    est.max(exact_on_x)
}

/// Minimum-norm least-squares solution of `a·x ≈ b`.
pub fn lstsq<T: Real>(a: &DMatrix<T>, b: &DVector<T>) -> DVector<T> {
    if a.ncols() == 0 {
        return DVector::zeros(0);
    }
    let svd = SVD::new(a.clone(), true, true);
    let hi = svd.singular_values.iter().fold(T::zero(), |acc, &v| acc.max(v));
    let eps = T::default_epsilon() * T::from_usize_lossy(a.nrows().max(a.ncols())) * hi;
    svd.solve(b, eps).expect("U and V computed")
}

/// Solves a symmetric positive (semi)definite system, falling back to LU.
pub fn solve_spd<T: Real>(a: &DMatrix<T>, b: &DVector<T>) -> Result<DVector<T>> {
    if let Some(ch) = a.clone().cholesky() {
        return Ok(ch.solve(b));
    }
    solve_general(a, b)
}

pub fn solve_general<T: Real>(a: &DMatrix<T>, b: &DVector<T>) -> Result<DVector<T>> {
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Singular(format!("{}x{} system", a.nrows(), a.ncols())))
}

/// Largest absolute entrywise difference.
pub fn max_abs_diff<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |acc, (&x, &y)| acc.max((x - y).abs()))
}
