use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;

/// Relative threshold on `σ_{N₀}/σ₁` below which `V` counts as rank deficient.
pub const RANK_TOL: f64 = 1e-10;

/// Decomposition of measurement space `ℝ^M` into the span of `V`
/// (measurements of the null-space basis) and a complement spanned by `U`,
/// together with the dual bases: `[Ũ | Ṽ]ᵀ [U | V] = I_M`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiorthoSystem<T: Real> {
    pub v: DMatrix<T>,
    pub u: DMatrix<T>,
    pub vtilde: DMatrix<T>,
    pub utilde: DMatrix<T>,
}

impl<T: Real> BiorthoSystem<T> {
    pub fn measurements(&self) -> usize {
        self.v.nrows()
    }

    pub fn null_dim(&self) -> usize {
        self.v.ncols()
    }

    /// `[Ũ | Ṽ]ᵀ [U | V] − I`, elementwise maximum.
    pub fn identity_defect(&self) -> T {
        let m = self.measurements();
        let left = hstack(&self.utilde, &self.vtilde);
        let right = hstack(&self.u, &self.v);
        linalg::max_abs_diff(&(left.transpose() * right), &DMatrix::identity(m, m))
    }

    /// Largest entry of `ŨᵀV`.
    pub fn annihilation_defect(&self) -> T {
        (self.utilde.transpose() * &self.v).amax()
    }

    /// Splits `w = U α + V β`, returning `(α, β) = (Ũᵀw, Ṽᵀw)`.
    pub fn split(&self, w: &DVector<T>) -> (DVector<T>, DVector<T>) {
        (self.utilde.transpose() * w, self.vtilde.transpose() * w)
    }
}

pub(crate) fn hstack<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// Fails with [`Error::RankDeficient`] unless `σ_{N₀}(V) > 1e−10·σ₁(V)`.
pub fn check_rank<T: Real>(v: &DMatrix<T>) -> Result<()> {
    let (m, n0) = v.shape();
    if n0 == 0 {
        return Ok(());
    }
    let sv = linalg::singular_values(v);
    let rank = linalg::rank(v, T::lit(RANK_TOL));
    if n0 > m || !(sv[n0 - 1] > T::lit(RANK_TOL) * sv[0]) {
        return Err(Error::RankDeficient { rank, required: n0 });
    }
    Ok(())
}

/// Orthonormal basis of the orthogonal complement of `col(v)`, with exactly
/// `rows − rank` columns when `v` has full column rank.
fn complement<T: Real>(v: &DMatrix<T>) -> DMatrix<T> {
    let (m, n0) = v.shape();
    if n0 == 0 {
        return DMatrix::identity(m, m);
    }
    let mut square = DMatrix::zeros(m, m);
    square.columns_mut(0, n0).copy_from(v);
    let svd = square.svd(true, false);
    let left = svd.u.expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let cols: Vec<DVector<T>> = order[n0..].iter().map(|&i| left.column(i).into_owned()).collect();
    if cols.is_empty() {
        DMatrix::zeros(m, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Completes the columns of `V` to a basis of `ℝ^M` and computes the dual basis.
///
/// Without a pinned `Ṽ`, `U` is an orthonormal basis of `col(V)^⊥`. With a
/// pinned `Ṽ` (which must satisfy `ṼᵀV = I`), `U` spans the null space of
/// `Ṽᵀ`, so that the dual basis obtained by inverting `[U | V]` reproduces
/// the pinned `Ṽ`.
pub fn build_biortho<T: Real>(v: &DMatrix<T>, pinned_vtilde: Option<&DMatrix<T>>) -> Result<BiorthoSystem<T>> {
    check_rank(v)?;
    let (m, n0) = v.shape();
    let u = match pinned_vtilde {
        None => complement(v),
        Some(vt) => {
            if vt.shape() != v.shape() {
                return Err(Error::DimensionMismatch {
                    expected: m * n0,
                    got: vt.nrows() * vt.ncols(),
                });
            }
            let defect = linalg::max_abs_diff(&(vt.transpose() * v), &DMatrix::identity(n0, n0));
            if !(defect <= T::lit(1e-10)) {
                return Err(Error::InvalidParameter(format!(
                    "pinned dual basis does not satisfy ṼᵀV = I (defect {:e})",
                    defect.as_f64()
                )));
            }
            complement(vt)
        }
    };
    let basis = hstack(&u, v);
    let inv = basis
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Singular("[U | V]".into()))?;
    let dual = inv.transpose();
    let utilde = dual.columns(0, m - n0).into_owned();
    let vtilde = match pinned_vtilde {
        Some(vt) => vt.clone(),
        None => dual.columns(m - n0, n0).into_owned(),
    };
    Ok(BiorthoSystem { v: v.clone(), u, vtilde, utilde })
}

/// Splits a measurement operator `ν` (rows = functionals over the grid) into
/// reduced functionals `ν̃ = Ũᵀν` that annihilate the null space and the
/// null-space dual functionals `p̃* = Ṽᵀν`, with `ν = U ν̃ + V p̃*`.
pub fn reduce_measurements<T: Real>(nu: &DMatrix<T>, sys: &BiorthoSystem<T>) -> Result<(DMatrix<T>, DMatrix<T>)> {
    if nu.nrows() != sys.measurements() {
        return Err(Error::DimensionMismatch {
            expected: sys.measurements(),
            got: nu.nrows(),
        });
    }
    Ok((sys.utilde.transpose() * nu, sys.vtilde.transpose() * nu))
}
