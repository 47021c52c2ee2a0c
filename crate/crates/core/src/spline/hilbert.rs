use nalgebra::{DMatrix, DVector};

use super::biortho::{build_biortho, reduce_measurements};
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;

/// Solution `f = Φ a + P b` of the quadratic semi-norm problem.
#[derive(Debug, Clone, PartialEq)]
pub struct HilbertFit<T> {
    /// Grid values of the minimizer.
    pub f: DVector<T>,
    /// Coefficients of `φ_m = (LᵀL)⁺ ν̃_mᵀ`.
    pub a: DVector<T>,
    /// Null-space coefficients.
    pub b: DVector<T>,
    pub objective: T,
    pub seminorm_squared: T,
    /// `‖2νᵀ(νf − y) + 2λLᵀLf‖∞`
    pub gradient_residual: T,
}

/// `(LᵀL)⁺`, assuming the null space of `L` is spanned by the columns of `p`.
pub fn seminorm_pseudo_inverse<T: Real>(l: &DMatrix<T>, p: &DMatrix<T>) -> Result<DMatrix<T>> {
    let g = l.ncols();
    if p.nrows() != g {
        return Err(Error::DimensionMismatch { expected: g, got: p.nrows() });
    }
    let scale = l.amax().max(T::one()) * p.amax().max(T::one());
    if !((l * p).amax() <= T::lit(1e-8) * scale) {
        return Err(Error::InvalidParameter("null-space basis is not annihilated by the operator".into()));
    }
    let q = if p.ncols() == 0 {
        DMatrix::zeros(g, 0)
    } else {
        p.clone().qr().q()
    };
    let qq = &q * q.transpose();
    let shifted = l.transpose() * l + &qq;
    let inv = shifted
        .cholesky()
        .ok_or_else(|| Error::Singular("operator null space is larger than the given basis".into()))?
        .inverse();
    Ok(inv - qq)
}

/// Minimizes `‖y − νf‖² + λ‖Lf‖²` with the null space of `L` (spanned by
/// `p`) unpenalized.
///
/// With the orthonormal complement `U = Ũ` of `V = νP`, the optimum is
/// `a = (G̃ + λI)^{-1} Ũᵀ y` with `G̃ = ν̃ (LᵀL)⁺ ν̃ᵀ`, followed by the
/// least-squares fit of `b` to the remaining residual on `col(V)`.
pub fn fit_hilbert_seminorm<T: Real>(
    nu: &DMatrix<T>,
    y: &DVector<T>,
    p: &DMatrix<T>,
    l: &DMatrix<T>,
    lambda: T,
) -> Result<HilbertFit<T>> {
    if !(lambda > T::zero()) {
        return Err(Error::InvalidParameter("lambda must be > 0".into()));
    }
    if nu.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: nu.nrows(),
            got: y.len(),
        });
    }
    if nu.ncols() != l.ncols() {
        return Err(Error::DimensionMismatch {
            expected: l.ncols(),
            got: nu.ncols(),
        });
    }
    let v = nu * p;
    let sys = build_biortho(&v, None)?;
    let (nu_tilde, _) = reduce_measurements(nu, &sys)?;
    let pinv = seminorm_pseudo_inverse(l, p)?;
    let phi = &pinv * nu_tilde.transpose();
    let gram = &nu_tilde * &phi;
    let k = gram.nrows();
    let a = linalg::solve_spd(&(&gram + DMatrix::identity(k, k) * lambda), &(sys.utilde.transpose() * y))?;
    let smooth = &phi * &a;
    let b = linalg::lstsq(&v, &(y - nu * &smooth));
    let f = smooth + p * &b;
    let lf = l * &f;
    let r = nu * &f - y;
    let two = T::lit(2.0);
    let gradient = nu.transpose() * &r * two + l.transpose() * &lf * (two * lambda);
    let seminorm_squared = lf.norm_squared();
    Ok(HilbertFit {
        objective: r.norm_squared() + lambda * seminorm_squared,
        seminorm_squared,
        gradient_residual: gradient.amax(),
        f,
        a,
        b,
    })
}
