use nalgebra::{DMatrix, DVector};

use super::prox::{fista_l1, l1_kkt_residual};
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{sign, Real};

/// Solution of the two-component sparse-plus-smooth problem.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedSolution<T> {
    pub x1: DVector<T>,
    pub x2: DVector<T>,
    /// Sparse synthesis coefficients `c₁ = L₁ x₁`.
    pub c1: DVector<T>,
    pub objective: T,
    pub kkt_residual: T,
    pub iterations: usize,
    pub converged: bool,
}

/// `‖y − H(x₁+x₂)‖² + λ₁‖L₁x₁‖₁ + λ₂‖L₂x₂‖₂²`
#[allow(clippy::too_many_arguments)]
pub fn mixed_objective<T: Real>(
    h: &DMatrix<T>,
    l1: &DMatrix<T>,
    l2: &DMatrix<T>,
    y: &DVector<T>,
    lambda1: T,
    lambda2: T,
    x1: &DVector<T>,
    x2: &DVector<T>,
) -> T {
    (y - h * (x1 + x2)).norm_squared() + lambda1 * (l1 * x1).lp_norm(1) + lambda2 * (l2 * x2).norm_squared()
}

/// Minimizes `‖y − H(x₁+x₂)‖² + λ₁‖L₁x₁‖₁ + λ₂‖L₂x₂‖₂²`.
///
/// Proximal gradient runs on `c₁ = L₁x₁`; for every `c₁` the quadratic block
/// is solved exactly, `(HᵀH + λ₂L₂ᵀL₂) x₂ = Hᵀ(y − H L₁^{-1} c₁)`.
#[allow(clippy::too_many_arguments)]
pub fn solve_mixed_two_component<T: Real>(
    h: &DMatrix<T>,
    l1: &DMatrix<T>,
    l2: &DMatrix<T>,
    y: &DVector<T>,
    lambda1: T,
    lambda2: T,
    max_iter: usize,
    tol: T,
) -> Result<MixedSolution<T>> {
    if !(lambda1 > T::zero() && lambda2 > T::zero()) {
        return Err(Error::InvalidParameter("lambda1 and lambda2 must be > 0".into()));
    }
    if h.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: h.nrows(),
            got: y.len(),
        });
    }
    let n = h.ncols();
    let l1_inv = linalg::checked_inverse(l1, 1)?;
    linalg::checked_inverse(l2, 2)?;
    let a = h * &l1_inv;
    let at = a.transpose();
    let ht = h.transpose();
    let q = &ht * h + l2.transpose() * l2 * lambda2;
    let q_chol = q
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Singular("HᵀH + λ₂L₂ᵀL₂".into()))?;
    let two = T::lit(2.0);

    let x2_of = |c: &DVector<T>| q_chol.solve(&(&ht * (y - &a * c)));
    let mut smooth = |c: &DVector<T>| {
        let x2 = x2_of(c);
        let r = y - &a * c - h * &x2;
        let value = r.norm_squared() + lambda2 * (l2 * &x2).norm_squared();
        (value, -(&at * r) * two)
    };

    let target = tol * (T::one() + lambda1);
    let sigma = linalg::spectral_norm_estimate(&a, 50);
    let polish = |c: &DVector<T>| polish_mixed(&a, h, &q, y, lambda1, c);
    let kkt_of = |c: &DVector<T>, x2: &DVector<T>| {
        let g = -(&at * (y - &a * c - h * x2)) * two;
        l1_kkt_residual(c, &g, lambda1)
    };
    let mut polished: Option<(DVector<T>, DVector<T>)> = None;
    let state = fista_l1(&mut smooth, lambda1, DVector::zeros(n), two * sigma * sigma, max_iter, |c, g, it| {
        if l1_kkt_residual(c, g, lambda1) <= target {
            return true;
        }
        if it > 0 && it % 50 == 0 {
            if let Some((pc, px)) = polish(c) {
                if kkt_of(&pc, &px) <= target {
                    polished = Some((pc, px));
                    return true;
                }
            }
        }
        false
    });
    let (mut c1, mut x2) = match polished {
        Some(p) => p,
        None => {
            let x2 = x2_of(&state.x);
            (state.x, x2)
        }
    };
    if let Some((pc, px)) = polish(&c1) {
        if kkt_of(&pc, &px) < kkt_of(&c1, &x2) {
            c1 = pc;
            x2 = px;
        }
    }
    let x1 = &l1_inv * &c1;
    let kkt_residual = kkt_of(&c1, &x2);
    let objective = mixed_objective(h, l1, l2, y, lambda1, lambda2, &x1, &x2);
    Ok(MixedSolution {
        x1,
        x2,
        c1,
        objective,
        converged: kkt_residual <= T::lit(1e-6) * (T::one() + lambda1),
        kkt_residual,
        iterations: state.iterations,
    })
}

/// Solves the joint stationarity system on the support of `c` with its signs fixed.
fn polish_mixed<T: Real>(
    a: &DMatrix<T>,
    h: &DMatrix<T>,
    q: &DMatrix<T>,
    y: &DVector<T>,
    lambda1: T,
    c: &DVector<T>,
) -> Option<(DVector<T>, DVector<T>)> {
    let support: Vec<usize> = (0..c.len()).filter(|&j| c[j] != T::zero()).collect();
    let k = support.len();
    let n = h.ncols();
    let a_s = a.select_columns(&support);
    let mut sys = DMatrix::zeros(k + n, k + n);
    sys.view_mut((0, 0), (k, k)).copy_from(&(a_s.transpose() * &a_s));
    let cross = a_s.transpose() * h;
    sys.view_mut((0, k), (k, n)).copy_from(&cross);
    sys.view_mut((k, 0), (n, k)).copy_from(&cross.transpose());
    sys.view_mut((k, k), (n, n)).copy_from(q);
    let signs = DVector::from_iterator(k, support.iter().map(|&j| sign(c[j])));
    let mut rhs = DVector::zeros(k + n);
    rhs.rows_mut(0, k).copy_from(&(a_s.transpose() * y - &signs * (lambda1 / T::lit(2.0))));
    rhs.rows_mut(k, n).copy_from(&(h.transpose() * y));
    if !(linalg::condition_number(&sys) <= linalg::MAX_CONDITION) {
        return None;
    }
    let sol = linalg::solve_general(&sys, &rhs).ok()?;
    if (0..k).any(|i| sign(sol[i]) != signs[i]) {
        return None;
    }
    let mut out = DVector::zeros(c.len());
    for (i, &j) in support.iter().enumerate() {
        out[j] = sol[i];
    }
    Some((out, sol.rows(k, n).into_owned()))
}

/// Tikhonov solution `(HᵀH + λL ᵀL) x = Hᵀ y`.
pub fn tikhonov<T: Real>(h: &DMatrix<T>, l: &DMatrix<T>, y: &DVector<T>, lambda: T) -> Result<DVector<T>> {
    let q = h.transpose() * h + l.transpose() * l * lambda;
    linalg::solve_spd(&q, &(h.transpose() * y))
}
