use nalgebra::{DMatrix, DVector};

use super::extreme::reduce_to_extreme;
use super::prox::{fista_l1, l1_kkt_residual};
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{sign, Real};

pub const DEFAULT_MAX_ITER: usize = 20_000;
pub const DEFAULT_TOL: f64 = 1e-10;

/// Certificate tolerance `1e−6·(1+λ)` used to declare convergence.
pub fn kkt_tolerance<T: Real>(lambda: T) -> T {
    T::lit(1e-6) * (T::one() + lambda)
}

/// Solution of `min ‖y − A c‖² + λ‖c‖₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSolution<T> {
    pub c: DVector<T>,
    pub support: Vec<usize>,
    pub objective: T,
    pub kkt_residual: T,
    pub iterations: usize,
    pub converged: bool,
}

impl<T: Real> SparseSolution<T> {
    pub(crate) fn from_coefficients(a: &DMatrix<T>, y: &DVector<T>, lambda: T, c: DVector<T>, iterations: usize) -> Self {
        let objective = lasso_objective(a, y, lambda, &c);
        let kkt_residual = lasso_kkt(a, y, lambda, &c);
        SparseSolution {
            support: support_of(&c),
            converged: kkt_residual <= kkt_tolerance(lambda),
            c,
            objective,
            kkt_residual,
            iterations,
        }
    }
}

pub fn support_of<T: Real>(c: &DVector<T>) -> Vec<usize> {
    c.iter()
        .enumerate()
        .filter(|(_, &v)| v != T::zero())
        .map(|(i, _)| i)
        .collect()
}

/// `‖y − A c‖² + λ‖c‖₁`
pub fn lasso_objective<T: Real>(a: &DMatrix<T>, y: &DVector<T>, lambda: T, c: &DVector<T>) -> T {
    (y - a * c).norm_squared() + lambda * c.lp_norm(1)
}

/// KKT residual of `c` for the LASSO with unnormalized loss.
pub fn lasso_kkt<T: Real>(a: &DMatrix<T>, y: &DVector<T>, lambda: T, c: &DVector<T>) -> T {
    let g = a.transpose() * (a * c - y) * T::lit(2.0);
    l1_kkt_residual(c, &g, lambda)
}

/// Re-solves the LASSO stationarity equations on the current support with
/// the current signs held fixed; returns the refined point when it keeps the
/// signs and lowers the KKT residual.
pub fn polish<T: Real>(a: &DMatrix<T>, y: &DVector<T>, lambda: T, c: &DVector<T>) -> Option<DVector<T>> {
    let support = support_of(c);
    if support.is_empty() || support.len() > a.nrows() {
        return None;
    }
    let a_s = a.select_columns(&support);
    let gram = a_s.transpose() * &a_s;
    if !(linalg::condition_number(&gram) <= linalg::MAX_CONDITION) {
        return None;
    }
    let signs = DVector::from_iterator(support.len(), support.iter().map(|&j| sign(c[j])));
    let rhs = a_s.transpose() * y - signs.clone() * (lambda / T::lit(2.0));
    let sol = linalg::solve_spd(&gram, &rhs).ok()?;
    if sol.iter().zip(signs.iter()).any(|(&v, &s)| sign(v) != s) {
        return None;
    }
    let mut out = DVector::zeros(c.len());
    for (k, &j) in support.iter().enumerate() {
        out[j] = sol[k];
    }
    if lasso_kkt(a, y, lambda, &out) < lasso_kkt(a, y, lambda, c) {
        Some(out)
    } else {
        None
    }
}

/// Primal active-set refinement started from `c`.
///
/// The support is first thinned to independent columns. Each step then
/// either moves toward the sign-constrained minimizer on the support
/// (stopping where a coefficient changes sign and dropping it) or, once the
/// support is optimal, adds the column with the largest KKT violation. When
/// the enlarged support is linearly dependent the new column enters along
/// the null direction instead, which keeps `A c` and lowers `‖c‖₁`. Every
/// step lowers the objective. Returns the final point if it has a smaller
/// KKT residual than `c`.
pub fn active_set_refine<T: Real>(
    a: &DMatrix<T>,
    y: &DVector<T>,
    lambda: T,
    c: &DVector<T>,
    max_steps: usize,
) -> Option<DVector<T>> {
    let two = T::lit(2.0);
    let start_kkt = lasso_kkt(a, y, lambda, c);
    let mut x = reduce_to_extreme(a, c, T::lit(1e-10)).ok()?.coefficients;
    let at = a.transpose();
    let target = T::lit(1e-13) * (T::one() + lambda);
    let mut settled = false;
    for _ in 0..max_steps {
        let support = support_of(&x);
        let g = &at * (a * &x - y) * two;
        if !support.is_empty() {
            let a_s = a.select_columns(&support);
            let gram = a_s.transpose() * &a_s;
            let signs = DVector::from_iterator(support.len(), support.iter().map(|&j| sign(x[j])));
            let on_support = support
                .iter()
                .zip(signs.iter())
                .map(|(&j, &s)| (g[j] + lambda * s).abs())
                .fold(T::zero(), |m, v| m.max(v));
            if !settled && on_support > target && linalg::condition_number(&gram) <= linalg::MAX_CONDITION {
                let rhs = a_s.transpose() * y - &signs * (lambda / two);
                let goal = linalg::solve_spd(&gram, &rhs).ok()?;
                let mut step = T::one();
                let mut hit = None;
                for (k, &j) in support.iter().enumerate() {
                    if sign(goal[k]) != signs[k] {
                        let t = x[j] / (x[j] - goal[k]);
                        if t < step {
                            step = t;
                            hit = Some(j);
                        }
                    }
                }
                for (k, &j) in support.iter().enumerate() {
                    let xj = x[j];
                    x[j] = xj + step * (goal[k] - xj);
                }
                if let Some(j) = hit {
                    x[j] = T::zero();
                }
                settled = hit.is_none();
                continue;
            }
        }
        // support is optimal: look for the worst violator off the support
        let mut worst: Option<(usize, T)> = None;
        for j in 0..x.len() {
            if x[j] == T::zero() {
                let v = g[j].abs() - lambda;
                if v > target && worst.is_none_or(|(_, w)| v > w) {
                    worst = Some((j, v));
                }
            }
        }
        let Some((j, _)) = worst else { break };
        let mut grown = support.clone();
        grown.push(j);
        let a_g = a.select_columns(&grown);
        let null = linalg::null_space(&a_g, T::lit(1e-10));
        if null.ncols() == 0 {
            // independent: enter with a tiny coefficient of the descent sign
            // and let the next support solve size it
            x[j] = -sign(g[j]) * T::default_epsilon() * (T::one() + x.amax());
            settled = false;
            continue;
        }
        let mut d = null.column(0).into_owned();
        let last = grown.len() - 1;
        if d[last] == T::zero() {
            break;
        }
        d *= -sign(g[j]) / d[last];
        let mut step: Option<(usize, T)> = None;
        for (k, &i) in grown[..last].iter().enumerate() {
            if d[k] != T::zero() && sign(d[k]) != sign(x[i]) {
                let t = -x[i] / d[k];
                if step.is_none_or(|(_, s)| t < s) {
                    step = Some((i, t));
                }
            }
        }
        let Some((drop, t)) = step else { break };
        for (k, &i) in grown.iter().enumerate() {
            x[i] += t * d[k];
        }
        x[drop] = T::zero();
        settled = false;
    }
    (lasso_kkt(a, y, lambda, &x) < start_kkt).then_some(x)
}

/// Accelerated proximal gradient for the synthesis LASSO, with step
/// backtracking from `1/(2‖A‖²)` and support polishing. Runs until the KKT
/// residual drops below `tol·(1+λ)` or `max_iter` is reached; convergence is
/// reported against the `1e−6·(1+λ)` certificate.
pub fn solve_synthesis_lasso<T: Real>(
    a: &DMatrix<T>,
    y: &DVector<T>,
    lambda: T,
    max_iter: usize,
    tol: T,
) -> Result<SparseSolution<T>> {
    if !(lambda > T::zero()) {
        return Err(Error::InvalidParameter("lambda must be > 0".into()));
    }
    if a.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: y.len(),
        });
    }
    let n = a.ncols();
    let two = T::lit(2.0);
    let target = tol * (T::one() + lambda);
    let sigma = linalg::spectral_norm_estimate(a, 50);
    let lip = two * sigma * sigma;
    let at = a.transpose();
    let mut smooth = |c: &DVector<T>| {
        let r = a * c - y;
        (r.norm_squared(), &at * r * two)
    };
    let mut polished: Option<DVector<T>> = None;
    let state = fista_l1(&mut smooth, lambda, DVector::zeros(n), lip, max_iter, |c, g, it| {
        if l1_kkt_residual(c, g, lambda) <= target {
            return true;
        }
        if it > 0 && it % 50 == 0 {
            if let Some(p) = active_set_refine(a, y, lambda, c, 4 * a.nrows() + 20) {
                if lasso_kkt(a, y, lambda, &p) <= target {
                    polished = Some(p);
                    return true;
                }
            }
        }
        false
    });
    let mut c = polished.unwrap_or(state.x);
    if let Some(p) = active_set_refine(a, y, lambda, &c, 20 * (a.nrows() + a.ncols())) {
        if lasso_kkt(a, y, lambda, &p) < lasso_kkt(a, y, lambda, &c) {
            c = p;
        }
    }
    Ok(SparseSolution::from_coefficients(a, y, lambda, c, state.iterations))
}
