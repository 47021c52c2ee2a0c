use nalgebra::{DVector, DVectorView};

use super::norm::{component_norms_view, Exponent, NormSpec};
use crate::error::{Error, Result};
use crate::scalar::{sign, Real};

/// Outcome of checking the two conjugacy conditions for a pair `(x, x*)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugateReport<T> {
    pub norm_primal: T,
    pub norm_dual: T,
    pub pairing: T,
    /// `|‖x‖ − ‖x*‖'|`
    pub norm_gap: T,
    /// `|⟨x, x*⟩ − ‖x‖·‖x*‖'|`
    pub pairing_gap: T,
    pub is_conjugate: bool,
}

/// A conjugate `x* ∈ J(x)` in the dual space.
///
/// Single-valued for strictly convex duals. For `ℓ1` the canonical
/// representative is `‖x‖₁·sign(x)` with `sign(0) = 0`; for `ℓ∞` it is
/// `‖x‖∞·sign(x_i)·e_i` at the smallest maximizing index. The zero vector maps
/// to zero.
pub fn duality_map<T: Real>(x: &DVector<T>, spec: &NormSpec<T>) -> Result<DVector<T>> {
    spec.check_dim(x.len())?;
    Ok(map_unchecked(spec, x.as_view()))
}

pub(crate) fn map_unchecked<T: Real>(spec: &NormSpec<T>, x: DVectorView<'_, T>) -> DVector<T> {
    match spec {
        NormSpec::Lp(p) => lp_map(x, *p),
        NormSpec::WeightedEuclidean(w) => x.component_mul(w),
        NormSpec::Transformed(t) => {
            let lx = t.transform() * x;
            let inner = map_unchecked(t.base(), lx.as_view());
            t.transform().transpose() * inner
        }
        NormSpec::Composite(c) => {
            let z = component_norms_view(c, x);
            let zstar = map_unchecked(c.outer(), z.as_view());
            let mut out = DVector::zeros(x.len());
            let mut offset = 0;
            for (n, comp) in c.components().iter().enumerate() {
                if z[n] > T::zero() {
                    let xn = x.rows(offset, comp.dim);
                    let alpha = zstar[n] / z[n];
                    let mapped = map_unchecked(&comp.spec, xn) * alpha;
                    out.rows_mut(offset, comp.dim).copy_from(&mapped);
                }
                offset += comp.dim;
            }
            out
        }
    }
}

fn lp_map<T: Real>(x: DVectorView<'_, T>, p: Exponent<T>) -> DVector<T> {
    let n = x.len();
    let amax = x.iter().fold(T::zero(), |acc, &v| acc.max(v.abs()));
    if amax == T::zero() {
        return DVector::zeros(n);
    }
    match p {
        Exponent::Infinity => {
            let i = x
                .iter()
                .position(|&v| v.abs() == amax)
                .expect("maximum attained");
            let mut out = DVector::zeros(n);
            out[i] = amax * sign(x[i]);
            out
        }
        Exponent::Finite(p) if p == T::one() => {
            let l1 = x.iter().fold(T::zero(), |acc, &v| acc + v.abs());
            x.map(|v| l1 * sign(v))
        }
        Exponent::Finite(p) => {
            // x*_i = sign(x_i) |x_i|^{p-1} ‖x‖^{2-p}, written as ‖x‖ (|x_i|/‖x‖)^{p-1}
            let norm = {
                let s = x.iter().fold(T::zero(), |acc, &v| acc + (v.abs() / amax).powf(p));
                amax * s.powf(T::one() / p)
            };
            let e = p - T::one();
            x.map(|v| {
                if v == T::zero() {
                    T::zero()
                } else {
                    sign(v) * norm * (v.abs() / norm).powf(e)
                }
            })
        }
    }
}

/// Checks norm preservation and the sharp duality bound for `(x, x*)`.
pub fn is_conjugate_pair<T: Real>(
    x: &DVector<T>,
    xstar: &DVector<T>,
    spec: &NormSpec<T>,
    tol: T,
) -> Result<ConjugateReport<T>> {
    if x.len() != xstar.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: xstar.len(),
        });
    }
    let norm_primal = spec.norm(x)?;
    let norm_dual = spec.dual().norm(xstar)?;
    let pairing = x.dot(xstar);
    let norm_gap = (norm_primal - norm_dual).abs();
    let pairing_gap = (pairing - norm_primal * norm_dual).abs();
    let is_conjugate =
        norm_gap <= tol * (T::one() + norm_primal) && pairing_gap <= tol * (T::one() + pairing.abs());
    Ok(ConjugateReport {
        norm_primal,
        norm_dual,
        pairing,
        norm_gap,
        pairing_gap,
        is_conjugate,
    })
}

/// Conjugate of a direct-product element: `(α_1 x*_1, …, α_N x*_N)` with
/// `α_n = z*_n / ‖x_n‖` (zero for vanishing components), where `z*` is the
/// outer conjugate of the component-norm vector `z`.
pub fn composite_conjugate<T: Real>(
    components: &[(DVector<T>, NormSpec<T>)],
    outer: &NormSpec<T>,
) -> Result<Vec<DVector<T>>> {
    let n = components.len();
    outer.check_dim(n)?;
    super::norm::check_absolute(outer, n)?;
    let mut z = DVector::zeros(n);
    for (i, (x, spec)) in components.iter().enumerate() {
        z[i] = spec.norm(x)?;
    }
    let zstar = map_unchecked(outer, z.as_view());
    components
        .iter()
        .enumerate()
        .map(|(i, (x, spec))| {
            if z[i] > T::zero() {
                Ok(duality_map(x, spec)? * (zstar[i] / z[i]))
            } else {
                Ok(DVector::zeros(x.len()))
            }
        })
        .collect()
}
