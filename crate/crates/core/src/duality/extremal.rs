use nalgebra::{DMatrix, DVector, DVectorView};

use super::norm::{Exponent, NormSpec};
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;

/// Columns `L^{-1} e_n`: up to sign, the extremal points of the unit ball of `‖L·‖₁`.
pub fn extremal_atoms<T: Real>(transform: &DMatrix<T>) -> Result<DMatrix<T>> {
    linalg::checked_inverse(transform, 1)
}

/// Whether `x` is an extremal point of the unit ball of `spec`, up to `tol`.
///
/// Strictly convex balls: every unit vector. `ℓ1`: signed unit impulses.
/// `ℓ∞`: sign vectors. Transformed norms pull back through the transform;
/// composites follow the direct-product characterization.
pub fn is_extremal<T: Real>(x: &DVector<T>, spec: &NormSpec<T>, tol: T) -> Result<bool> {
    spec.check_dim(x.len())?;
    Ok(extremal_unchecked(x.as_view(), spec, tol))
}

fn extremal_unchecked<T: Real>(x: DVectorView<'_, T>, spec: &NormSpec<T>, tol: T) -> bool {
    match spec {
        NormSpec::Lp(Exponent::Finite(p)) if *p == T::one() => {
            let active = x.iter().filter(|v| v.abs() > tol).count();
            active == 1 && (spec.norm_unchecked(x) - T::one()).abs() <= tol
        }
        NormSpec::Lp(Exponent::Infinity) => x.iter().all(|v| (v.abs() - T::one()).abs() <= tol),
        NormSpec::Lp(_) | NormSpec::WeightedEuclidean(_) => {
            (spec.norm_unchecked(x) - T::one()).abs() <= tol
        }
        NormSpec::Transformed(t) => {
            let lx = t.transform() * x;
            extremal_unchecked(lx.as_view(), t.base(), tol)
        }
        NormSpec::Composite(c) => {
            let parts: Vec<DVector<T>> = c.split(&x.into_owned()).into_iter().map(|v| v.into_owned()).collect();
            let specs: Vec<NormSpec<T>> = c.components().iter().map(|k| k.spec.clone()).collect();
            product_extremal(&parts, &specs, c.outer(), tol)
        }
    }
}

fn product_extremal<T: Real>(parts: &[DVector<T>], specs: &[NormSpec<T>], outer: &NormSpec<T>, tol: T) -> bool {
    let z = DVector::from_iterator(
        parts.len(),
        parts.iter().zip(specs).map(|(e, s)| s.norm_unchecked(e.as_view())),
    );
    if !extremal_unchecked(z.as_view(), outer, tol) {
        return false;
    }
    parts.iter().zip(specs).zip(z.iter()).all(|((e, s), &zn)| {
        if zn <= tol {
            true
        } else {
            let unit = e / zn;
            extremal_unchecked(unit.as_view(), s, tol)
        }
    })
}

/// Extremality of a direct-product element: the component-norm vector must
/// be extremal for the outer ball and every nonzero normalized component
/// extremal for its own ball.
pub fn check_extremal_product<T: Real>(
    e_components: &[DVector<T>],
    inner_specs: &[NormSpec<T>],
    outer: &NormSpec<T>,
    tol: T,
) -> Result<bool> {
    if e_components.len() != inner_specs.len() {
        return Err(Error::DimensionMismatch {
            expected: inner_specs.len(),
            got: e_components.len(),
        });
    }
    outer.check_dim(e_components.len())?;
    for (e, s) in e_components.iter().zip(inner_specs) {
        s.check_dim(e.len())?;
    }
    Ok(product_extremal(e_components, inner_specs, outer, tol))
}
