use nalgebra::{DMatrix, DVector, DVectorView};
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::random;
use crate::scalar::Real;

/// Number of randomized sign-flip probes used to certify an outer norm as absolute.
pub const ABSOLUTENESS_PROBES: usize = 64;

/// ℓp exponent, `1 <= p <= ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent<T> {
    Finite(T),
    Infinity,
}

impl<T: Real> Exponent<T> {
    /// Hölder conjugate `q` with `1/p + 1/q = 1`.
    pub fn conjugate(self) -> Self {
        match self {
            Exponent::Infinity => Exponent::Finite(T::one()),
            Exponent::Finite(p) if p == T::one() => Exponent::Infinity,
            Exponent::Finite(p) => Exponent::Finite(p / (p - T::one())),
        }
    }

    pub fn is_strictly_convex(self) -> bool {
        matches!(self, Exponent::Finite(p) if p > T::one())
    }
}

/// A norm on a finite-dimensional real vector space.
///
/// `Transformed` carries `‖x‖ = ‖L x‖_base`; its dual is the transported norm
/// `‖L^{-T} x‖_{base'}`. `Composite` is the direct product of its components
/// equipped with `‖(‖x_1‖, …, ‖x_N‖)‖_outer`, where the outer norm is absolute.
#[derive(Debug, Clone, PartialEq)]
pub enum NormSpec<T: Real> {
    Lp(Exponent<T>),
    WeightedEuclidean(DVector<T>),
    Transformed(Box<Transformed<T>>),
    Composite(Box<Composite<T>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transformed<T: Real> {
    base: NormSpec<T>,
    transform: DMatrix<T>,
    inverse: DMatrix<T>,
}

impl<T: Real> Transformed<T> {
    pub fn base(&self) -> &NormSpec<T> {
        &self.base
    }
    pub fn transform(&self) -> &DMatrix<T> {
        &self.transform
    }
    pub fn inverse(&self) -> &DMatrix<T> {
        &self.inverse
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component<T: Real> {
    pub dim: usize,
    pub spec: NormSpec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Composite<T: Real> {
    components: Vec<Component<T>>,
    outer: NormSpec<T>,
}

impl<T: Real> Composite<T> {
    pub fn components(&self) -> &[Component<T>] {
        &self.components
    }
    pub fn outer(&self) -> &NormSpec<T> {
        &self.outer
    }
    pub fn total_dim(&self) -> usize {
        self.components.iter().map(|c| c.dim).sum()
    }

    /// Splits a concatenated vector into component views.
    pub fn split<'a>(&self, x: &'a DVector<T>) -> Vec<DVectorView<'a, T>> {
        let mut offset = 0;
        self.components
            .iter()
            .map(|c| {
                let v = x.rows(offset, c.dim);
                offset += c.dim;
                v
            })
            .collect()
    }
}

impl<T: Real> NormSpec<T> {
    pub fn lp(p: T) -> Result<Self> {
        if !(p >= T::one()) || !p.is_finite() {
            return Err(Error::InvalidExponent(p.as_f64()));
        }
        Ok(NormSpec::Lp(Exponent::Finite(p)))
    }

    pub fn linf() -> Self {
        NormSpec::Lp(Exponent::Infinity)
    }

    pub fn l1() -> Self {
        NormSpec::Lp(Exponent::Finite(T::one()))
    }

    pub fn l2() -> Self {
        NormSpec::Lp(Exponent::Finite(T::lit(2.0)))
    }

    pub fn weighted_euclidean(weights: DVector<T>) -> Result<Self> {
        if weights.iter().any(|&w| !(w > T::zero()) || !w.is_finite()) {
            return Err(Error::InvalidParameter(
                "weighted-Euclidean weights must be strictly positive".into(),
            ));
        }
        Ok(NormSpec::WeightedEuclidean(weights))
    }

    /// `‖x‖ = ‖L x‖_base`; rejects `L` with condition number above 1e12.
    pub fn transformed(base: NormSpec<T>, transform: DMatrix<T>) -> Result<Self> {
        let inverse = linalg::checked_inverse(&transform, 1)?;
        if let Some(d) = base.dim() {
            if d != transform.nrows() {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: transform.nrows(),
                });
            }
        }
        Ok(NormSpec::Transformed(Box::new(Transformed {
            base,
            transform,
            inverse,
        })))
    }

    /// Direct product of `(dim, spec)` components under an absolute outer norm.
    pub fn composite(components: Vec<(usize, NormSpec<T>)>, outer: NormSpec<T>) -> Result<Self> {
        let n = components.len();
        if n == 0 {
            return Err(Error::InvalidParameter("composite norm needs components".into()));
        }
        if let Some(d) = outer.dim() {
            if d != n {
                return Err(Error::DimensionMismatch { expected: n, got: d });
            }
        }
        let mut comps = Vec::with_capacity(n);
        for (dim, spec) in components {
            if let Some(d) = spec.dim() {
                if d != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: d });
                }
            }
            comps.push(Component { dim, spec });
        }
        check_absolute(&outer, n)?;
        Ok(NormSpec::Composite(Box::new(Composite {
            components: comps,
            outer,
        })))
    }

    /// Fixed dimension of the space, if the norm pins one (plain ℓp does not).
    pub fn dim(&self) -> Option<usize> {
        match self {
            NormSpec::Lp(_) => None,
            NormSpec::WeightedEuclidean(w) => Some(w.len()),
            NormSpec::Transformed(t) => Some(t.transform.nrows()),
            NormSpec::Composite(c) => Some(c.total_dim()),
        }
    }

    pub fn check_dim(&self, len: usize) -> Result<()> {
        match self.dim() {
            Some(d) if d != len => Err(Error::DimensionMismatch { expected: d, got: len }),
            _ => Ok(()),
        }
    }

    /// The norm of the continuous dual space.
    pub fn dual(&self) -> NormSpec<T> {
        match self {
            NormSpec::Lp(p) => NormSpec::Lp(p.conjugate()),
            NormSpec::WeightedEuclidean(w) => NormSpec::WeightedEuclidean(w.map(|v| T::one() / v)),
            NormSpec::Transformed(t) => NormSpec::Transformed(Box::new(Transformed {
                base: t.base.dual(),
                transform: t.inverse.transpose(),
                inverse: t.transform.transpose(),
            })),
            NormSpec::Composite(c) => NormSpec::Composite(Box::new(Composite {
                components: c
                    .components
                    .iter()
                    .map(|comp| Component {
                        dim: comp.dim,
                        spec: comp.spec.dual(),
                    })
                    .collect(),
                outer: c.outer.dual(),
            })),
        }
    }

    pub fn is_strictly_convex(&self) -> bool {
        match self {
            NormSpec::Lp(p) => p.is_strictly_convex(),
            NormSpec::WeightedEuclidean(_) => true,
            NormSpec::Transformed(t) => t.base.is_strictly_convex(),
            NormSpec::Composite(c) => {
                c.outer.is_strictly_convex() && c.components.iter().all(|k| k.spec.is_strictly_convex())
            }
        }
    }

    /// Whether the duality mapping of this space is single-valued everywhere
    /// (equivalently, whether the dual norm is strictly convex).
    pub fn has_single_valued_map(&self) -> bool {
        self.dual().is_strictly_convex()
    }

    pub fn norm(&self, x: &DVector<T>) -> Result<T> {
        self.check_dim(x.len())?;
        Ok(self.norm_unchecked(x.as_view()))
    }

    pub(crate) fn norm_unchecked(&self, x: DVectorView<'_, T>) -> T {
        match self {
            NormSpec::Lp(p) => lp_norm(x, *p),
            NormSpec::WeightedEuclidean(w) => x
                .iter()
                .zip(w.iter())
                .fold(T::zero(), |acc, (&v, &wi)| acc + wi * v * v)
                .sqrt(),
            NormSpec::Transformed(t) => {
                let lx = &t.transform * x;
                t.base.norm_unchecked(lx.as_view())
            }
            NormSpec::Composite(c) => {
                let z = component_norms_view(c, x);
                c.outer.norm_unchecked(z.as_view())
            }
        }
    }
}

pub(crate) fn component_norms_view<T: Real>(c: &Composite<T>, x: DVectorView<'_, T>) -> DVector<T> {
    let mut offset = 0;
    DVector::from_iterator(
        c.components.len(),
        c.components.iter().map(|comp| {
            let v = x.rows(offset, comp.dim);
            offset += comp.dim;
            comp.spec.norm_unchecked(v)
        }),
    )
}

fn lp_norm<T: Real>(x: DVectorView<'_, T>, p: Exponent<T>) -> T {
    let scale = x.iter().fold(T::zero(), |acc, &v| acc.max(v.abs()));
    if scale == T::zero() {
        return T::zero();
    }
    match p {
        Exponent::Infinity => scale,
        Exponent::Finite(p) if p == T::one() => x.iter().fold(T::zero(), |acc, &v| acc + v.abs()),
        Exponent::Finite(p) => {
            let s = x
                .iter()
                .fold(T::zero(), |acc, &v| acc + (v.abs() / scale).powf(p));
            scale * s.powf(T::one() / p)
        }
    }
}

/// Certifies `‖z‖ = ‖(|z_n|)‖` on randomized sign-flip probes.
pub fn check_absolute<T: Real>(outer: &NormSpec<T>, n: usize) -> Result<()> {
    let mut rng = random::seeded(0xab50_1e7e);
    let tol = T::lit(1e-12).max(T::default_epsilon() * T::lit(64.0));
    for _ in 0..ABSOLUTENESS_PROBES {
        let z: DVector<T> = random::normal_vector(&mut rng, n);
        let flipped = z.map(|v| if rng.random::<bool>() { -v } else { v });
        let a = outer.norm_unchecked(z.as_view());
        let b = outer.norm_unchecked(flipped.as_view());
        let gap = (a - b).abs();
        if gap > tol * (T::one() + a) {
            return Err(Error::NotAbsolute { gap: gap.as_f64() });
        }
    }
    Ok(())
}

/// `‖x‖` under `spec`.
pub fn norm_eval<T: Real>(x: &DVector<T>, spec: &NormSpec<T>) -> Result<T> {
    spec.norm(x)
}

/// Dual norm `sup_{u≠0} ⟨x,u⟩ / ‖u‖`, evaluated in closed form.
pub fn dual_norm_eval<T: Real>(x: &DVector<T>, spec: &NormSpec<T>) -> Result<T> {
    spec.dual().norm(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_norm() {
        let x = DVector::from_vec(vec![1.0_f64, -2.0, 3.0]);
        assert!((norm_eval(&x, &NormSpec::l2()).unwrap() - 14.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn transformed_l1() {
        let l = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0_f64, 1.0]));
        let spec = NormSpec::transformed(NormSpec::l1(), l).unwrap();
        let x = DVector::from_vec(vec![2.0, 2.0]);
        assert_eq!(norm_eval(&x, &spec).unwrap(), 6.0);
    }

    #[test]
    fn composite_with_zero_component() {
        let spec = NormSpec::composite(vec![(2, NormSpec::l2()), (2, NormSpec::l2())], NormSpec::l1()).unwrap();
        let x = DVector::from_vec(vec![3.0_f64, 4.0, 0.0, 0.0]);
        assert!((norm_eval(&x, &spec).unwrap() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn dual_of_l1_is_max_magnitude() {
        let x = DVector::from_vec(vec![1.0_f64, -2.0, 3.0]);
        assert_eq!(dual_norm_eval(&x, &NormSpec::l1()).unwrap(), 3.0);
        let y = DVector::from_vec(vec![1.0_f64, 1.0]);
        assert!((dual_norm_eval(&y, &NormSpec::l2()).unwrap() - 2.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn dual_of_transformed_linf_predual() {
        // predual norm ‖L^{-T}·‖_∞ with L = diag(2,1); its dual is ‖L·‖_1
        let l = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0_f64, 1.0]));
        let spec = NormSpec::transformed(NormSpec::linf(), l.try_inverse().unwrap().transpose()).unwrap();
        let x = DVector::from_vec(vec![2.0, 2.0]);
        assert!((dual_norm_eval(&x, &spec).unwrap() - 6.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(NormSpec::<f64>::lp(0.5), Err(Error::InvalidExponent(_))));
        let spec = NormSpec::weighted_euclidean(DVector::from_vec(vec![1.0_f64, 2.0])).unwrap();
        let x = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        assert!(matches!(spec.norm(&x), Err(Error::DimensionMismatch { .. })));
        assert!(NormSpec::weighted_euclidean(DVector::from_vec(vec![1.0_f64, 0.0])).is_err());
        let singular = DMatrix::from_row_slice(2, 2, &[1.0_f64, 1.0, 1.0, 1.0]);
        assert!(matches!(
            NormSpec::transformed(NormSpec::l1(), singular),
            Err(Error::SingularTransform { .. })
        ));
    }

    #[test]
    fn non_absolute_outer_norm_is_rejected() {
        let shear = DMatrix::from_row_slice(2, 2, &[1.0_f64, 1.0, 0.0, 1.0]);
        let outer = NormSpec::transformed(NormSpec::l2(), shear).unwrap();
        let res = NormSpec::composite(vec![(1, NormSpec::l2()), (1, NormSpec::l2())], outer);
        assert!(matches!(res, Err(Error::NotAbsolute { .. })));
    }

    #[test]
    fn f32_norms() {
        let x = DVector::from_vec(vec![3.0_f32, 4.0]);
        assert!((norm_eval(&x, &NormSpec::l2()).unwrap() - 5.0).abs() < 1e-6);
        assert!((norm_eval(&x, &NormSpec::lp(3.0).unwrap()).unwrap() - 91.0_f32.powf(1.0 / 3.0)).abs() < 1e-5);
    }
}
