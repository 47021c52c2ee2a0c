use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;

/// Discrete regularization operators on a uniform grid of `G` points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SplineOperator {
    /// First difference; null space = constants, splines are piecewise constant.
    D,
    /// Second difference; null space = affine functions, splines are piecewise linear.
    D2,
}

impl SplineOperator {
    pub fn null_dim(self) -> usize {
        match self {
            SplineOperator::D => 1,
            SplineOperator::D2 => 2,
        }
    }

    fn check(self, g: usize) -> Result<()> {
        if g <= self.null_dim() {
            return Err(Error::InvalidParameter(format!(
                "grid of {g} points too small for an operator with {}-dimensional null space",
                self.null_dim()
            )));
        }
        Ok(())
    }

    /// `(G − N₀) × G` difference matrix.
    pub fn matrix<T: Real>(self, g: usize) -> Result<DMatrix<T>> {
        self.check(g)?;
        let k = g - self.null_dim();
        let stencil: &[f64] = match self {
            SplineOperator::D => &[-1.0, 1.0],
            SplineOperator::D2 => &[1.0, -2.0, 1.0],
        };
        let mut l = DMatrix::zeros(k, g);
        for i in 0..k {
            for (s, &w) in stencil.iter().enumerate() {
                l[(i, i + s)] = T::lit(w);
            }
        }
        Ok(l)
    }

    /// Null-space basis tabulated on the grid: the constant `1`, and for `D²`
    /// also the ramp `i/(G−1)`.
    pub fn null_basis<T: Real>(self, g: usize) -> Result<DMatrix<T>> {
        self.check(g)?;
        let denom = T::from_usize_lossy(g - 1);
        Ok(DMatrix::from_fn(g, self.null_dim(), |i, j| match j {
            0 => T::one(),
            _ => T::from_usize_lossy(i) / denom,
        }))
    }

    /// Green matrix `C` (`G × (G − N₀)`) with `L C = I` and `C e_k` vanishing
    /// at the grid start: column `k` is a unit step (for `D`) or a unit-slope
    /// ramp (for `D²`) starting at grid index `k + 1`.
    pub fn green<T: Real>(self, g: usize) -> Result<DMatrix<T>> {
        self.check(g)?;
        let k = g - self.null_dim();
        Ok(DMatrix::from_fn(g, k, |i, col| {
            if i <= col {
                return T::zero();
            }
            match self {
                SplineOperator::D => T::one(),
                SplineOperator::D2 => T::from_usize_lossy(i - col - 1),
            }
        }))
    }

    /// Grid index at which innovation `k` takes effect.
    pub fn knot_location(self, k: usize) -> usize {
        k + 1
    }
}

impl std::str::FromStr for SplineOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "D" | "d" => Ok(SplineOperator::D),
            "D2" | "d2" | "DD" => Ok(SplineOperator::D2),
            other => Err(Error::InvalidParameter(format!("unknown operator {other:?}, expected D or D2"))),
        }
    }
}

impl std::fmt::Display for SplineOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SplineOperator::D => "D",
            SplineOperator::D2 => "D2",
        })
    }
}

/// Null-space basis `P` (grid × N₀) with dual functionals `P*` (N₀ × grid)
/// such that `P* P = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct NullSpaceSystem<T: Real> {
    p: DMatrix<T>,
    pstar: DMatrix<T>,
}

impl<T: Real> NullSpaceSystem<T> {
    pub const BIORTHO_TOL: f64 = 1e-10;

    pub fn new(p: DMatrix<T>, pstar: DMatrix<T>) -> Result<Self> {
        if pstar.nrows() != p.ncols() || pstar.ncols() != p.nrows() {
            return Err(Error::DimensionMismatch {
                expected: p.ncols() * p.nrows(),
                got: pstar.nrows() * pstar.ncols(),
            });
        }
        let n0 = p.ncols();
        let defect = linalg::max_abs_diff(&(&pstar * &p), &DMatrix::identity(n0, n0));
        if !(defect <= T::lit(Self::BIORTHO_TOL)) {
            return Err(Error::InvalidParameter(format!(
                "null-space functionals are not biorthonormal to the basis (defect {:e})",
                defect.as_f64()
            )));
        }
        Ok(NullSpaceSystem { p, pstar })
    }

    /// Dual functionals `(PᵀP)^{-1}Pᵀ` (orthogonal projector).
    pub fn least_squares(p: DMatrix<T>) -> Result<Self> {
        let gram = p.transpose() * &p;
        let inv = gram
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Singular("null-space basis Gram matrix".into()))?;
        let pstar = inv * p.transpose();
        Self::new(p, pstar)
    }

    /// Dual functionals built from measurements, `p̃* = Ṽᵀν`; this is
    /// biorthonormal because `Ṽᵀ ν P = ṼᵀV = I`.
    pub fn from_measurements(p: DMatrix<T>, pstar_tilde: DMatrix<T>) -> Result<Self> {
        Self::new(p, pstar_tilde)
    }

    pub fn basis(&self) -> &DMatrix<T> {
        &self.p
    }

    pub fn duals(&self) -> &DMatrix<T> {
        &self.pstar
    }

    /// `P b`
    pub fn synthesize(&self, b: &DVector<T>) -> DVector<T> {
        &self.p * b
    }
}

/// `b_n = ⟨p*_n, f⟩`
pub fn projector_coeffs<T: Real>(f: &DVector<T>, sys: &NullSpaceSystem<T>) -> Result<DVector<T>> {
    if f.len() != sys.p.nrows() {
        return Err(Error::DimensionMismatch {
            expected: sys.p.nrows(),
            got: f.len(),
        });
    }
    Ok(&sys.pstar * f)
}

/// Sampling matrix of linear interpolation at positions `t ∈ [0, G−1]` (in grid units).
pub fn interpolation_matrix<T: Real>(g: usize, positions: &[f64]) -> Result<DMatrix<T>> {
    let mut h = DMatrix::zeros(positions.len(), g);
    let last = (g - 1) as f64;
    for (row, &t) in positions.iter().enumerate() {
        if !(0.0..=last).contains(&t) {
            return Err(Error::InvalidParameter(format!("sample position {t} outside grid [0, {last}]")));
        }
        let lo = (t.floor() as usize).min(g.saturating_sub(2));
        let w = t - lo as f64;
        h[(row, lo)] = T::lit(1.0 - w);
        if w != 0.0 {
            h[(row, lo + 1)] = T::lit(w);
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn green_inverts_operator() {
        for op in [SplineOperator::D, SplineOperator::D2] {
            let g = 9;
            let l = op.matrix::<f64>(g).unwrap();
            let c = op.green::<f64>(g).unwrap();
            let p = op.null_basis::<f64>(g).unwrap();
            assert_eq!(&l * &c, DMatrix::identity(g - op.null_dim(), g - op.null_dim()));
            assert!((&l * &p).amax() < 1e-15);
            assert_eq!(c.row(0).amax(), 0.0);
        }
    }

    #[test]
    fn projector_examples() {
        let p = SplineOperator::D.null_basis::<f64>(5).unwrap();
        let sys = NullSpaceSystem::least_squares(p.clone()).unwrap();
        let f = p.column(0) * 2.0;
        assert!((projector_coeffs(&f, &sys).unwrap()[0] - 2.0).abs() < 1e-15);
        let s = DVector::from_vec(vec![1.0, -1.0, 2.0, 0.0, -2.0]);
        assert!(projector_coeffs(&s, &sys).unwrap()[0].abs() < 1e-15);
        let mixed = p.column(0) + &s;
        assert!((projector_coeffs(&mixed, &sys).unwrap()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_biorthonormal_duals_rejected() {
        let p = SplineOperator::D.null_basis::<f64>(3).unwrap();
        assert!(NullSpaceSystem::new(p, DMatrix::from_element(1, 3, 1.0)).is_err());
    }

    #[test]
    fn interpolation_rows_sum_to_one() {
        let h = interpolation_matrix::<f64>(5, &[0.0, 1.5, 4.0]).unwrap();
        for i in 0..3 {
            assert!((h.row(i).sum() - 1.0).abs() < 1e-15);
        }
        assert_eq!(h[(1, 1)], 0.5);
        assert_eq!(h[(2, 4)], 1.0);
        assert!(interpolation_matrix::<f64>(5, &[4.5]).is_err());
    }
}
