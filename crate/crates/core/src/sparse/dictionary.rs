use nalgebra::{DMatrix, DVector};

use super::lasso::{solve_synthesis_lasso, SparseSolution};
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;

/// Multi-component `ℓ1` recovery problem
/// `min_{x = x_1+…+x_I} ‖y − H x‖² + λ Σ ‖L_i x_i‖₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct DictionaryProblem<T: Real> {
    h: DMatrix<T>,
    y: DVector<T>,
    transforms: Vec<DMatrix<T>>,
    inverses: Vec<DMatrix<T>>,
    lambda: T,
}

impl<T: Real> DictionaryProblem<T> {
    /// Fails with `SingularTransform { index }` (1-based) for a non-invertible `L_i`.
    pub fn new(h: DMatrix<T>, y: DVector<T>, transforms: Vec<DMatrix<T>>, lambda: T) -> Result<Self> {
        if h.nrows() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: h.nrows(),
                got: y.len(),
            });
        }
        if transforms.is_empty() {
            return Err(Error::InvalidParameter("at least one transform is required".into()));
        }
        if !(lambda > T::zero()) {
            return Err(Error::InvalidParameter("lambda must be > 0".into()));
        }
        let n = h.ncols();
        let mut inverses = Vec::with_capacity(transforms.len());
        for (i, l) in transforms.iter().enumerate() {
            if l.nrows() != n {
                return Err(Error::DimensionMismatch { expected: n, got: l.nrows() });
            }
            inverses.push(linalg::checked_inverse(l, i + 1)?);
        }
        Ok(DictionaryProblem {
            h,
            y,
            transforms,
            inverses,
            lambda,
        })
    }

    pub fn h(&self) -> &DMatrix<T> {
        &self.h
    }
    pub fn y(&self) -> &DVector<T> {
        &self.y
    }
    pub fn lambda(&self) -> T {
        self.lambda
    }
    pub fn transforms(&self) -> &[DMatrix<T>] {
        &self.transforms
    }

    /// Union dictionary `U = [L_1^{-1} | … | L_I^{-1}]`.
    pub fn dictionary(&self) -> DMatrix<T> {
        hstack(&self.inverses)
    }

    /// Synthesis matrix `H U`.
    pub fn synthesis_matrix(&self) -> DMatrix<T> {
        &self.h * self.dictionary()
    }

    /// Components `x_i = L_i^{-1} c_i` of a synthesis coefficient vector.
    pub fn components(&self, c: &DVector<T>) -> Vec<DVector<T>> {
        let n = self.h.ncols();
        self.inverses
            .iter()
            .enumerate()
            .map(|(i, inv)| inv * c.rows(i * n, n))
            .collect()
    }

    /// Synthesis coefficients `c_i = L_i x_i` of analysis components.
    pub fn coefficients(&self, components: &[DVector<T>]) -> DVector<T> {
        let n = self.h.ncols();
        let mut c = DVector::zeros(n * self.transforms.len());
        for (i, (l, x)) in self.transforms.iter().zip(components).enumerate() {
            c.rows_mut(i * n, n).copy_from(&(l * x));
        }
        c
    }

    /// Solves the synthesis LASSO and maps the result back to components.
    pub fn solve(&self, max_iter: usize, tol: T) -> Result<DictionarySolution<T>> {
        let sparse = solve_synthesis_lasso(&self.synthesis_matrix(), &self.y, self.lambda, max_iter, tol)?;
        let components = self.components(&sparse.c);
        Ok(DictionarySolution { sparse, components })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DictionarySolution<T> {
    pub sparse: SparseSolution<T>,
    pub components: Vec<DVector<T>>,
}

fn hstack<T: Real>(blocks: &[DMatrix<T>]) -> DMatrix<T> {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut offset = 0;
    for b in blocks {
        out.columns_mut(offset, b.ncols()).copy_from(b);
        offset += b.ncols();
    }
    out
}

/// `U = [L_1^{-1} | … | L_I^{-1}]`; the columns of block `i` are the
/// extremal atoms of the `‖L_i·‖₁` unit ball.
pub fn build_union_dictionary<T: Real>(transforms: &[DMatrix<T>]) -> Result<DMatrix<T>> {
    let inverses = transforms
        .iter()
        .enumerate()
        .map(|(i, l)| linalg::checked_inverse(l, i + 1))
        .collect::<Result<Vec<_>>>()?;
    if let Some(first) = inverses.first() {
        if let Some(bad) = inverses.iter().find(|m| m.nrows() != first.nrows()) {
            return Err(Error::DimensionMismatch {
                expected: first.nrows(),
                got: bad.nrows(),
            });
        }
    }
    Ok(hstack(&inverses))
}

/// Analysis objective `‖y − H Σ x_i‖² + λ Σ ‖L_i x_i‖₁`.
pub fn analysis_objective<T: Real>(problem: &DictionaryProblem<T>, components: &[DVector<T>]) -> Result<T> {
    if components.len() != problem.transforms.len() {
        return Err(Error::DimensionMismatch {
            expected: problem.transforms.len(),
            got: components.len(),
        });
    }
    let n = problem.h.ncols();
    let mut x = DVector::zeros(n);
    let mut reg = T::zero();
    for (l, xi) in problem.transforms.iter().zip(components) {
        if xi.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: xi.len() });
        }
        x += xi;
        reg += (l * xi).lp_norm(1);
    }
    Ok((&problem.y - &problem.h * x).norm_squared() + problem.lambda * reg)
}

/// Forward-difference matrix `(Lx)_0 = x_0`, `(Lx)_i = x_i − x_{i−1}`.
pub fn forward_difference<T: Real>(n: usize) -> DMatrix<T> {
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            T::one()
        } else if i == j + 1 {
            -T::one()
        } else {
            T::zero()
        }
    })
}
