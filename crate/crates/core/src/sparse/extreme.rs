use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{sign, Real};

/// Outcome of [`reduce_to_extreme`].
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction<T> {
    pub coefficients: DVector<T>,
    /// Number of coefficients driven to zero.
    pub eliminated: usize,
    /// Steps that had no sign-balanced null direction and used an
    /// `ℓ1`-decreasing direction instead.
    pub fallback_steps: usize,
}

/// Moves `c` along null directions of the active columns of `A` until the
/// active columns are linearly independent, so at most `rank(A)` atoms remain.
///
/// Each step picks `d` in the null space of the active columns with
/// `Σ sign(c_j) d_j = 0`, which leaves `‖c‖₁` unchanged until the first
/// coefficient reaches zero; that coefficient (smallest index on ties) is
/// removed. When the only null direction is not sign-balanced, the
/// orientation that decreases `‖c‖₁` is used. `A c` is preserved.
///
/// `tol` is the relative singular-value threshold for linear dependence.
pub fn reduce_to_extreme<T: Real>(a: &DMatrix<T>, c: &DVector<T>, tol: T) -> Result<Reduction<T>> {
    if a.ncols() != c.len() {
        return Err(Error::DimensionMismatch {
            expected: a.ncols(),
            got: c.len(),
        });
    }
    let mut c = c.clone();
    let mut eliminated = 0;
    let mut fallback_steps = 0;
    let balance_tol = T::lit(1e-12);
    loop {
        let active: Vec<usize> = (0..c.len()).filter(|&j| c[j] != T::zero()).collect();
        if active.is_empty() {
            break;
        }
        // Any M + 2 columns of an M-row matrix have a null space of dimension
        // at least two, which is enough to find a sign-balanced direction.
        let support = &active[..active.len().min(a.nrows() + 2)];
        let a_s = a.select_columns(support);
        let null = linalg::null_space(&a_s, tol);
        if null.ncols() == 0 {
            break;
        }
        let signs = DVector::from_iterator(support.len(), support.iter().map(|&j| sign(c[j])));
        let w = null.transpose() * &signs;
        let (d, balanced) = if null.ncols() >= 2 || w.amax() <= balance_tol * signs.norm() {
            let coeff = if w.amax() <= balance_tol * signs.norm() {
                let mut e = DVector::zeros(null.ncols());
                e[0] = T::one();
                e
            } else {
                let wm = DMatrix::from_column_slice(w.len(), 1, w.as_slice());
                linalg::orthogonal_complement(&wm, T::lit(1e-12)).column(0).into_owned()
            };
            (&null * coeff, true)
        } else {
            let z = null.column(0).into_owned();
            (z * (-sign(w[0])), false)
        };
        let dmax = d.amax();
        let mut pick: Option<(usize, T)> = None;
        for (k, &dk) in d.iter().enumerate() {
            if dk.abs() <= T::lit(1e-14) * dmax {
                continue;
            }
            let t = -c[support[k]] / dk;
            if !balanced && t <= T::zero() {
                continue;
            }
            match pick {
                Some((_, best)) if t.abs() >= best.abs() => {}
                _ => pick = Some((k, t)),
            }
        }
        let Some((k_hit, t)) = pick else { break };
        for (k, &j) in support.iter().enumerate() {
            c[j] += t * d[k];
        }
        c[support[k_hit]] = T::zero();
        eliminated += 1;
        if !balanced {
            fallback_steps += 1;
        }
    }
    Ok(Reduction {
        coefficients: c,
        eliminated,
        fallback_steps,
    })
}
