use nalgebra::{DMatrix, DVector};

use super::biortho::build_biortho;
use super::operators::SplineOperator;
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;
use crate::sparse::{lasso_kkt, polish, reduce_to_extreme, solve_synthesis_lasso};

/// Innovation entries below `KNOT_REL_TOL · max(1, ‖u‖∞)` are not knots.
pub const KNOT_REL_TOL: f64 = 1e-8;

/// Grid spline `f = P b + C u` with sparse innovation `u = L f`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineFit<T> {
    pub operator: SplineOperator,
    pub f: DVector<T>,
    pub b: DVector<T>,
    pub u: DVector<T>,
    /// Innovation indices carrying a knot; the knot sits at grid index `k + 1`.
    pub knots: Vec<usize>,
    pub lambda: T,
    pub objective: T,
    pub kkt_residual: T,
    pub converged: bool,
    pub iterations: usize,
    /// Knots removed by the extreme-point reduction.
    pub eliminated: usize,
}

impl<T: Real> SplineFit<T> {
    pub fn knot_locations(&self) -> Vec<usize> {
        self.knots.iter().map(|&k| self.operator.knot_location(k)).collect()
    }
}

/// Pieces shared by the gTV solver and its threshold computation.
struct Reduced<T: Real> {
    p: DMatrix<T>,
    c: DMatrix<T>,
    v: DMatrix<T>,
    a: DMatrix<T>,
    y: DVector<T>,
}

fn reduce<T: Real>(g: usize, h: &DMatrix<T>, y: &DVector<T>, op: SplineOperator) -> Result<Reduced<T>> {
    if h.ncols() != g {
        return Err(Error::DimensionMismatch { expected: g, got: h.ncols() });
    }
    if h.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: h.nrows(),
            got: y.len(),
        });
    }
    if h.nrows() <= op.null_dim() {
        return Err(Error::InvalidParameter(format!(
            "need more than {} measurements for operator {op}",
            op.null_dim()
        )));
    }
    let p = op.null_basis(g)?;
    let c = op.green(g)?;
    let v = h * &p;
    let sys = build_biortho(&v, None)?;
    // U is an orthonormal basis of col(V)^⊥, so ‖Uᵀr‖ = min_b ‖r − V b‖.
    let ut = sys.u.transpose();
    Ok(Reduced {
        a: &ut * h * &c,
        y: &ut * y,
        p,
        c,
        v,
    })
}

/// Smallest `λ` for which the innovation vanishes: `2‖Ãᵀỹ‖∞`.
pub fn gtv_lambda_max<T: Real>(g: usize, h: &DMatrix<T>, y: &DVector<T>, op: SplineOperator) -> Result<T> {
    let r = reduce(g, h, y, op)?;
    Ok((r.a.transpose() * &r.y).amax() * T::lit(2.0))
}

/// `‖y − H f‖² + λ‖L f‖₁`
pub fn gtv_objective<T: Real>(h: &DMatrix<T>, y: &DVector<T>, op: SplineOperator, lambda: T, f: &DVector<T>) -> Result<T> {
    let l = op.matrix::<T>(f.len())?;
    Ok((y - h * f).norm_squared() + lambda * (l * f).lp_norm(1))
}

/// Minimizes `‖y − H f‖² + λ‖L f‖₁` over grid functions, leaving the null
/// space of `L` unpenalized.
///
/// The spline is parametrized as `f = P b + C u`. Profiling out `b` leaves a
/// LASSO in `u` against the measurements projected off `col(HP)`; its
/// solution is reduced to an extreme point, so at most `M − N₀` knots remain.
pub fn fit_gtv_spline<T: Real>(
    g: usize,
    h: &DMatrix<T>,
    y: &DVector<T>,
    op: SplineOperator,
    lambda: T,
    max_iter: usize,
    tol: T,
) -> Result<SplineFit<T>> {
    let red = reduce(g, h, y, op)?;
    let sol = solve_synthesis_lasso(&red.a, &red.y, lambda, max_iter, tol)?;
    let reduction = reduce_to_extreme(&red.a, &sol.c, T::lit(1e-10))?;
    let mut u = reduction.coefficients;
    if let Some(p) = polish(&red.a, &red.y, lambda, &u) {
        if lasso_kkt(&red.a, &red.y, lambda, &p) <= lasso_kkt(&red.a, &red.y, lambda, &u) {
            u = p;
        }
    }
    let kkt_residual = lasso_kkt(&red.a, &red.y, lambda, &u);
    let synth = &red.c * &u;
    let b = linalg::lstsq(&red.v, &(y - h * &synth));
    let f = &red.p * &b + synth;
    let threshold = T::lit(KNOT_REL_TOL) * u.amax().max(T::one());
    let knots = (0..u.len()).filter(|&k| u[k].abs() > threshold).collect();
    Ok(SplineFit {
        operator: op,
        objective: gtv_objective(h, y, op, lambda, &f)?,
        converged: kkt_residual <= T::lit(1e-6) * (T::one() + lambda),
        kkt_residual,
        iterations: sol.iterations,
        eliminated: reduction.eliminated,
        f,
        b,
        u,
        knots,
        lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use crate::spline::interpolation_matrix;
    use rand::Rng;

    #[test]
    fn constant_data_gives_constant_fit() {
        let g = 50;
        let h = interpolation_matrix::<f64>(g, &[0.0, 7.5, 20.0, 33.3, 49.0]).unwrap();
        let y = DVector::from_element(5, 1.25);
        let fit = fit_gtv_spline(g, &h, &y, SplineOperator::D, 0.1, 5000, 1e-12).unwrap();
        assert!(fit.knots.is_empty());
        assert!(fit.u.amax() == 0.0);
        assert!(fit.f.iter().all(|&v| (v - 1.25).abs() < 1e-10));
    }

    #[test]
    fn large_lambda_gives_least_squares_line() {
        let g = 60;
        let pos = [2.0, 11.0, 25.0, 31.0, 44.0, 58.0];
        let h = interpolation_matrix::<f64>(g, &pos).unwrap();
        let y = DVector::from_vec(vec![1.0, 0.3, -0.2, 0.9, -1.4, 0.5]);
        let lmax = gtv_lambda_max(g, &h, &y, SplineOperator::D2).unwrap();
        let fit = fit_gtv_spline(g, &h, &y, SplineOperator::D2, lmax * 1.01, 5000, 1e-12).unwrap();
        assert!(fit.knots.is_empty());
        // ordinary least-squares line through (t_i, y_i) with t in grid units
        let n = pos.len() as f64;
        let tm = pos.iter().sum::<f64>() / n;
        let ym = y.sum() / n;
        let slope = pos.iter().zip(y.iter()).map(|(t, v)| (t - tm) * (v - ym)).sum::<f64>()
            / pos.iter().map(|t| (t - tm) * (t - tm)).sum::<f64>();
        for i in 0..g {
            let line = ym + slope * (i as f64 - tm);
            assert!((fit.f[i] - line).abs() < 1e-10);
        }
    }

    #[test]
    fn knot_count_is_bounded() {
        let g = 200;
        let mut rng = random::seeded(11);
        for op in [SplineOperator::D, SplineOperator::D2] {
            for _ in 0..5 {
                let pos: Vec<f64> = (0..8).map(|_| rng.random_range(0.0..(g - 1) as f64)).collect();
                let h = interpolation_matrix::<f64>(g, &pos).unwrap();
                let y = random::normal_vector::<f64, _>(&mut rng, 8);
                let lmax = gtv_lambda_max(g, &h, &y, op).unwrap();
                let fit = fit_gtv_spline(g, &h, &y, op, 0.05 * lmax, 20_000, 1e-10).unwrap();
                assert!(fit.knots.len() <= 8 - op.null_dim(), "{} knots", fit.knots.len());
                assert!(fit.converged, "kkt {}", fit.kkt_residual);
            }
        }
    }

    #[test]
    fn piecewise_constant_for_first_difference() {
        let g = 80;
        let h = interpolation_matrix::<f64>(g, &[3.0, 15.0, 30.0, 41.0, 60.0, 77.0]).unwrap();
        let y = DVector::from_vec(vec![0.0, 0.1, 2.0, 2.1, -1.0, -0.9]);
        let fit = fit_gtv_spline(g, &h, &y, SplineOperator::D, 0.2, 20_000, 1e-10).unwrap();
        let locs = fit.knot_locations();
        for i in 1..g {
            if !locs.contains(&i) {
                assert!((fit.f[i] - fit.f[i - 1]).abs() < 1e-12);
            }
        }
    }
}
