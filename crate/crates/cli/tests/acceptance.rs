//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Runs without the libtest harness so the lines always show.

mod common;

use std::time::Instant;

use banach_rep::duality::{composite_conjugate, duality_map, is_conjugate_pair, NormSpec};
use banach_rep::kernel::KernelSpec;
use banach_rep::multikernel::{fit_weighted_l2, MultiKernelProblem, OuterRegularizer};
use banach_rep::oracle::{
    brute_force_dual_norm, sampled_dual_norm, smoothing_spline_block_system, solve_ellipsoid, solve_generic, verify_representer_membership,
    GenericConvexProblem,
};
use banach_rep::random::{self, SeededRng};
use banach_rep::scalar::sign;
use banach_rep::sparse::{
    forward_difference, reduce_to_extreme, solve_mixed_two_component, solve_synthesis_lasso, DictionaryProblem,
};
use banach_rep::spline::{build_biortho, fit_gtv_spline, fit_hilbert_seminorm, gtv_lambda_max, interpolation_matrix, SplineOperator};
use banach_rep::{Matrix64, Vector64};
use banach_rep_cli::output::OutputDoc;
use banach_rep_cli::tasks::recompute_objective;
use common::*;
use rand::Rng;

type Verdict = Result<String, String>;

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Norms evaluated directly from their definitions, independent of the library.
enum Reference {
    Lp(f64),
    Weighted(Vector64),
    Transformed(Matrix64),
}

impl Reference {
    fn spec(&self) -> NormSpec<f64> {
        match self {
            Reference::Lp(p) => NormSpec::lp(*p).unwrap(),
            Reference::Weighted(w) => NormSpec::weighted_euclidean(w.clone()).unwrap(),
            Reference::Transformed(l) => NormSpec::transformed(NormSpec::l2(), l.clone()).unwrap(),
        }
    }

    fn norm(&self, x: &Vector64) -> f64 {
        match self {
            Reference::Lp(p) => x.iter().map(|v| v.abs().powf(*p)).sum::<f64>().powf(1.0 / p),
            Reference::Weighted(w) => x.iter().zip(w.iter()).map(|(v, w)| w * v * v).sum::<f64>().sqrt(),
            Reference::Transformed(l) => (l * x).norm(),
        }
    }

    fn dual_norm(&self, x: &Vector64) -> f64 {
        match self {
            Reference::Lp(p) => {
                let q = p / (p - 1.0);
                x.iter().map(|v| v.abs().powf(q)).sum::<f64>().powf(1.0 / q)
            }
            Reference::Weighted(w) => x.iter().zip(w.iter()).map(|(v, w)| v * v / w).sum::<f64>().sqrt(),
            Reference::Transformed(l) => l.transpose().lu().solve(x).unwrap().norm(),
        }
    }
}

fn duality_map_certification() -> Verdict {
    let mut rng = random::seeded(101);
    let (mut worst_norm, mut worst_pair, mut passed) = (0.0_f64, 0.0_f64, 0);
    let trials = 1000;
    for t in 0..trials {
        let n = rng.random_range(2..=10);
        let reference = match t % 5 {
            0 => Reference::Lp(1.2),
            1 => Reference::Lp(2.0),
            2 => Reference::Lp(3.7),
            3 => Reference::Weighted(random::uniform_vector(&mut rng, n, 0.1, 5.0)),
            _ => Reference::Transformed(random::well_conditioned_matrix(&mut rng, n)),
        };
        let x: Vector64 = random::normal_vector(&mut rng, n);
        let xstar = duality_map(&x, &reference.spec()).map_err(|e| e.to_string())?;
        let nx = reference.norm(&x);
        let norm_gap = (reference.dual_norm(&xstar) - nx).abs() / nx;
        let pair_gap = (x.dot(&xstar) - nx * nx).abs() / (nx * nx);
        worst_norm = worst_norm.max(norm_gap);
        worst_pair = worst_pair.max(pair_gap);
        if norm_gap <= 1e-9 && pair_gap <= 1e-9 {
            passed += 1;
        }
    }
    check(
        passed == trials,
        format!("{passed}/{trials} trials; worst norm gap {worst_norm:.2e}, worst pairing gap {worst_pair:.2e}"),
    )
}

fn composite_conjugate_formula() -> Verdict {
    let mut rng = random::seeded(102);
    let (mut conj_ok, mut bound_ok, mut worst, mut worst_search) = (0, 0, 0.0_f64, 0.0_f64);
    let trials = 200;
    for t in 0..trials {
        let outer = match t % 3 {
            0 => NormSpec::l1(),
            1 => NormSpec::l2(),
            _ => NormSpec::weighted_euclidean(random::uniform_vector(&mut rng, 2, 0.2, 4.0)).unwrap(),
        };
        let inner = [NormSpec::lp(rng.random_range(1.3..4.0)).unwrap(), NormSpec::l2()];
        let parts: Vec<(Vector64, NormSpec<f64>)> =
            inner.iter().map(|s| (random::normal_vector(&mut rng, 2), s.clone())).collect();
        let images = composite_conjugate(&parts, &outer).map_err(|e| e.to_string())?;
        let spec = NormSpec::composite(inner.iter().map(|s| (2, s.clone())).collect(), outer).unwrap();
        let x = Vector64::from_iterator(4, parts.iter().flat_map(|(v, _)| v.iter().copied()));
        let xstar = Vector64::from_iterator(4, images.iter().flat_map(|v| v.iter().copied()));
        if is_conjugate_pair(&x, &xstar, &spec, 1e-9).map_err(|e| e.to_string())?.is_conjugate {
            conj_ok += 1;
        }
        let exact = spec.dual().norm(&x).unwrap();
        let bound = brute_force_dual_norm(&x, &spec, 500, t as u64).unwrap();
        let searched = sampled_dual_norm(&x, &spec, 2000, t as u64).unwrap();
        worst = worst.max(exact - bound);
        worst_search = worst_search.max(exact - searched);
        let below = |v: f64| v <= exact * (1.0 + 1e-12);
        if below(bound) && below(searched) && exact - bound <= 1e-6 && exact - searched <= 1e-6 {
            bound_ok += 1;
        }
    }
    check(
        conj_ok == trials && bound_ok == trials,
        format!(
            "conjugate pairs {conj_ok}/{trials}, dual-norm bound {bound_ok}/{trials}; worst gap {worst:.2e} (bound), {worst_search:.2e} (pure search)"
        ),
    )
}

fn representer_membership() -> Verdict {
    let mut rng = random::seeded(103);
    let mut worst_ridge = 0.0_f64;
    for _ in 0..50 {
        let h: Matrix64 = random::normal_matrix(&mut rng, 4, 20);
        let y: Vector64 = random::normal_vector(&mut rng, 4);
        let lambda = rng.random_range(0.05..2.0);
        let ridge = (h.transpose() * &h + Matrix64::identity(20, 20) * lambda).lu().solve(&(h.transpose() * &y)).unwrap();
        let m = verify_representer_membership(&ridge, &h, &NormSpec::l2(), 1e-10).map_err(|e| e.to_string())?;
        worst_ridge = worst_ridge.max(m.residual);
    }
    let spec = NormSpec::lp(3.0).unwrap();
    let mut worst_p3 = 0.0_f64;
    for _ in 0..3 {
        let h: Matrix64 = random::normal_matrix(&mut rng, 4, 20);
        let y: Vector64 = random::normal_vector(&mut rng, 4);
        let p3 = |x: &Vector64| x.iter().map(|v| v.abs().powi(3)).sum::<f64>().cbrt();
        let problem = GenericConvexProblem::new(
            20,
            |x: &Vector64| (&y - &h * x).norm_squared() + p3(x).powi(2),
            |x: &Vector64| {
                let n = p3(x);
                let grad_reg = if n > 0.0 { x.map(|v| 2.0 * v.abs() * v / n) } else { Vector64::zeros(20) };
                h.transpose() * (&h * x - &y) * 2.0 + grad_reg
            },
        );
        let sol = solve_generic(&problem, 1_000_000, 0);
        let m = verify_representer_membership(&sol.x, &h, &spec, 1e-3).map_err(|e| e.to_string())?;
        worst_p3 = worst_p3.max(m.residual);
    }
    check(
        worst_ridge <= 1e-10 && worst_p3 <= 1e-3,
        format!("ridge worst residual {worst_ridge:.2e} (50 problems), p=3 worst residual {worst_p3:.2e} (3 problems)"),
    )
}

fn multikernel_weighted_l2() -> Verdict {
    let mut rng = random::seeded(104);
    let (mut worst_obj, mut worst_alpha) = (0.0_f64, 0.0_f64);
    for _ in 0..20 {
        let m = rng.random_range(3..=10);
        let points: Vec<Vector64> = (0..m).map(|_| random::normal_vector(&mut rng, 2)).collect();
        let y: Vector64 = random::normal_vector(&mut rng, m);
        let kernels = vec![
            KernelSpec::gaussian(rng.random_range(0.3..1.5)).unwrap(),
            KernelSpec::laplacian(rng.random_range(0.5..2.0)).unwrap(),
            KernelSpec::polynomial(2, 1.0).unwrap(),
        ];
        let lambdas: Vector64 = random::uniform_vector(&mut rng, 3, 0.2, 2.0);
        let problem =
            MultiKernelProblem::new(points, y.clone(), kernels, OuterRegularizer::WeightedL2(lambdas.clone())).unwrap();
        let fit = fit_weighted_l2(&problem).map_err(|e| e.to_string())?;
        let grams = problem.grams().unwrap();
        // oracle over f_n = G_n^{1/2} β_n on the samples, with ‖f_n‖ = ‖β_n‖
        let roots: Vec<Matrix64> = grams
            .iter()
            .map(|g| {
                let eig = g.clone().symmetric_eigen();
                let d = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
                &eig.eigenvectors * Matrix64::from_diagonal(&d) * eig.eigenvectors.transpose()
            })
            .collect();
        let block = |z: &Vector64, n: usize| z.rows(n * m, m).into_owned();
        let predict = |z: &Vector64| roots.iter().enumerate().fold(Vector64::zeros(m), |acc, (n, b)| acc + b * block(z, n));
        let oracle = GenericConvexProblem::new(
            3 * m,
            |z: &Vector64| {
                (&y - predict(z)).norm_squared() + (0..3).map(|n| lambdas[n] * block(z, n).norm_squared()).sum::<f64>()
            },
            |z: &Vector64| {
                let r = predict(z) - &y;
                let mut g = Vector64::zeros(3 * m);
                for (n, b) in roots.iter().enumerate() {
                    g.rows_mut(n * m, m).copy_from(&(b * &r * 2.0 + block(z, n) * (2.0 * lambdas[n])));
                }
                g
            },
        );
        let reference = solve_ellipsoid(&oracle, &Vector64::zeros(3 * m), 10.0 * (1.0 + y.norm()), 120_000)
            .map_err(|e| e.to_string())?
            .objective;
        worst_obj = worst_obj.max((fit.objective - reference).abs());
        // component norms ‖f_n‖ = α_n √(aᵀ G_n a); outer conjugate of z is Λ z
        let alpha = fit.model.kernel.weights();
        let a = &fit.model.coefficients;
        for n in 0..3 {
            let z = alpha[n] * a.dot(&(&grams[n] * a)).max(0.0).sqrt();
            let zstar = lambdas[n] * z;
            if z > 1e-12 {
                worst_alpha = worst_alpha.max((alpha[n] - z / zstar).abs());
            }
        }
    }
    check(
        worst_obj <= 1e-6 && worst_alpha <= 1e-8,
        format!("20 instances; worst objective gap {worst_obj:.2e}, worst alpha relation gap {worst_alpha:.2e}"),
    )
}

fn analysis_synthesis_equivalence() -> Verdict {
    let mut rng = random::seeded(105);
    let n = 8;
    let diff: Matrix64 = forward_difference(n);
    let inv_norm = diff.clone().try_inverse().unwrap().norm();
    let (mut worst_cross, mut worst_oracle) = (0.0_f64, 0.0_f64);
    for _ in 0..50 {
        let h: Matrix64 = random::normal_matrix(&mut rng, 5, n);
        let y: Vector64 = random::normal_vector(&mut rng, 5);
        let lambda = rng.random_range(0.05..1.0);
        let problem = DictionaryProblem::new(h.clone(), y.clone(), vec![Matrix64::identity(n, n), diff.clone()], lambda)
            .map_err(|e| e.to_string())?;
        let sol = problem.solve(20_000, 1e-12).map_err(|e| e.to_string())?;
        let analysis = |x1: &Vector64, x2: &Vector64| {
            (&y - &h * (x1 + x2)).norm_squared() + lambda * (x1.lp_norm(1) + (&diff * x2).lp_norm(1))
        };
        // synthesis coefficients mapped to analysis variables x_i = L_i⁻¹ c_i
        let c = &sol.sparse.c;
        let x1 = c.rows(0, n).into_owned();
        let x2 = diff.clone().lu().solve(&c.rows(n, n).into_owned()).unwrap();
        worst_cross = worst_cross.max((analysis(&x1, &x2) - sol.sparse.objective).abs());
        // analysis-form oracle mapped back through c_i = L_i x_i
        let oracle = GenericConvexProblem::new(
            2 * n,
            |z: &Vector64| analysis(&z.rows(0, n).into_owned(), &z.rows(n, n).into_owned()),
            |z: &Vector64| {
                let (a1, a2) = (z.rows(0, n).into_owned(), z.rows(n, n).into_owned());
                let g = h.transpose() * (&h * (&a1 + &a2) - &y) * 2.0;
                let mut out = Vector64::zeros(2 * n);
                out.rows_mut(0, n).copy_from(&(&g + a1.map(sign) * lambda));
                out.rows_mut(n, n).copy_from(&(&g + diff.transpose() * (&diff * &a2).map(sign) * lambda));
                out
            },
        );
        // λ‖L_i x_i‖₁ ≤ ‖y‖² at any minimizer bounds ‖x_1‖ and ‖x_2‖ ≤ ‖D⁻¹‖‖D x_2‖
        let radius = 1.01 * y.norm_squared() / lambda * (1.0 + inv_norm * inv_norm).sqrt();
        let found = solve_ellipsoid(&oracle, &Vector64::zeros(2 * n), radius, 60_000).map_err(|e| e.to_string())?;
        let mut back = Vector64::zeros(2 * n);
        back.rows_mut(0, n).copy_from(&found.x.rows(0, n));
        back.rows_mut(n, n).copy_from(&(&diff * found.x.rows(n, n).into_owned()));
        let synthesis_of_oracle = (&y - problem.synthesis_matrix() * &back).norm_squared() + lambda * back.lp_norm(1);
        worst_oracle = worst_oracle.max((synthesis_of_oracle - sol.sparse.objective).abs());
    }
    check(
        worst_cross <= 1e-6 && worst_oracle <= 1e-6,
        format!("50 instances; synthesis-to-analysis gap {worst_cross:.2e}, analysis-oracle-to-synthesis gap {worst_oracle:.2e}"),
    )
}

fn extreme_point_sparsity() -> Verdict {
    let mut rng = random::seeded(106);
    let n = 10;
    let inv_diff = forward_difference::<f64>(n).try_inverse().unwrap();
    let (mut passed, mut worst_drift) = (0, 0.0_f64);
    for _ in 0..100 {
        let h: Matrix64 = random::normal_matrix(&mut rng, 3, n);
        let mut a = Matrix64::zeros(3, 2 * n);
        a.columns_mut(0, n).copy_from(&h);
        a.columns_mut(n, n).copy_from(&(&h * &inv_diff));
        let c: Vector64 = random::normal_vector(&mut rng, 2 * n);
        let out = reduce_to_extreme(&a, &c, 1e-10).map_err(|e| e.to_string())?.coefficients;
        let support = out.iter().filter(|v| **v != 0.0).count();
        let drift = (&a * &out - &a * &c).amax();
        worst_drift = worst_drift.max(drift);
        if support <= 3 && out.lp_norm(1) <= c.lp_norm(1) * (1.0 + 1e-12) && drift <= 1e-9 {
            passed += 1;
        }
    }
    check(passed == 100, format!("{passed}/100 trials; worst measurement drift {worst_drift:.2e}"))
}

fn biortho_identity() -> Verdict {
    let mut rng = random::seeded(107);
    let (mut worst_id, mut worst_ann) = (0.0_f64, 0.0_f64);
    for _ in 0..100 {
        let v: Matrix64 = random::normal_matrix(&mut rng, 6, 2);
        let sys = build_biortho(&v, None).map_err(|e| e.to_string())?;
        let primal = Matrix64::from_columns(&sys.u.column_iter().chain(sys.v.column_iter()).collect::<Vec<_>>());
        let dual = Matrix64::from_columns(&sys.utilde.column_iter().chain(sys.vtilde.column_iter()).collect::<Vec<_>>());
        worst_id = worst_id.max((dual.transpose() * primal - Matrix64::identity(6, 6)).amax());
        worst_ann = worst_ann.max((sys.utilde.transpose() * &v).amax());
    }
    check(
        worst_id <= 1e-12 && worst_ann <= 1e-12,
        format!("100 systems; identity defect {worst_id:.2e}, annihilation defect {worst_ann:.2e}"),
    )
}

fn positions(rng: &mut SeededRng, m: usize, g: usize) -> Vec<f64> {
    (0..m).map(|_| rng.random_range(0.0..(g - 1) as f64)).collect()
}

fn gtv_knot_bound() -> Verdict {
    let mut rng = random::seeded(108);
    let g = 200;
    let mut report = Vec::new();
    let mut ok = true;
    for op in [SplineOperator::D, SplineOperator::D2] {
        let bound = 8 - op.null_dim();
        let (mut within, mut most) = (0, 0);
        for _ in 0..100 {
            let h: Matrix64 = interpolation_matrix(g, &positions(&mut rng, 8, g)).unwrap();
            let y: Vector64 = random::normal_vector(&mut rng, 8);
            let lambda = gtv_lambda_max(g, &h, &y, op).unwrap() * rng.random_range(0.001..0.95);
            let fit = fit_gtv_spline(g, &h, &y, op, lambda, 20_000, 1e-10).map_err(|e| e.to_string())?;
            most = most.max(fit.knots.len());
            if fit.knots.len() <= bound && fit.converged {
                within += 1;
            }
        }
        ok &= within == 100;
        report.push(format!("{op}: {within}/100 within {bound} knots (max {most})"));
        // null-space data: constant for D, affine for D2
        let mut worst = 0.0_f64;
        let mut knots = 0;
        for _ in 0..10 {
            let h: Matrix64 = interpolation_matrix(g, &positions(&mut rng, 8, g)).unwrap();
            let (c0, c1) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let truth = Vector64::from_fn(g, |i, _| match op {
                SplineOperator::D => c0,
                SplineOperator::D2 => c0 + c1 * i as f64 / (g - 1) as f64,
            });
            let fit = fit_gtv_spline(g, &h, &(&h * &truth), op, 0.3, 20_000, 1e-10).map_err(|e| e.to_string())?;
            worst = worst.max((&fit.f - &truth).amax());
            knots += fit.knots.len();
        }
        ok &= worst <= 1e-10 && knots == 0;
        report.push(format!("{op} null-space reproduction residual {worst:.2e} with {knots} knots"));
    }
    check(ok, report.join("; "))
}

fn hilbert_seminorm_fit() -> Verdict {
    let mut rng = random::seeded(109);
    let g = 80;
    let (mut worst, mut worst_interp) = (0.0_f64, 0.0_f64);
    for t in 0..20 {
        let op = if t % 2 == 0 { SplineOperator::D } else { SplineOperator::D2 };
        let m = rng.random_range(4..=10);
        let nu: Matrix64 = interpolation_matrix(g, &positions(&mut rng, m, g)).unwrap();
        let y: Vector64 = random::normal_vector(&mut rng, m);
        let (p, l): (Matrix64, Matrix64) = (op.null_basis(g).unwrap(), op.matrix(g).unwrap());
        let lambda = rng.random_range(0.01..5.0);
        let fit = fit_hilbert_seminorm(&nu, &y, &p, &l, lambda).map_err(|e| e.to_string())?;
        let reference = smoothing_spline_block_system(&nu, &y, &p, &l, lambda).map_err(|e| e.to_string())?;
        worst = worst.max((&fit.f - reference).amax());
        let tight = fit_hilbert_seminorm(&nu, &y, &p, &l, 1e-10).map_err(|e| e.to_string())?;
        worst_interp = worst_interp.max((&y - &nu * &tight.f).norm() / y.norm());
    }
    check(
        worst <= 1e-8 && worst_interp <= 1e-6,
        format!("20 problems; block-system gap {worst:.2e}, relative interpolation residual {worst_interp:.2e}"),
    )
}

fn mixed_two_component() -> Verdict {
    let mut rng = random::seeded(110);
    let n = 6;
    let l1 = Matrix64::identity(n, n);
    let l2: Matrix64 = forward_difference(n);
    let (mut worst_tik, mut worst_lasso, mut worst_oracle) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..5 {
        let h: Matrix64 = random::normal_matrix(&mut rng, 4, n);
        let y: Vector64 = random::normal_vector(&mut rng, 4);
        let lam2 = rng.random_range(0.1..1.0);

        let big1 = 2.0 * h.column_iter().map(|c| c.norm()).fold(0.0, f64::max) * y.norm() + 1.0;
        let sol = solve_mixed_two_component(&h, &l1, &l2, &y, big1, lam2, 20_000, 1e-12).map_err(|e| e.to_string())?;
        let closed = (h.transpose() * &h + l2.transpose() * &l2 * lam2).lu().solve(&(h.transpose() * &y)).unwrap();
        worst_tik = worst_tik.max((&sol.x1 + &sol.x2 - closed).amax());

        let lam1 = rng.random_range(0.1..1.0);
        let sol = solve_mixed_two_component(&h, &l1, &l2, &y, lam1, 1e9, 20_000, 1e-12).map_err(|e| e.to_string())?;
        let lasso = solve_synthesis_lasso(&h, &y, lam1, 20_000, 1e-12).map_err(|e| e.to_string())?;
        worst_lasso = worst_lasso.max((sol.objective - lasso.objective).abs());

        let sol = solve_mixed_two_component(&h, &l1, &l2, &y, lam1, lam2, 20_000, 1e-12).map_err(|e| e.to_string())?;
        let l2tl2 = l2.transpose() * &l2;
        let oracle = GenericConvexProblem::new(
            2 * n,
            |z: &Vector64| {
                let (x1, x2) = (z.rows(0, n).into_owned(), z.rows(n, n).into_owned());
                (&y - &h * (&x1 + &x2)).norm_squared() + lam1 * x1.lp_norm(1) + lam2 * (&l2 * &x2).norm_squared()
            },
            |z: &Vector64| {
                let (x1, x2) = (z.rows(0, n).into_owned(), z.rows(n, n).into_owned());
                let g = h.transpose() * (&h * (&x1 + &x2) - &y) * 2.0;
                let mut out = Vector64::zeros(2 * n);
                out.rows_mut(0, n).copy_from(&(&g + x1.map(sign) * lam1));
                out.rows_mut(n, n).copy_from(&(&g + &l2tl2 * &x2 * (2.0 * lam2)));
                out
            },
        );
        let radius = 100.0 * (1.0 + y.norm_squared()) / lam1.min(lam2);
        let reference = solve_ellipsoid(&oracle, &Vector64::zeros(2 * n), radius, 60_000)
            .map_err(|e| e.to_string())?
            .objective;
        worst_oracle = worst_oracle.max((sol.objective - reference).abs());
    }
    check(
        worst_tik <= 1e-6 && worst_lasso <= 1e-5 && worst_oracle <= 1e-5,
        format!(
            "Tikhonov limit gap {worst_tik:.2e}, LASSO limit gap {worst_lasso:.2e}, oracle gap {worst_oracle:.2e} (5 instances each)"
        ),
    )
}

fn cli_determinism_and_round_trip() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = dir.path();
    let reg = write(p, "data.csv", &regression_csv(16));
    let h = write(p, "h.csv", &matrix_csv(6, 10, 11));
    let y = write(p, "y.csv", &observations_csv(&[0.4, -1.0, 0.7, 1.5, -0.2, 0.9]));
    let runs: Vec<Vec<&str>> = vec![
        vec!["fit-kernel", "--kernel", "gaussian:0.3", "--lambda", "0.1", s(&reg)],
        vec!["fit-multikernel", "--kernels", "gaussian:0.3,laplacian:1", "--outer", "l1", "--lambda", "0.2", "--seed", "5", s(&reg)],
        vec!["fit-multikernel", "--kernels", "gaussian:0.3,polynomial:2:1", "--lambdas", "0.5,2", s(&reg)],
        vec!["fit-spline", "--operator", "D", "--lambda", "0.5", "--grid", "200", s(&reg)],
        vec!["fit-spline", "--operator", "D2", "--penalty", "quadratic", "--lambda", "0.01", s(&reg)],
        vec!["fit-dict", "--matrix", s(&h), "--transforms", "identity,diff", "--lambda", "0.1", s(&y)],
        vec!["fit-mixed", "--matrix", s(&h), "--lambda1", "0.2", "--lambda2", "0.4", s(&y)],
    ];
    let out = p.join("out.json");
    let (mut identical, mut worst) = (0, 0.0_f64);
    for args in &runs {
        let mut full = args.clone();
        full.extend([s(&out), "--no-timing"]);
        let mut bytes = Vec::new();
        for _ in 0..2 {
            let result = run(&full);
            if code(&result) != 0 {
                return Err(format!("{} exited {}: {}", args[0], code(&result), stderr(&result)));
            }
            bytes.push(std::fs::read(&out).map_err(|e| e.to_string())?);
        }
        if bytes[0] == bytes[1] {
            identical += 1;
        }
        let doc = OutputDoc::read(&out).map_err(|e| e.to_string())?;
        let reported = doc.objective.ok_or("missing objective")?;
        let again = recompute_objective(&doc).map_err(|e| e.to_string())?.ok_or("missing objective")?;
        worst = worst.max((reported - again).abs() / reported.abs().max(1.0));
    }
    check(
        identical == runs.len() && worst <= 1e-12,
        format!("{identical}/{} runs byte-identical; worst round-trip drift {worst:.2e}", runs.len()),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 11] = [
        ("duality-map certification", duality_map_certification),
        ("composite conjugate vs brute force", composite_conjugate_formula),
        ("representer membership", representer_membership),
        ("multi-kernel weighted l2", multikernel_weighted_l2),
        ("analysis-synthesis equivalence", analysis_synthesis_equivalence),
        ("extreme-point sparsity", extreme_point_sparsity),
        ("biorthogonal identity", biortho_identity),
        ("gTV knot bound", gtv_knot_bound),
        ("Hilbert semi-norm fit", hilbert_seminorm_fit),
        ("mixed two-component solver", mixed_two_component),
        ("CLI determinism and round-trip", cli_determinism_and_round_trip),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = run();
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("PASS criterion {:>2} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
