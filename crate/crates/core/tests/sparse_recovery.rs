use banach_rep::oracle::{solve_ellipsoid, GenericConvexProblem};
use banach_rep::random;
use banach_rep::scalar::sign;
use banach_rep::sparse::{
    analysis_objective, forward_difference, lasso_objective, reduce_to_extreme, solve_mixed_two_component,
    solve_synthesis_lasso, DictionaryProblem,
};
use banach_rep::{Matrix64, Vector64};

fn lasso_oracle(a: &Matrix64, y: &Vector64, lambda: f64) -> f64 {
    let problem = GenericConvexProblem::new(
        a.ncols(),
        |c: &Vector64| lasso_objective(a, y, lambda, c),
        |c: &Vector64| a.transpose() * (a * c - y) * 2.0 + c.map(sign) * lambda,
    );
    solve_ellipsoid(&problem, &Vector64::zeros(a.ncols()), y.norm_squared() / lambda, 20_000).unwrap().objective
}

#[test]
fn lasso_matches_subgradient_oracle() {
    let mut rng = random::seeded(21);
    for _ in 0..3 {
        let a = random::normal_matrix(&mut rng, 5, 8);
        let y = random::normal_vector(&mut rng, 5);
        let sol = solve_synthesis_lasso(&a, &y, 0.5, 20_000, 1e-12).unwrap();
        let reference = lasso_oracle(&a, &y, 0.5);
        assert!(sol.converged);
        assert!(sol.objective <= reference + 1e-9);
        assert!(reference - sol.objective <= 1e-6, "{} vs {}", sol.objective, reference);
    }
}

#[test]
fn synthesis_and_analysis_agree() {
    let mut rng = random::seeded(5);
    let n = 8;
    let h = random::normal_matrix(&mut rng, 5, n);
    let y = random::normal_vector(&mut rng, 5);
    let problem = DictionaryProblem::new(h, y, vec![Matrix64::identity(n, n), forward_difference(n)], 0.3).unwrap();
    let sol = problem.solve(20_000, 1e-12).unwrap();
    let analysis = analysis_objective(&problem, &sol.components).unwrap();
    assert!((analysis - sol.sparse.objective).abs() <= 1e-10);
    let back = problem.coefficients(&sol.components);
    assert!((back - &sol.sparse.c).amax() <= 1e-12);
}

#[test]
fn reduction_trials() {
    let mut rng = random::seeded(8);
    for _ in 0..25 {
        let a = random::normal_matrix(&mut rng, 3, 20);
        let c = random::normal_vector(&mut rng, 20);
        let red = reduce_to_extreme(&a, &c, 1e-10).unwrap();
        let out = &red.coefficients;
        assert!(out.iter().filter(|v| **v != 0.0).count() <= 3);
        assert!(out.lp_norm(1) <= c.lp_norm(1) + 1e-12);
        assert!((&a * out - &a * &c).amax() <= 1e-9);
    }
}

#[test]
fn reduction_of_optimal_solution_stays_optimal() {
    // duplicated atoms make the LASSO solution set non-unique
    let mut rng = random::seeded(9);
    let base = random::normal_matrix(&mut rng, 3, 4);
    let mut a = Matrix64::zeros(3, 8);
    a.columns_mut(0, 4).copy_from(&base);
    a.columns_mut(4, 4).copy_from(&base);
    let y = random::normal_vector(&mut rng, 3);
    let lambda = 0.2;
    let sol = solve_synthesis_lasso(&a, &y, lambda, 20_000, 1e-12).unwrap();
    // split the mass of every atom evenly between its two copies
    let spread = Vector64::from_fn(8, |i, _| (sol.c[i % 4] + sol.c[i % 4 + 4]) / 2.0);
    let red = reduce_to_extreme(&a, &spread, 1e-10).unwrap();
    assert_eq!(red.fallback_steps, 0);
    assert!((lasso_objective(&a, &y, lambda, &red.coefficients) - sol.objective).abs() <= 1e-10);
}

#[test]
fn mixed_matches_oracle() {
    let mut rng = random::seeded(31);
    let h = random::normal_matrix(&mut rng, 4, 6);
    let y = random::normal_vector(&mut rng, 4);
    let l1 = Matrix64::identity(6, 6);
    let l2 = forward_difference(6);
    let (lam1, lam2) = (0.4, 0.6);
    let sol = solve_mixed_two_component(&h, &l1, &l2, &y, lam1, lam2, 20_000, 1e-12).unwrap();
    assert!(sol.converged);
    let l2tl2 = l2.transpose() * &l2;
    let problem = GenericConvexProblem::new(
        12,
        |z: &Vector64| {
            let (x1, x2) = (z.rows(0, 6).into_owned(), z.rows(6, 6).into_owned());
            (&y - &h * (&x1 + &x2)).norm_squared() + lam1 * x1.lp_norm(1) + lam2 * (&l2 * &x2).norm_squared()
        },
        |z: &Vector64| {
            let (x1, x2) = (z.rows(0, 6).into_owned(), z.rows(6, 6).into_owned());
            let g = h.transpose() * (&h * (&x1 + &x2) - &y) * 2.0;
            let mut out = Vector64::zeros(12);
            out.rows_mut(0, 6).copy_from(&(&g + x1.map(sign) * lam1));
            out.rows_mut(6, 6).copy_from(&(&g + &l2tl2 * &x2 * (2.0 * lam2)));
            out
        },
    );
    let reference = solve_ellipsoid(&problem, &Vector64::zeros(12), 100.0, 40_000).unwrap().objective;
    assert!(sol.objective <= reference + 1e-9);
    assert!(reference - sol.objective <= 1e-5, "{} vs {reference}", sol.objective);
}
