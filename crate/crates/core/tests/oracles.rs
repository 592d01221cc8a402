use irsplit::admm::SplitProblem;
use irsplit::problems::{synthetic_lasso, synthetic_logistic, DesignMatrix, LassoProblem, LogisticProblem};
use irsplit::solvers::cg::CgSession;
use irsplit::solvers::lbfgs::augmented_value_grad;
use irsplit::solvers::prox::{soft_threshold, soft_threshold_scalar};
use irsplit::Point;
use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_point(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Point {
    Point::from_iter((0..n).map(|_| rng.random_range(-scale..scale)))
}

/// Central differences with step `h`, relative error against `grad`.
fn fd_error(f: &dyn Fn(&Point) -> f64, grad: &Point, x: &Point, h: f64) -> f64 {
    let mut worst = 0.0f64;
    let scale = grad.iter().fold(1.0f64, |m, g| m.max(g.abs()));
    for i in 0..x.len() {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        let fd = (f(&xp) - f(&xm)) / (2.0 * h);
        worst = worst.max((fd - grad[i]).abs() / scale);
    }
    worst
}

#[test]
fn lasso_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let p = synthetic_lasso(30, 20, 1.0, 0.05, 1).problem;
    for _ in 0..5 {
        let x = random_point(&mut rng, 20, 2.0);
        let err = fd_error(&|x| p.f_value(x), &p.f_gradient(&x), &x, 1e-5);
        assert!(err <= 1e-6, "{err:e}");
    }
}

#[test]
fn logistic_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let p = synthetic_logistic(40, 9, 2).problem;
    for _ in 0..5 {
        let x = random_point(&mut rng, 9, 1.5);
        let err = fd_error(&|x| p.f_value(x), &p.f_gradient(&x), &x, 1e-5);
        assert!(err <= 1e-6, "{err:e}");
    }
}

#[test]
fn augmented_subproblem_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = synthetic_logistic(25, 6, 3).problem;
    let (pp, z) = (random_point(&mut rng, 6, 1.0), random_point(&mut rng, 6, 1.0));
    let c = 1.7;
    for _ in 0..5 {
        let x = random_point(&mut rng, 6, 1.0);
        let (_, g) = augmented_value_grad(&p, &pp, &z, c, &x);
        let f = |x: &Point| augmented_value_grad(&p, &pp, &z, c, x).0;
        assert!(fd_error(&f, &g, &x, 1e-5) <= 1e-6);
    }
}

/// `min_{u ∈ grid(−ν, ν)} |g + u|` for zero coordinates, `|g + ν sign x|`
/// otherwise.
fn kkt_by_grid(grad: &Point, x: &Point, nu: f64, free: usize, h: f64) -> f64 {
    let steps = (2.0 * nu / h).ceil() as usize;
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        let d = if i < free {
            grad[i].abs()
        } else if x[i] != 0.0 {
            (grad[i] + nu * x[i].signum()).abs()
        } else {
            (0..=steps).map(|j| (grad[i] - nu + j as f64 * 2.0 * nu / steps as f64).abs()).fold(f64::INFINITY, f64::min)
        };
        worst = worst.max(d);
    }
    worst
}

#[test]
fn kkt_residuals_match_grid_oracle() {
    let h = 1e-4;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let lasso = synthetic_lasso(30, 25, 1.0, 0.05, 4).problem;
    let logistic = synthetic_logistic(30, 12, 4).problem;
    for _ in 0..20 {
        let mut x = random_point(&mut rng, 25, 1.0);
        x.iter_mut().step_by(2).for_each(|v| *v = 0.0);
        let oracle = kkt_by_grid(&lasso.f_gradient(&x), &x, lasso.nu, 0, h);
        assert!((lasso.kkt_dist_inf(&x) - oracle).abs() <= h);

        let mut x = random_point(&mut rng, 12, 0.5);
        x.iter_mut().skip(1).step_by(3).for_each(|v| *v = 0.0);
        let oracle = kkt_by_grid(&logistic.f_gradient(&x), &x, logistic.nu, 1, h);
        assert!((logistic.kkt_dist_inf(&x) - oracle).abs() <= h);
    }
}

proptest! {
    #[test]
    fn soft_threshold_minimizes_on_a_grid(t in -5.0f64..5.0, kappa in 0.0f64..3.0) {
        let h = 1e-3;
        let obj = |u: f64| kappa * u.abs() + 0.5 * (u - t) * (u - t);
        let best = (0..=12_000).map(|j| -6.0 + j as f64 * h).min_by(|a, b| obj(*a).total_cmp(&obj(*b))).unwrap();
        prop_assert!((soft_threshold_scalar(t, kappa) - best).abs() <= h);
        let v = soft_threshold(&Point::from_vec(vec![t, -t]), kappa);
        prop_assert_eq!(v[0], -v[1]);
    }
}

#[test]
fn cg_terminates_in_n_steps() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [1, 2, 5, 10, 25, 50] {
        let m = 2 * n;
        let a = Array2::from_shape_fn((m, n), |_| rng.random_range(-1.0..1.0) / (m as f64).sqrt());
        let h = a.t().dot(&a) + Array2::<f64>::eye(n);
        let rhs = random_point(&mut rng, n, 1.0);
        let op = |x: &Point| h.dot(x);
        let mut cg = CgSession::new(op, rhs.clone(), Point::zeros(n));
        let mut y = cg.step().unwrap().1;
        for _ in 0..n {
            y = cg.step().unwrap().1;
        }
        let norm = y.dot(&y).sqrt();
        assert!(norm <= 1e-10, "n = {n}: ‖y‖ = {norm:e}");
        let true_residual = h.dot(cg.x()) - &rhs;
        assert!(true_residual.dot(&true_residual).sqrt() <= 1e-10);
    }
}

#[test]
fn fprocedure_residual_is_subproblem_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let lasso = synthetic_lasso(20, 15, 1.0, 0.05, 6).problem;
    let (p, z, xb) = (random_point(&mut rng, 15, 1.0), random_point(&mut rng, 15, 1.0), random_point(&mut rng, 15, 1.0));
    let c = 0.8;
    let fproc = lasso.fprocedure();
    let mut session = fproc.open(&p, &z, c, &xb);
    for l in 0..16 {
        let (x, y) = session.next().unwrap();
        if l == 0 {
            assert_eq!(x, xb);
        }
        let grad = lasso.f_gradient(&x) + &p + &((&x - &z) * c);
        let err = (&y - &grad).iter().fold(0.0f64, |m, e| m.max(e.abs()));
        assert!(err <= 1e-10, "step {l}: {err:e}");
    }

    let logistic = synthetic_logistic(20, 6, 6).problem;
    let (p, z) = (random_point(&mut rng, 6, 0.5), random_point(&mut rng, 6, 0.5));
    let fproc = logistic.fprocedure();
    let mut session = fproc.open(&p, &z, c, &Point::zeros(6));
    let mut last = f64::INFINITY;
    for _ in 0..60 {
        let (x, y) = session.next().unwrap();
        let grad = logistic.f_gradient(&x) + &p + &((&x - &z) * c);
        assert!((&y - &grad).iter().all(|e| e.abs() <= 1e-10));
        last = y.dot(&y).sqrt();
    }
    assert!(last <= 1e-8, "L-BFGS stalled at ‖y‖ = {last:e}");
}

#[test]
fn sparse_and_dense_designs_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let dense = Array2::from_shape_fn((12, 9), |_| if rng.random::<f64>() < 0.3 { rng.random_range(-1.0..1.0) } else { 0.0 });
    let a = DesignMatrix::Dense(dense.clone());
    let s = DesignMatrix::Sparse(a.to_sparse());
    let x = random_point(&mut rng, 9, 1.0);
    let u = random_point(&mut rng, 12, 1.0);
    assert!((a.apply(&x) - s.apply(&x)).iter().all(|e| e.abs() < 1e-14));
    assert!((a.apply_transpose(&u) - s.apply_transpose(&u)).iter().all(|e| e.abs() < 1e-14));
    assert_eq!(s.to_dense(), dense);

    let b = random_point(&mut rng, 12, 1.0);
    let ld = LassoProblem::new(a.clone(), b.clone(), 0.1).unwrap();
    let ls = LassoProblem::new(s.clone(), b, 0.1).unwrap();
    assert!((ld.objective(&x) - ls.objective(&x)).abs() < 1e-12);
    let labels = u.mapv(|v| if v > 0.0 { 1.0 } else { -1.0 });
    let gd = LogisticProblem::new(a, labels.clone(), 0.1).unwrap();
    let gs = LogisticProblem::new(s, labels, 0.1).unwrap();
    let xx = random_point(&mut rng, 10, 1.0);
    assert!((gd.f_gradient(&xx) - gs.f_gradient(&xx)).iter().all(|e| e.abs() < 1e-12));
}
