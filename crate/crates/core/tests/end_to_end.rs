use irsplit::admm::{run_admm, AcceptanceRule, AdmmParams, PrimalDualTriple};
use irsplit::hpp::InertiaRelaxParams;
use irsplit::problems::{synthetic_lasso, synthetic_logistic};
use irsplit::solvers::fista::fista_solve_observed;
use irsplit::solvers::{fista_solve, FistaConfig};
use irsplit::Point;

#[test]
fn lasso_converges_with_published_settings() {
    for seed in 0..3 {
        let p = synthetic_lasso(100, 300, 1.0, 0.01, seed).problem;
        let mut params = AdmmParams::new(1.0, InertiaRelaxParams::lasso_defaults());
        params.max_outer = 5000;
        assert_eq!(params.criterion, AcceptanceRule::MaxForm);
        let run = run_admm(&p, &params, PrimalDualTriple::zeros(300)).unwrap();
        assert!(run.record.final_kkt <= 1e-6);
        assert!(p.kkt_dist_inf(&run.x) <= 1e-6);
        assert!(run.record.inner_iters_total >= run.record.outer_iters);
    }
}

#[test]
fn logistic_converges_with_published_settings() {
    let p = synthetic_logistic(50, 31, 0).problem;
    let zeros = {
        let cfg = FistaConfig { epsilon: 1e-9, max_iters: 200_000, ..FistaConfig::default() };
        let x = fista_solve(&p, Point::zeros(31), &cfg).unwrap().x;
        x.iter().skip(1).filter(|v| **v == 0.0).count()
    };
    assert!((10..=20).contains(&zeros), "{zeros} zeros of 30");
    let params = AdmmParams::new(1.0, InertiaRelaxParams::logistic_defaults());
    let run = run_admm(&p, &params, PrimalDualTriple::zeros(31)).unwrap();
    assert!(run.record.final_kkt <= 1e-6);
    assert!(run.record.outer_iters <= 10_000);
}

#[test]
fn admm_and_fista_agree() {
    let cfg = FistaConfig { epsilon: 1e-8, ..FistaConfig::default() };
    for seed in 0..2 {
        let p = synthetic_lasso(40, 80, 1.0, 0.01, 10 + seed).problem;
        let mut params = AdmmParams::new(1.0, InertiaRelaxParams::lasso_defaults());
        params.epsilon = 1e-8;
        let a = run_admm(&p, &params, PrimalDualTriple::zeros(80)).unwrap();
        let f = fista_solve(&p, Point::zeros(80), &cfg).unwrap();
        assert!((p.objective(&a.x) - p.objective(&f.x)).abs() <= 1e-8);
        let reference = p.reference_solution().unwrap();
        assert!((p.objective(&reference) - p.objective(&a.x)).abs() <= 1e-8);

        let q = synthetic_logistic(30, 11, seed).problem;
        let mut params = AdmmParams::new(1.0, InertiaRelaxParams::logistic_defaults());
        params.epsilon = 1e-8;
        let a = run_admm(&q, &params, PrimalDualTriple::zeros(11)).unwrap();
        let f = fista_solve(&q, Point::zeros(11), &cfg).unwrap();
        assert!((q.objective(&a.x) - q.objective(&f.x)).abs() <= 1e-8);
    }
}

#[test]
fn plain_admm_converges_too() {
    let p = synthetic_lasso(50, 120, 1.0, 0.01, 4).problem;
    for rule in [AcceptanceRule::MaxForm, AcceptanceRule::SumSquares] {
        let mut params = AdmmParams::new(1.0, InertiaRelaxParams::plain(0.99));
        params.criterion = rule;
        let run = run_admm(&p, &params, PrimalDualTriple::zeros(120)).unwrap();
        assert!(run.record.converged());
    }
}

#[test]
fn fista_majorization_holds_at_every_step() {
    let p = synthetic_lasso(30, 60, 1.0, 0.01, 8).problem;
    let mut lips = vec![];
    let mut n = 0;
    fista_solve_observed(&p, Point::zeros(60), &FistaConfig::default(), |s| {
        // accepted step: F(x⁺) ≤ F(y) since x⁺ minimizes the majorizer at y
        assert!(s.objective_x <= s.objective_y + 1e-12 * (1.0 + s.objective_y.abs()));
        lips.push(s.lipschitz);
        n += 1;
    })
    .unwrap();
    assert!(n > 0);
    assert!(lips.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn kkt_stride_only_delays_the_check() {
    let p = synthetic_lasso(40, 90, 1.0, 0.01, 3).problem;
    let mut params = AdmmParams::new(1.0, InertiaRelaxParams::lasso_defaults());
    let every = run_admm(&p, &params, PrimalDualTriple::zeros(90)).unwrap();
    params.kkt_stride = 5;
    let strided = run_admm(&p, &params, PrimalDualTriple::zeros(90)).unwrap();
    assert!(strided.record.outer_iters >= every.record.outer_iters);
    assert!(strided.record.outer_iters < every.record.outer_iters + 5);
    assert_eq!(strided.record.outer_iters % 5, 0);
}
