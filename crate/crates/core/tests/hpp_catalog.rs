use irsplit::hpp::catalog::{is_monotone, AffineOracle, ScaledIdentityOracle};
use irsplit::hpp::{
    alvarez_attouch_check, error_criterion_holds, fejer_check, gauss_bounds_hold, increment_partial_sums, run_hpp,
    HppRun, HppStop, InertiaRelaxParams, InexactResolventOracle, ProxCertificate,
};
use irsplit::Point;
use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_monotone(rng: &mut ChaCha8Rng, n: usize, skew: f64) -> Array2<f64> {
    let g = Array2::from_shape_fn((n, n), |_| rng.random_range(-1.0..1.0));
    let k = Array2::from_shape_fn((n, n), |_| rng.random_range(-1.0..1.0));
    let sym = g.t().dot(&g) / n as f64 + Array2::<f64>::eye(n) * 0.05;
    sym + (&k - &k.t()) * skew
}

// z* = −M⁻¹q via nalgebra LU, independent of the crate's dense helpers.
fn affine_zero(m: &Array2<f64>, q: &Point) -> Point {
    let n = q.len();
    let mm = DMatrix::from_fn(n, n, |i, j| m[[i, j]]);
    let qq = DVector::from_iterator(n, q.iter().map(|v| -v));
    let z = mm.lu().solve(&qq).expect("nonsingular");
    Point::from_iter(z.iter().copied())
}

fn settings() -> Vec<InertiaRelaxParams> {
    vec![
        InertiaRelaxParams::plain(0.0),
        InertiaRelaxParams::plain(0.9),
        InertiaRelaxParams::lasso_defaults(),
        InertiaRelaxParams::logistic_defaults(),
        InertiaRelaxParams::coupled(0.25, 0.3, 0.5).unwrap(),
        InertiaRelaxParams::coupled(0.05, 0.06, 0.99).unwrap().with_lambda(2.5),
    ]
}

fn run(oracle: &mut dyn InexactResolventOracle, z0: Point, params: &InertiaRelaxParams) -> HppRun {
    let stop = HppStop { max_iters: 5000, v_tolerance: 1e-6 };
    run_hpp(z0, oracle, params, stop).expect("catalog run converges")
}

#[test]
fn catalog_runs_are_fejer() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for params in settings() {
        let z0 = Point::from_iter((0..6).map(|_| rng.random_range(-3.0..3.0)));
        let r = run(&mut ScaledIdentityOracle::new(0.7), z0.clone(), &params);
        let zero = Point::zeros(6);
        assert_eq!(fejer_check(&r.trajectory, &zero, &params, 1e-9), None);
        assert_eq!(alvarez_attouch_check(&r.trajectory, &zero, params.alpha, 1e-9), None);

        for (skew, inexact) in [(0.0, false), (1.0, false), (0.3, true), (2.0, true)] {
            let m = random_monotone(&mut rng, 6, skew);
            assert!(is_monotone(&m));
            let q = Point::from_iter((0..6).map(|_| rng.random_range(-1.0..1.0)));
            let z_star = affine_zero(&m, &q);
            let mut oracle = if inexact {
                AffineOracle::inexact(m.clone(), q.clone(), 200)
            } else {
                AffineOracle::exact(m.clone(), q.clone())
            };
            let r = run(&mut oracle, z0.clone(), &params);
            assert!(!r.trajectory.is_empty());
            assert_eq!(fejer_check(&r.trajectory, &z_star, &params, 1e-9), None, "skew {skew}, {params:?}");
            assert_eq!(alvarez_attouch_check(&r.trajectory, &z_star, params.alpha, 1e-9), None);
            if params.sigma > 0.0 {
                assert!(r.trajectory.iter().all(|d| d.error_ratio <= 1.0 + 1e-9));
            }
            let sums = increment_partial_sums(&r.trajectory);
            assert!(sums.windows(2).all(|w| w[1] >= w[0]));
        }
    }
}

#[test]
fn inertial_steps_use_extrapolated_points() {
    let params = InertiaRelaxParams::lasso_defaults();
    let r = run(&mut ScaledIdentityOracle::new(1.0), Point::from_vec(vec![1.0, -2.0]), &params);
    for (k, d) in r.trajectory.iter().enumerate() {
        let prev = if k == 0 { d.z.clone() } else { r.trajectory[k - 1].z.clone() };
        let w = &d.z + &((&d.z - &prev) * params.alpha);
        assert!((&w - &d.w).iter().all(|e| e.abs() < 1e-15));
        let z_next = &d.w - &(&d.v * (params.rho_hi * d.tau));
        assert!((&z_next - &d.z_next).iter().all(|e| e.abs() < 1e-15));
    }
}

/// A random certificate accepted at tolerance σ: `λv = w − z̃ + e` with
/// `‖e‖ ≤ σ‖z̃ − w‖`, which always satisfies the relative error test.
fn accepted_certificate(
    seed: u64,
    n: usize,
    sigma: f64,
) -> (Point, ProxCertificate) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = Point::from_iter((0..n).map(|_| rng.random_range(-2.0..2.0)));
    let z_tilde = Point::from_iter((0..n).map(|_| rng.random_range(-2.0..2.0)));
    let lambda = rng.random_range(0.1..5.0);
    let mut e = Point::from_iter((0..n).map(|_| rng.random_range(-1.0..1.0)));
    let scale = sigma * rng.random::<f64>() * ((&z_tilde - &w).mapv(|x| x * x).sum()).sqrt();
    let en = e.mapv(|x| x * x).sum().sqrt();
    e *= scale / en;
    let v = (&w - &z_tilde + &e) / lambda;
    (w, ProxCertificate { z_tilde, v, lambda })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn accepted_certificates_obey_gauss_bounds(seed in any::<u64>(), n in 1usize..8, sigma in 0.0f64..0.999) {
        let (w, cert) = accepted_certificate(seed, n, sigma);
        prop_assert!(error_criterion_holds(&w, &cert, sigma));
        prop_assert!(gauss_bounds_hold(&w, &cert, sigma));
    }
}

proptest! {
    #[test]
    fn zero_v_iff_resolvent_fixed(n in 1usize..6, sigma in 0.0f64..0.99, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = Point::from_iter((0..n).map(|_| rng.random_range(-1.0..1.0)));
        // v = 0 and z̃ ≠ w is rejected
        let off = ProxCertificate { z_tilde: &w + 0.1, v: Point::zeros(n), lambda: 1.0 };
        prop_assert!(!error_criterion_holds(&w, &off, sigma));
        // z̃ = w and v ≠ 0 is rejected
        let flat = ProxCertificate { z_tilde: w.clone(), v: Point::ones(n), lambda: 1.0 };
        prop_assert!(!error_criterion_holds(&w, &flat, sigma));
        let both = ProxCertificate { z_tilde: w.clone(), v: Point::zeros(n), lambda: 1.0 };
        prop_assert!(error_criterion_holds(&w, &both, sigma));
    }
}
