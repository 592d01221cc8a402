//! Seeded synthetic instances.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{CsrMatrix, DesignMatrix, LassoProblem, LogisticProblem};
use crate::point::{norm_inf, Point};
use crate::solvers::fista::{fista_solve, FistaConfig};

/// A generated problem together with the vector it was generated from.
#[derive(Clone, Debug)]
pub struct Synthetic<P> {
    pub problem: P,
    pub ground_truth: Point,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Standard-normal entries, each kept with probability `density`. Fully
/// dense requests give dense storage.
fn random_design(rng: &mut ChaCha8Rng, m: usize, n: usize, density: f64) -> DesignMatrix {
    if density >= 1.0 {
        return DesignMatrix::Dense(Array2::from_shape_simple_fn((m, n), || normal(rng)));
    }
    let mut rows = vec![Vec::new(); m];
    for row in rows.iter_mut() {
        for j in 0..n {
            if rng.random::<f64>() < density {
                row.push((j, normal(rng)));
            }
        }
    }
    DesignMatrix::Sparse(CsrMatrix::from_rows(n, &rows).expect("generated indices are in range"))
}

fn scale_design(a: DesignMatrix, factor: f64) -> DesignMatrix {
    match a {
        DesignMatrix::Dense(d) => DesignMatrix::Dense(d * factor),
        DesignMatrix::Sparse(s) => DesignMatrix::Sparse(s.scaled(factor)),
    }
}

/// Sparse vector with `max(1, n/10)` standard-normal nonzeros at random
/// positions.
fn sparse_truth(rng: &mut ChaCha8Rng, n: usize) -> Point {
    let k = (n / 10).max(1);
    let mut x = Point::zeros(n);
    for idx in rand::seq::index::sample(rng, n, k) {
        x[idx] = normal(rng);
    }
    x
}

/// LASSO with `A` of size `m × n`, `b = A x♮ + noise · N(0, I)` and
/// `ν = 0.1 ‖Aᵀb‖∞`. Identical seeds give bitwise-identical instances.
pub fn synthetic_lasso(m: usize, n: usize, density: f64, noise: f64, seed: u64) -> Synthetic<LassoProblem> {
    assert!(m >= 1 && n >= 1, "empty instance");
    assert!(density > 0.0 && density <= 1.0, "density must lie in (0, 1]");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = scale_design(random_design(&mut rng, m, n, density), 1.0 / (m as f64 * density).sqrt());
    let truth = sparse_truth(&mut rng, n);
    let mut b = a.apply(&truth);
    b.mapv_inplace(|v| v + noise * normal(&mut rng));
    let nu = 0.1 * norm_inf(&a.apply_transpose(&b));
    let nu = if nu > 0.0 { nu } else { 1.0 };
    let problem = LassoProblem::new(a, b, nu).expect("generated instance is valid");
    Synthetic { problem, ground_truth: truth }
}

/// Logistic regression with `q` samples and `n − 1` dense standard-normal
/// features. Labels are `sign(aᵢᵀw♮ + v♮ + ξᵢ)` with logistic-scale noise
/// `ξᵢ`, so the classes overlap. `ν` is tuned by bisection so that about
/// half of the optimal `w` is zero.
pub fn synthetic_logistic(q: usize, n: usize, seed: u64) -> Synthetic<LogisticProblem> {
    assert!(q >= 2 && n >= 2, "need at least two samples and one feature");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let features = random_design(&mut rng, q, n - 1, 1.0);
    let w = sparse_truth(&mut rng, n - 1) * 2.0;
    let v = 0.5 * normal(&mut rng);
    let mut margins = features.apply(&w) + v;
    for t in margins.iter_mut() {
        let u: f64 = rng.random_range(1e-12..1.0 - 1e-12);
        *t += (u / (1.0 - u)).ln();
    }
    let mut labels = margins.mapv(|t| if t >= 0.0 { 1.0 } else { -1.0 });
    // both classes must be present
    if labels.iter().all(|l| *l == labels[0]) {
        labels[0] = -labels[0];
    }
    let truth = LogisticProblem::pack(v, &w);
    let mut problem = LogisticProblem::new(features, labels, 1.0).expect("generated instance is valid");
    problem.nu = tune_nu(&problem, 0.5);
    Synthetic { problem, ground_truth: truth }
}

/// Bisection on `log ν` for a target fraction of zeros in the optimal `w`.
fn tune_nu(problem: &LogisticProblem, zero_fraction: f64) -> f64 {
    let n_w = problem.n() - 1;
    let mut x0 = Point::zeros(problem.n());
    x0[0] = problem.null_bias();
    let nu_max = norm_inf(&problem.f_gradient(&x0).slice(ndarray::s![1..]).to_owned());
    let target = (zero_fraction * n_w as f64).round() as usize;
    let cfg = FistaConfig { epsilon: 1e-9, max_iters: 200_000, ..FistaConfig::default() };
    let zeros_at = |nu: f64| {
        let p = LogisticProblem { nu, ..problem.clone() };
        let x = match fista_solve(&p, Point::zeros(p.n()), &cfg) {
            Ok(run) => run.x,
            Err(crate::solvers::FistaError::BudgetExceeded(run)) => run.x,
            Err(_) => return n_w,
        };
        x.iter().skip(1).filter(|v| **v == 0.0).count()
    };
    let (mut lo, mut hi) = ((1e-4 * nu_max).ln(), nu_max.ln());
    let mut best = (usize::MAX, nu_max);
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        let z = zeros_at(mid.exp());
        let gap = z.abs_diff(target);
        if gap < best.0 {
            best = (gap, mid.exp());
        }
        if z == target {
            break;
        }
        if z < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    best.1
}
