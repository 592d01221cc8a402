//! Accelerated proximal gradient with backtracking on the Lipschitz estimate.

use std::time::Instant;

use thiserror::Error;

use crate::point::{dist_sq, dot, Point};
use crate::record::{RunRecord, RunStatus};

/// `F = f + g` with smooth `f` and prox-friendly `g`.
pub trait CompositeObjective {
    fn dim(&self) -> usize;
    fn smooth_value(&self, x: &Point) -> f64;
    fn smooth_gradient(&self, x: &Point) -> Point;
    fn nonsmooth_value(&self, x: &Point) -> f64;
    /// `argmin_z g(z) + (1 / 2t)‖z − u‖²`.
    fn prox_nonsmooth(&self, u: &Point, t: f64) -> Point;
    /// `dist∞(0, ∂F(x))`.
    fn kkt_residual(&self, x: &Point) -> f64;

    fn objective(&self, x: &Point) -> f64 {
        self.smooth_value(x) + self.nonsmooth_value(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FistaConfig {
    pub l0: f64,
    pub eta: f64,
    pub epsilon: f64,
    pub max_iters: usize,
}

impl Default for FistaConfig {
    fn default() -> Self {
        Self { l0: 1.0, eta: 2.0, epsilon: 1e-6, max_iters: 100_000 }
    }
}

#[derive(Debug, Error)]
pub enum FistaError {
    #[error("invalid FISTA configuration: {0}")]
    Config(&'static str),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("backtracking diverged (L = {0:e})")]
    Backtracking(f64),
    #[error("budget of {} iterations exhausted", .0.record.outer_iters)]
    BudgetExceeded(Box<FistaRun>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FistaRun {
    pub x: Point,
    pub record: RunRecord,
}

/// Per-iteration view for observers.
#[derive(Debug)]
pub struct FistaStep<'a> {
    pub k: usize,
    pub y: &'a Point,
    pub x: &'a Point,
    pub lipschitz: f64,
    pub objective_y: f64,
    pub objective_x: f64,
}

pub fn fista_solve<P: CompositeObjective + ?Sized>(
    problem: &P,
    x0: Point,
    config: &FistaConfig,
) -> Result<FistaRun, FistaError> {
    fista_solve_observed(problem, x0, config, |_| {})
}

/// `record.inner_iters_total` counts backtracking trials.
pub fn fista_solve_observed<P: CompositeObjective + ?Sized>(
    problem: &P,
    x0: Point,
    config: &FistaConfig,
    mut observer: impl FnMut(FistaStep<'_>),
) -> Result<FistaRun, FistaError> {
    if !(config.l0 > 0.0) {
        return Err(FistaError::Config("L0 > 0 violated"));
    }
    if !(config.eta > 1.0) {
        return Err(FistaError::Config("η > 1 violated"));
    }
    if !(config.epsilon > 0.0) {
        return Err(FistaError::Config("ε > 0 violated"));
    }
    if x0.len() != problem.dim() {
        return Err(FistaError::DimensionMismatch(x0.len(), problem.dim()));
    }
    let start = Instant::now();
    let mut lip = config.l0;
    let mut x = x0;
    let mut y = x.clone();
    let mut t: f64 = 1.0;
    let mut trials = 0;
    let mut kkt = problem.kkt_residual(&x);

    let record = |k, trials, kkt, x: &Point, status| RunRecord {
        outer_iters: k,
        inner_iters_total: trials,
        wall_seconds: start.elapsed().as_secs_f64(),
        final_kkt: kkt,
        final_objective: problem.objective(x),
        status,
    };

    for k in 0..config.max_iters {
        if kkt <= config.epsilon {
            let rec = record(k, trials, kkt, &x, RunStatus::Converged);
            return Ok(FistaRun { x, record: rec });
        }
        let fy = problem.smooth_value(&y);
        let gy = problem.smooth_gradient(&y);
        // f(y) is known only to rounding, so the quadratic upper-bound test
        // gets a few ulps of slack.
        let noise = 8.0 * f64::EPSILON * fy.abs();
        let x_new = loop {
            trials += 1;
            let p = problem.prox_nonsmooth(&(&y - &(&gy / lip)), 1.0 / lip);
            let d = &p - &y;
            let model = fy + dot(&gy, &d) + 0.5 * lip * dist_sq(&p, &y);
            if problem.smooth_value(&p) <= model + noise {
                break p;
            }
            lip *= config.eta;
            if !lip.is_finite() {
                return Err(FistaError::Backtracking(lip));
            }
        };
        let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let mut y_new = &x_new + &((&x_new - &x) * ((t - 1.0) / t_new));
        std::mem::swap(&mut y, &mut y_new);
        let y_old = y_new;
        observer(FistaStep {
            k,
            y: &y_old,
            x: &x_new,
            lipschitz: lip,
            objective_y: fy + problem.nonsmooth_value(&y_old),
            objective_x: problem.objective(&x_new),
        });
        x = x_new;
        t = t_new;
        kkt = problem.kkt_residual(&x);
    }
    if kkt <= config.epsilon {
        let rec = record(config.max_iters, trials, kkt, &x, RunStatus::Converged);
        return Ok(FistaRun { x, record: rec });
    }
    let rec = record(config.max_iters, trials, kkt, &x, RunStatus::BudgetExceeded);
    Err(FistaError::BudgetExceeded(Box::new(FistaRun { x, record: rec })))
}
