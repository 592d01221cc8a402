//! Partially inexact inertial-relaxed ADMM for `min f(x) + g(x)`.
//!
//! The `x`-subproblem `min f(x) + ⟨p, x⟩ + (c/2)‖x − z‖²` is solved by an
//! iterative [`FProcedure`] truncated by a relative error test; the
//! `z`-subproblem is an exact shifted prox of `g`. Under
//! `(s, b, r) = (x, −p, z)`, `γ = 1/c` the iteration is the Douglas-Rachford
//! recursion of [`crate::dr`] with `A = ∂g`, `B = ∂f`.

use std::time::Instant;

use thiserror::Error;

use crate::dr::{BProcedure, BSession, SplitTriple};
use crate::hpp::{InertiaRelaxParams, ParamError};
use crate::point::{all_finite, dist_sq, dot, norm, norm_sq, roundoff_floor, same_dim, Point};
use crate::record::{RunRecord, RunStatus};
use crate::solvers::prox::soft_threshold_scalar;

/// State `(x, z, p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimalDualTriple {
    pub x: Point,
    pub z: Point,
    pub p: Point,
}

impl PrimalDualTriple {
    pub fn new(x: Point, z: Point, p: Point) -> Result<Self, AdmmError> {
        same_dim(&x, &z)?;
        same_dim(&x, &p)?;
        Ok(Self { x, z, p })
    }

    pub fn zeros(n: usize) -> Self {
        Self { x: Point::zeros(n), z: Point::zeros(n), p: Point::zeros(n) }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    fn is_finite(&self) -> bool {
        all_finite(&self.x) && all_finite(&self.z) && all_finite(&self.p)
    }
}

/// Inner-loop acceptance test.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcceptanceRule {
    /// `‖y‖² ≤ σ²(‖p_ℓ − p̂ − c(z_ℓ − ẑ)‖² + c²‖x_ℓ − z_ℓ‖²)`.
    SumSquares,
    /// `‖y‖ ≤ σ max{‖p_ℓ − p̂ − c(z_ℓ − ẑ)‖, c‖x_ℓ − z_ℓ‖}`; implies
    /// `SumSquares`.
    #[default]
    MaxForm,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdmmParams {
    pub c: f64,
    pub core: InertiaRelaxParams,
    pub criterion: AcceptanceRule,
    /// Stop once `dist∞(0, ∂(f + g)(z^k)) ≤ ε`.
    pub epsilon: f64,
    pub inner_budget: usize,
    pub max_outer: usize,
    /// Evaluate the KKT residual every `kkt_stride` outer iterations.
    pub kkt_stride: usize,
}

impl AdmmParams {
    pub fn new(c: f64, core: InertiaRelaxParams) -> Self {
        Self {
            c,
            core,
            criterion: AcceptanceRule::MaxForm,
            epsilon: 1e-6,
            inner_budget: 10_000,
            max_outer: 10_000,
            kkt_stride: 1,
        }
    }

    pub fn validate(&self) -> Result<(), AdmmError> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(AdmmError::Config(format!("c > 0 violated (c = {})", self.c)));
        }
        if !(self.epsilon > 0.0) {
            return Err(AdmmError::Config(format!("ε > 0 violated (ε = {})", self.epsilon)));
        }
        if self.kkt_stride == 0 {
            return Err(AdmmError::Config("kkt_stride must be at least 1".into()));
        }
        self.core.validate()?;
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum AdmmError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("invalid ADMM configuration: {0}")]
    Config(String),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("x = z: the accepted point already solves the problem")]
    ZeroDenominator,
    #[error("non-finite iterate at outer iteration {0}")]
    NonFinite(usize),
    #[error("F-procedure failed: {0}")]
    Procedure(String),
    #[error("inner loop of outer iteration {} not accepted within budget", .0.record.outer_iters)]
    InnerBudgetExceeded(Box<AdmmRun>),
    #[error("outer budget exhausted after {} iterations", .0.record.outer_iters)]
    OuterBudgetExceeded(Box<AdmmRun>),
}

impl From<(usize, usize)> for AdmmError {
    fn from((a, b): (usize, usize)) -> Self {
        AdmmError::DimensionMismatch(a, b)
    }
}

impl AdmmError {
    /// The partial run carried by budget errors.
    pub fn partial_run(&self) -> Option<&AdmmRun> {
        match self {
            AdmmError::InnerBudgetExceeded(r) | AdmmError::OuterBudgetExceeded(r) => Some(r),
            _ => None,
        }
    }
}

/// One trial pair `(x_ℓ, y_ℓ)` per call, with
/// `y_ℓ ∈ ∂_x[f(x) + ⟨p, x⟩ + (c/2)‖x − z‖²]` at `x_ℓ`.
pub trait FSession {
    fn next(&mut self) -> Result<(Point, Point), String>;
}

/// Iterative solver for the `x`-subproblem, opened fresh for each outer
/// iteration at warm start `x̄`.
///
/// Producer contract: `y_ℓ` is a subgradient of the augmented subobjective
/// at `x_ℓ` and `y_ℓ → 0`.
pub trait FProcedure {
    fn open<'a>(&'a self, p: &Point, z: &Point, c: f64, x_bar: &Point) -> Box<dyn FSession + 'a>;
}

/// Exact `argmin_z g(z) − ⟨p, z⟩ + (c/2)‖x − z‖²`.
pub trait ShiftedProxG {
    fn solve(&self, p: &Point, x: &Point, c: f64) -> Point;
}

/// `g(x) = ν Σ_{i ≥ free} |xᵢ|`: the first `free` coordinates are
/// unregularized.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct L1ShiftedProx {
    pub nu: f64,
    pub free: usize,
}

impl ShiftedProxG for L1ShiftedProx {
    fn solve(&self, p: &Point, x: &Point, c: f64) -> Point {
        let kappa = self.nu / c;
        Point::from_iter(x.iter().zip(p.iter()).enumerate().map(|(i, (xi, pi))| {
            let u = xi + pi / c;
            if i < self.free {
                u
            } else {
                soft_threshold_scalar(u, kappa)
            }
        }))
    }
}

/// A composite problem the ADMM driver can run on.
pub trait SplitProblem {
    fn dim(&self) -> usize;
    fn fprocedure(&self) -> Box<dyn FProcedure + '_>;
    fn gprox(&self) -> Box<dyn ShiftedProxG + '_>;
    /// `dist∞(0, ∂(f + g)(x))`.
    fn kkt_residual(&self, x: &Point) -> f64;
    fn objective(&self, x: &Point) -> f64;
    fn smooth_gradient(&self, x: &Point) -> Point;
}

/// `hat = cur + α_k (cur − prev)`, componentwise.
pub fn admm_extrapolate(
    cur: &PrimalDualTriple,
    prev: &PrimalDualTriple,
    alpha_k: f64,
) -> Result<PrimalDualTriple, AdmmError> {
    same_dim(&cur.x, &prev.x)?;
    let ext = |c: &Point, p: &Point| c + &((c - p) * alpha_k);
    Ok(PrimalDualTriple { x: ext(&cur.x, &prev.x), z: ext(&cur.z, &prev.z), p: ext(&cur.p, &prev.p) })
}

/// `p_ℓ = p̂ + c(x_ℓ − ẑ) − y_ℓ`.
pub fn multiplier_candidate(p_hat: &Point, x_l: &Point, z_hat: &Point, y_l: &Point, c: f64) -> Point {
    p_hat + &((x_l - z_hat) * c) - y_l
}

/// `(‖y_ℓ‖, ‖p_ℓ − p̂ − c(z_ℓ − ẑ)‖, c‖x_ℓ − z_ℓ‖)`.
pub fn admm_acceptance_terms(
    y_l: &Point,
    p_l: &Point,
    p_hat: &Point,
    z_l: &Point,
    z_hat: &Point,
    x_l: &Point,
    c: f64,
) -> (f64, f64, f64) {
    let dual = p_l - p_hat - &((z_l - z_hat) * c);
    (norm(y_l), norm(&dual), c * dist_sq(x_l, z_l).sqrt())
}

#[allow(clippy::too_many_arguments)]
pub fn admm_acceptance(
    y_l: &Point,
    p_l: &Point,
    p_hat: &Point,
    z_l: &Point,
    z_hat: &Point,
    x_l: &Point,
    c: f64,
    sigma: f64,
    rule: AcceptanceRule,
) -> bool {
    let (lhs, t1, t2) = admm_acceptance_terms(y_l, p_l, p_hat, z_l, z_hat, x_l, c);
    accept(lhs, t1, t2, sigma, rule, 0.0)
}

fn accept(lhs: f64, t1: f64, t2: f64, sigma: f64, rule: AcceptanceRule, floor_sq: f64) -> bool {
    match rule {
        AcceptanceRule::SumSquares => lhs * lhs <= sigma * sigma * (t1 * t1 + t2 * t2) + floor_sq,
        AcceptanceRule::MaxForm => lhs * lhs <= (sigma * t1.max(t2)).powi(2) + floor_sq,
    }
}

/// `z = argmin g(z) − ⟨p_ℓ, z⟩ + (c/2)‖x_ℓ − z‖²`.
pub fn z_subproblem<G: ShiftedProxG + ?Sized>(p_l: &Point, x_l: &Point, c: f64, prox: &G) -> Point {
    prox.solve(p_l, x_l, c)
}

/// `θ = ⟨c(ẑ − z_ℓ) − (p̂ − p_ℓ), x_ℓ − z_ℓ⟩ / (c‖x_ℓ − z_ℓ‖²)`.
pub fn theta_admm(hat: &PrimalDualTriple, x_l: &Point, z_l: &Point, p_l: &Point, c: f64) -> Result<f64, AdmmError> {
    let d = x_l - z_l;
    let dd = norm_sq(&d);
    if dd == 0.0 {
        return Err(AdmmError::ZeroDenominator);
    }
    let num = (&hat.z - z_l) * c - &(&hat.p - p_l);
    Ok(dot(&num, &d) / (c * dd))
}

/// `p⁺ = p̂ + c[(1 − ρθ) z⁺ + ρθ x⁺ − ẑ]`.
pub fn p_update(p_hat: &Point, z_hat: &Point, z_next: &Point, x_next: &Point, theta: f64, rho_k: f64, c: f64) -> Point {
    let rt = rho_k * theta;
    p_hat + &((z_next * (1.0 - rt) + &(x_next * rt) - z_hat) * c)
}

/// `(s, b, r) = (x, −p, z)`; the matching step size is `γ = 1/c`.
pub fn embed_to_dr(triple: &PrimalDualTriple) -> SplitTriple {
    SplitTriple { s: triple.x.clone(), b: -&triple.p, r: triple.z.clone() }
}

/// Views an F-procedure for `f` as a B-procedure for `B = ∂f`:
/// `s_ℓ = x_ℓ`, `b_ℓ = y_ℓ + b − γ⁻¹(x_ℓ − r)` where `(x_ℓ, y_ℓ)` come from
/// `F(−b, r, γ⁻¹, s̄)`. The `b̄` warm start is not used.
pub struct FToBAdapter<'a, F: ?Sized> {
    pub fproc: &'a F,
}

pub fn f_to_b_adapter<F: FProcedure + ?Sized>(fproc: &F) -> FToBAdapter<'_, F> {
    FToBAdapter { fproc }
}

struct AdaptedSession<'a> {
    inner: Box<dyn FSession + 'a>,
    r: Point,
    b: Point,
    gamma: f64,
}

impl BSession for AdaptedSession<'_> {
    fn next(&mut self) -> Result<(Point, Point), String> {
        let (x, y) = self.inner.next()?;
        let b = &y + &self.b - &((&x - &self.r) / self.gamma);
        Ok((x, b))
    }
}

impl<F: FProcedure + ?Sized> BProcedure for FToBAdapter<'_, F> {
    fn open<'a>(&'a self, r: &Point, b: &Point, gamma: f64, s_bar: &Point, _b_bar: &Point) -> Box<dyn BSession + 'a> {
        let inner = self.fproc.open(&-b, r, 1.0 / gamma, s_bar);
        Box::new(AdaptedSession { inner, r: r.clone(), b: b.clone(), gamma })
    }
}

/// The ADMM analogue of an accepted inner iterate.
#[derive(Clone, Debug, PartialEq)]
pub struct AdmmAccepted {
    pub x: Point,
    pub y: Point,
    pub p: Point,
    pub z: Point,
    pub steps: usize,
}

#[derive(Debug)]
pub struct AdmmInnerStep<'a> {
    pub k: usize,
    pub l: usize,
    pub hat: &'a PrimalDualTriple,
    pub x: &'a Point,
    pub y: &'a Point,
    pub p: &'a Point,
    pub z: &'a Point,
    pub accepted: bool,
}

#[derive(Debug)]
pub struct AdmmOuterStep<'a> {
    pub k: usize,
    pub prev: &'a PrimalDualTriple,
    pub cur: &'a PrimalDualTriple,
    pub hat: &'a PrimalDualTriple,
    pub accepted: &'a AdmmAccepted,
    pub alpha_k: f64,
    pub rho_k: f64,
    pub theta: f64,
    pub next: &'a PrimalDualTriple,
}

#[derive(Debug)]
pub enum AdmmEvent<'a> {
    Inner(AdmmInnerStep<'a>),
    Outer(AdmmOuterStep<'a>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdmmRun {
    /// Solution estimate `z^k` (the exact prox output, so `g` is evaluated
    /// on its natural support).
    pub x: Point,
    pub state: PrimalDualTriple,
    pub record: RunRecord,
    /// Accepted inner steps at which `p_ℓ − p̂ = c(z_ℓ − ẑ)` held exactly.
    /// Such a step certifies optimality but is only counted.
    pub multiplier_equalities: usize,
}

pub fn run_admm<P: SplitProblem + ?Sized>(
    problem: &P,
    params: &AdmmParams,
    init: PrimalDualTriple,
) -> Result<AdmmRun, AdmmError> {
    run_admm_observed(problem, params, init, |_| {})
}

/// [`run_admm`] reporting every inner and outer step to `observer`.
pub fn run_admm_observed<P: SplitProblem + ?Sized>(
    problem: &P,
    params: &AdmmParams,
    init: PrimalDualTriple,
    mut observer: impl FnMut(AdmmEvent<'_>),
) -> Result<AdmmRun, AdmmError> {
    params.validate()?;
    same_dim(&init.x, &Point::zeros(problem.dim()))?;
    same_dim(&init.x, &init.z)?;
    same_dim(&init.x, &init.p)?;
    let start = Instant::now();
    let fproc = problem.fprocedure();
    let gprox = problem.gprox();
    let (c, sigma, alpha, rho) = (params.c, params.core.sigma, params.core.alpha, params.core.rho_hi);

    let mut prev = init.clone();
    let mut cur = init;
    let mut inner_total = 0;
    let mut equalities = 0;
    let mut kkt = f64::INFINITY;

    let finish = |cur: PrimalDualTriple, k: usize, inner: usize, kkt: f64, eq: usize, status: RunStatus| AdmmRun {
        x: cur.z.clone(),
        record: RunRecord {
            outer_iters: k,
            inner_iters_total: inner,
            wall_seconds: start.elapsed().as_secs_f64(),
            final_kkt: kkt,
            final_objective: problem.objective(&cur.z),
            status,
        },
        state: cur,
        multiplier_equalities: eq,
    };

    for k in 0..params.max_outer {
        if k % params.kkt_stride == 0 {
            kkt = problem.kkt_residual(&cur.z);
            if kkt <= params.epsilon {
                return Ok(finish(cur, k, inner_total, kkt, equalities, RunStatus::Converged));
            }
        }
        let hat = admm_extrapolate(&cur, &prev, alpha)?;
        let mut session = fproc.open(&hat.p, &hat.z, c, &hat.x);
        let mut accepted = None;
        for l in 1..=params.inner_budget {
            let (x, y) = session.next().map_err(AdmmError::Procedure)?;
            let p = multiplier_candidate(&hat.p, &x, &hat.z, &y, c);
            let z = z_subproblem(&p, &x, c, gprox.as_ref());
            let (lhs, t1, t2) = admm_acceptance_terms(&y, &p, &hat.p, &z, &hat.z, &x, c);
            let scale = norm_sq(&hat.p) + norm_sq(&p) + c * c * (norm_sq(&x) + norm_sq(&hat.z));
            let ok = accept(lhs, t1, t2, sigma, params.criterion, roundoff_floor(scale));
            observer(AdmmEvent::Inner(AdmmInnerStep { k, l, hat: &hat, x: &x, y: &y, p: &p, z: &z, accepted: ok }));
            if ok {
                accepted = Some(AdmmAccepted { x, y, p, z, steps: l });
                break;
            }
        }
        let Some(acc) = accepted else {
            let run = finish(cur, k, inner_total + params.inner_budget, kkt, equalities, RunStatus::BudgetExceeded);
            return Err(AdmmError::InnerBudgetExceeded(Box::new(run)));
        };
        inner_total += acc.steps;
        if acc.p.iter().zip(hat.p.iter()).zip(acc.z.iter().zip(hat.z.iter())).all(|((pl, ph), (zl, zh))| pl - ph == c * (zl - zh)) {
            equalities += 1;
        }
        if acc.x == acc.z {
            let state = PrimalDualTriple { x: acc.x, z: acc.z, p: acc.p };
            kkt = problem.kkt_residual(&state.z);
            return Ok(finish(state, k + 1, inner_total, kkt, equalities, RunStatus::Converged));
        }
        let th = theta_admm(&hat, &acc.x, &acc.z, &acc.p, c)?;
        let next = PrimalDualTriple {
            p: p_update(&hat.p, &hat.z, &acc.z, &acc.x, th, rho, c),
            x: acc.x.clone(),
            z: acc.z.clone(),
        };
        if !next.is_finite() {
            return Err(AdmmError::NonFinite(k));
        }
        observer(AdmmEvent::Outer(AdmmOuterStep {
            k,
            prev: &prev,
            cur: &cur,
            hat: &hat,
            accepted: &acc,
            alpha_k: alpha,
            rho_k: rho,
            theta: th,
            next: &next,
        }));
        prev = std::mem::replace(&mut cur, next);
    }
    kkt = problem.kkt_residual(&cur.z);
    let status = if kkt <= params.epsilon { RunStatus::Converged } else { RunStatus::BudgetExceeded };
    let run = finish(cur, params.max_outer, inner_total, kkt, equalities, status);
    if status == RunStatus::Converged {
        Ok(run)
    } else {
        Err(AdmmError::OuterBudgetExceeded(Box::new(run)))
    }
}
