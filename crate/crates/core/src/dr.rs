//! Partially inexact inertial-relaxed Douglas-Rachford splitting for
//! `0 ∈ A(x) + B(x)`.
//!
//! The resolvent of `A` is evaluated exactly; the `B` subproblem
//! `s + γ b ≈ r̂ + γ b̂, b ∈ B(s)` is solved by an iterative
//! [`BProcedure`] that is truncated by a relative error test. The method is
//! the HPP engine applied to the splitting operator
//! `S = {(r + γb, s − r) : b ∈ B(s), a ∈ A(r), r + γa = s − γb}`
//! with `λ = 1`; [`embed_to_hpp`] exposes that correspondence.

use std::time::Instant;

use ndarray::Array2;
use thiserror::Error;

use crate::dense;
use crate::hpp::{InertiaRelaxParams, IterationDiagnostics, ParamError};
use crate::point::{all_finite, dist_sq, dot, norm_sq, roundoff_floor, same_dim, Point};
use crate::record::{RunRecord, RunStatus};
use crate::solvers::prox::soft_threshold;

/// State `(s, b, r)` of the splitting recursion.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitTriple {
    pub s: Point,
    pub b: Point,
    pub r: Point,
}

impl SplitTriple {
    pub fn new(s: Point, b: Point, r: Point) -> Result<Self, DrError> {
        same_dim(&s, &b)?;
        same_dim(&s, &r)?;
        Ok(Self { s, b, r })
    }

    pub fn zeros(n: usize) -> Self {
        Self { s: Point::zeros(n), b: Point::zeros(n), r: Point::zeros(n) }
    }

    pub fn dim(&self) -> usize {
        self.s.len()
    }

    /// The HPP iterate `r + γ b`.
    pub fn z(&self, gamma: f64) -> Point {
        &self.r + &(&self.b * gamma)
    }

    fn is_finite(&self) -> bool {
        all_finite(&self.s) && all_finite(&self.b) && all_finite(&self.r)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DrParams {
    pub gamma: f64,
    pub core: InertiaRelaxParams,
    pub inner_budget: usize,
}

impl DrParams {
    pub fn new(gamma: f64, core: InertiaRelaxParams) -> Self {
        Self { gamma, core, inner_budget: 10_000 }
    }

    pub fn validate(&self) -> Result<(), DrError> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(DrError::GammaNotPositive(self.gamma));
        }
        self.core.validate()?;
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum DrError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("γ > 0 violated (γ = {0})")]
    GammaNotPositive(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("non-finite iterate at outer iteration {0}")]
    NonFinite(usize),
    #[error("B-procedure failed: {0}")]
    Procedure(String),
    #[error("s = r: the accepted point already solves the inclusion")]
    ZeroDenominator,
    #[error("inner loop of outer iteration {outer} not accepted within {budget} steps")]
    InnerBudgetExceeded { outer: usize, budget: usize },
    #[error("outer budget exhausted after {} iterations", .0.record.outer_iters)]
    OuterBudgetExceeded(Box<DrRun>),
}

impl From<(usize, usize)> for DrError {
    fn from((a, b): (usize, usize)) -> Self {
        DrError::DimensionMismatch(a, b)
    }
}

/// One trial pair `(s_ℓ, b_ℓ)` with `b_ℓ ∈ B(s_ℓ)` per call.
pub trait BSession {
    fn next(&mut self) -> Result<(Point, Point), String>;
}

/// Iterative solver for `0 ∈ s + γB(s) − (r + γb)`, opened fresh for each
/// outer iteration with warm start `(s̄, b̄)`.
///
/// Producer contract: every emitted pair satisfies `b_ℓ ∈ B(s_ℓ)`, the
/// sequence converges, and `s_ℓ + γ b_ℓ → r + γ b`.
pub trait BProcedure {
    fn open<'a>(
        &'a self,
        r: &Point,
        b: &Point,
        gamma: f64,
        s_bar: &Point,
        b_bar: &Point,
    ) -> Box<dyn BSession + 'a>;
}

/// Exact resolvent `J_{γA} = (I + γA)⁻¹`.
pub trait ResolventMap {
    fn apply(&self, gamma: f64, u: &Point) -> Point;
}

/// `A ≡ 0`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroOperator;

impl ResolventMap for ZeroOperator {
    fn apply(&self, _gamma: f64, u: &Point) -> Point {
        u.clone()
    }
}

/// `A = ∂(ν‖·‖₁)`; the resolvent is soft thresholding at `γν`.
#[derive(Clone, Copy, Debug)]
pub struct L1Subdifferential {
    pub nu: f64,
}

impl ResolventMap for L1Subdifferential {
    fn apply(&self, gamma: f64, u: &Point) -> Point {
        soft_threshold(u, gamma * self.nu)
    }
}

/// `x ↦ Qx − c` for symmetric positive semidefinite `Q`, the gradient of
/// `½ xᵀQx − cᵀx`.
#[derive(Clone, Debug)]
pub struct QuadraticGradient {
    pub q: Array2<f64>,
    pub c: Point,
}

impl QuadraticGradient {
    pub fn apply_operator(&self, x: &Point) -> Point {
        self.q.dot(x) - &self.c
    }
}

impl ResolventMap for QuadraticGradient {
    fn apply(&self, gamma: f64, u: &Point) -> Point {
        let n = self.c.len();
        let k = Array2::eye(n) + &(&self.q * gamma);
        dense::solve_spd(&k, &(u + &(&self.c * gamma))).expect("I + γQ is positive definite")
    }
}

/// A B-procedure that solves its subproblem exactly in every step:
/// `s = J_{γB}(r + γb)`, `b = γ⁻¹ (r + γb − s)`.
#[derive(Clone, Debug)]
pub struct ExactBProcedure<R> {
    pub resolvent: R,
}

struct ExactBSession {
    s: Point,
    b: Point,
}

impl BSession for ExactBSession {
    fn next(&mut self) -> Result<(Point, Point), String> {
        Ok((self.s.clone(), self.b.clone()))
    }
}

impl<R: ResolventMap> BProcedure for ExactBProcedure<R> {
    fn open<'a>(
        &'a self,
        r: &Point,
        b: &Point,
        gamma: f64,
        _s_bar: &Point,
        _b_bar: &Point,
    ) -> Box<dyn BSession + 'a> {
        let target = r + &(b * gamma);
        let s = self.resolvent.apply(gamma, &target);
        let b = (&target - &s) / gamma;
        Box::new(ExactBSession { s, b })
    }
}

/// `hat = cur + α_k (cur − prev)`, componentwise.
pub fn dr_extrapolate(cur: &SplitTriple, prev: &SplitTriple, alpha_k: f64) -> Result<SplitTriple, DrError> {
    same_dim(&cur.s, &prev.s)?;
    let ext = |c: &Point, p: &Point| c + &((c - p) * alpha_k);
    Ok(SplitTriple { s: ext(&cur.s, &prev.s), b: ext(&cur.b, &prev.b), r: ext(&cur.r, &prev.r) })
}

/// `r = J_{γA}(s − γb)` and `a = γ⁻¹(s − r) − b`, so that `a ∈ A(r)` and
/// `r + γa = s − γb`.
pub fn a_step<R: ResolventMap + ?Sized>(s: &Point, b: &Point, gamma: f64, resolvent: &R) -> (Point, Point) {
    let r = resolvent.apply(gamma, &(s - &(b * gamma)));
    let a = (s - &r) / gamma - b;
    (r, a)
}

/// `(‖s + γb − (r̂ + γb̂)‖², ‖r + γb − (r̂ + γb̂)‖² + ‖s − r‖²)`.
pub fn dr_acceptance_sides(hat: &SplitTriple, s: &Point, b: &Point, r: &Point, gamma: f64) -> (f64, f64) {
    let w = hat.z(gamma);
    let gb = b * gamma;
    let lhs = norm_sq(&(s + &gb - &w));
    let rhs = norm_sq(&(r + &gb - &w)) + dist_sq(s, r);
    (lhs, rhs)
}

/// The inner-loop stopping test.
pub fn dr_acceptance(hat: &SplitTriple, s: &Point, b: &Point, r: &Point, gamma: f64, sigma: f64) -> bool {
    let (lhs, rhs) = dr_acceptance_sides(hat, s, b, r, gamma);
    lhs <= sigma * sigma * rhs
}

/// `θ = ⟨(r̂ − r) + γ(b̂ − b), s − r⟩ / ‖s − r‖²`.
pub fn theta(hat: &SplitTriple, s: &Point, b: &Point, r: &Point, gamma: f64) -> Result<f64, DrError> {
    let d = s - r;
    let dd = norm_sq(&d);
    if dd == 0.0 {
        return Err(DrError::ZeroDenominator);
    }
    let num = (&hat.r - r) + &((&hat.b - b) * gamma);
    Ok(dot(&num, &d) / dd)
}

/// `s⁺ = s`, `r⁺ = r`, `b⁺ = b̂ − γ⁻¹[(1 − ρθ) r + ρθ s − r̂]`.
pub fn dr_update(hat: &SplitTriple, s: &Point, r: &Point, theta: f64, rho_k: f64, gamma: f64) -> SplitTriple {
    let rt = rho_k * theta;
    let inner = r * (1.0 - rt) + &(s * rt) - &hat.r;
    let b = &hat.b - &(inner / gamma);
    SplitTriple { s: s.clone(), b, r: r.clone() }
}

/// Accepted inner iterate of one outer iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct InnerOutcome {
    pub s: Point,
    pub b: Point,
    pub r: Point,
    pub a: Point,
    pub steps: usize,
}

/// One inner step, as seen by an observer.
#[derive(Debug)]
pub struct DrInnerStep<'a> {
    pub k: usize,
    pub l: usize,
    pub hat: &'a SplitTriple,
    pub s: &'a Point,
    pub b: &'a Point,
    pub r: &'a Point,
    pub a: &'a Point,
    pub accepted: bool,
}

/// One completed outer iteration, as seen by an observer.
#[derive(Debug)]
pub struct DrOuterStep<'a> {
    pub k: usize,
    pub prev: &'a SplitTriple,
    pub cur: &'a SplitTriple,
    pub hat: &'a SplitTriple,
    pub accepted: &'a InnerOutcome,
    pub alpha_k: f64,
    pub rho_k: f64,
    pub theta: f64,
    pub next: &'a SplitTriple,
}

#[derive(Debug)]
pub enum DrEvent<'a> {
    Inner(DrInnerStep<'a>),
    Outer(DrOuterStep<'a>),
}

/// Runs the B-procedure from `hat` until the relative error test accepts.
pub fn inner_loop<B, R>(
    hat: &SplitTriple,
    params: &DrParams,
    bproc: &B,
    resolvent: &R,
) -> Result<InnerOutcome, DrError>
where
    B: BProcedure + ?Sized,
    R: ResolventMap + ?Sized,
{
    inner_loop_observed(0, hat, params, bproc, resolvent, &mut |_| {})
}

fn inner_loop_observed<B, R>(
    k: usize,
    hat: &SplitTriple,
    params: &DrParams,
    bproc: &B,
    resolvent: &R,
    observer: &mut dyn FnMut(DrEvent<'_>),
) -> Result<InnerOutcome, DrError>
where
    B: BProcedure + ?Sized,
    R: ResolventMap + ?Sized,
{
    let gamma = params.gamma;
    let sigma_sq = params.core.sigma * params.core.sigma;
    let target = hat.z(gamma);
    let mut session = bproc.open(&hat.r, &hat.b, gamma, &hat.s, &hat.b);
    for l in 1..=params.inner_budget {
        let (s, b) = session.next().map_err(DrError::Procedure)?;
        same_dim(&s, &target)?;
        let (r, a) = a_step(&s, &b, gamma, resolvent);
        let (lhs, rhs) = dr_acceptance_sides(hat, &s, &b, &r, gamma);
        let scale = norm_sq(&target) + norm_sq(&s) + gamma * gamma * norm_sq(&b);
        let accepted = lhs <= sigma_sq * rhs + roundoff_floor(scale);
        observer(DrEvent::Inner(DrInnerStep { k, l, hat, s: &s, b: &b, r: &r, a: &a, accepted }));
        if accepted {
            return Ok(InnerOutcome { s, b, r, a, steps: l });
        }
    }
    Err(DrError::InnerBudgetExceeded { outer: k, budget: params.inner_budget })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DrStop {
    pub max_outer: usize,
    /// Stop once `‖s − r‖ ≤ sr_tolerance` after acceptance; zero requires
    /// exact equality.
    pub sr_tolerance: f64,
}

impl Default for DrStop {
    fn default() -> Self {
        Self { max_outer: 10_000, sr_tolerance: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DrRun {
    /// Final `(s, b, r)`.
    pub state: SplitTriple,
    /// `x* = s = r` when the run stopped on `‖s − r‖ ≤ tol`.
    pub solution: Option<Point>,
    /// `record.final_kkt` holds the last `‖s − r‖`.
    pub record: RunRecord,
}

pub fn run_dr<B, R>(
    init: SplitTriple,
    params: &DrParams,
    bproc: &B,
    resolvent: &R,
    stop: DrStop,
) -> Result<DrRun, DrError>
where
    B: BProcedure + ?Sized,
    R: ResolventMap + ?Sized,
{
    run_dr_observed(init, params, bproc, resolvent, stop, |_| {})
}

/// [`run_dr`] reporting every inner and outer step to `observer`.
pub fn run_dr_observed<B, R>(
    init: SplitTriple,
    params: &DrParams,
    bproc: &B,
    resolvent: &R,
    stop: DrStop,
    mut observer: impl FnMut(DrEvent<'_>),
) -> Result<DrRun, DrError>
where
    B: BProcedure + ?Sized,
    R: ResolventMap + ?Sized,
{
    params.validate()?;
    let start = Instant::now();
    let (gamma, alpha, rho) = (params.gamma, params.core.alpha, params.core.rho_hi);
    let mut prev = init.clone();
    let mut cur = init;
    let mut inner_total = 0;
    let mut last_gap = f64::INFINITY;

    let record = |k: usize, inner: usize, gap: f64, status: RunStatus| RunRecord {
        outer_iters: k,
        inner_iters_total: inner,
        wall_seconds: start.elapsed().as_secs_f64(),
        final_kkt: gap,
        final_objective: f64::NAN,
        status,
    };

    for k in 0..stop.max_outer {
        let hat = dr_extrapolate(&cur, &prev, alpha)?;
        let acc = inner_loop_observed(k, &hat, params, bproc, resolvent, &mut observer)?;
        inner_total += acc.steps;
        last_gap = dist_sq(&acc.s, &acc.r).sqrt();
        if last_gap <= stop.sr_tolerance {
            let solution = Some(acc.s.clone());
            let state = SplitTriple { s: acc.s, b: acc.b, r: acc.r };
            return Ok(DrRun { state, solution, record: record(k, inner_total, last_gap, RunStatus::Converged) });
        }
        let th = theta(&hat, &acc.s, &acc.b, &acc.r, gamma)?;
        let next = dr_update(&hat, &acc.s, &acc.r, th, rho, gamma);
        if !next.is_finite() {
            return Err(DrError::NonFinite(k));
        }
        observer(DrEvent::Outer(DrOuterStep {
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
    Err(DrError::OuterBudgetExceeded(Box::new(DrRun {
        state: cur,
        solution: None,
        record: record(stop.max_outer, inner_total, last_gap, RunStatus::BudgetExceeded),
    })))
}

/// `z⁺ = J_{γA}(2 J_{γB}(z) − z) + z − J_{γB}(z)`.
pub fn classical_dr_step<RA, RB>(z: &Point, gamma: f64, ja: &RA, jb: &RB) -> Point
where
    RA: ResolventMap + ?Sized,
    RB: ResolventMap + ?Sized,
{
    let jbz = jb.apply(gamma, z);
    let reflected = &jbz * 2.0 - z;
    ja.apply(gamma, &reflected) + z - &jbz
}

/// HPP quantities `(z, w, z̃, v)` of one DR outer iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct HppEmbedding {
    pub z: Point,
    pub w: Point,
    pub z_tilde: Point,
    pub v: Point,
}

/// `z = r + γb`, `w = r̂ + γb̂`, `z̃ = r_acc + γ b_acc`, `v = s_acc − r_acc`.
pub fn embed_to_hpp(
    cur: &SplitTriple,
    hat: &SplitTriple,
    s: &Point,
    b: &Point,
    r: &Point,
    gamma: f64,
) -> HppEmbedding {
    HppEmbedding {
        z: cur.z(gamma),
        w: hat.z(gamma),
        z_tilde: r + &(b * gamma),
        v: s - r,
    }
}

impl DrOuterStep<'_> {
    /// The outer step rewritten as an HPP iteration with `λ = 1`.
    pub fn to_hpp(&self, gamma: f64, core: &InertiaRelaxParams) -> IterationDiagnostics {
        let acc = self.accepted;
        let e = embed_to_hpp(self.cur, self.hat, &acc.s, &acc.b, &acc.r, gamma);
        hpp_diagnostics(self.k, &e, &self.prev.z(gamma), self.next.z(gamma), self.alpha_k, self.rho_k, core)
    }
}

/// Builds [`IterationDiagnostics`] for an embedded iteration.
pub(crate) fn hpp_diagnostics(
    k: usize,
    e: &HppEmbedding,
    z_prev: &Point,
    z_next: Point,
    alpha_k: f64,
    rho_k: f64,
    core: &InertiaRelaxParams,
) -> IterationDiagnostics {
    let (rl, rh, sg) = (core.rho_lo, core.rho_hi, core.sigma);
    let lhs = norm_sq(&(&e.v + &e.z_tilde - &e.w));
    let rhs = sg * sg * (dist_sq(&e.z_tilde, &e.w) + norm_sq(&e.v));
    let increment_sq = dist_sq(&e.z, z_prev);
    IterationDiagnostics {
        k,
        z: e.z.clone(),
        w: e.w.clone(),
        z_tilde: e.z_tilde.clone(),
        v: e.v.clone(),
        tau: dot(&(&e.w - &e.z_tilde), &e.v) / norm_sq(&e.v),
        s_next: (2.0 - rh)
            * f64::max(
                dist_sq(&z_next, &e.w) / rh,
                rl * (1.0 - sg * sg).powi(2) * dist_sq(&e.z_tilde, &e.w),
            ),
        z_next,
        alpha_k,
        rho_k,
        error_ratio: if lhs == 0.0 { 0.0 } else { lhs / rhs },
        increment_sq,
        delta_k: alpha_k * (1.0 + alpha_k) * increment_sq,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn t(s: f64, b: f64, r: f64) -> SplitTriple {
        SplitTriple { s: array![s], b: array![b], r: array![r] }
    }

    #[test]
    fn extrapolation() {
        let cur = t(1.0, 1.0, 1.0);
        assert_eq!(dr_extrapolate(&cur, &t(0.0, 0.0, 0.0), 0.0).unwrap(), cur);
        assert_eq!(dr_extrapolate(&cur, &cur, 0.3).unwrap(), cur);
        let hat = dr_extrapolate(&cur, &t(0.0, 0.0, 0.0), 0.2).unwrap();
        assert_eq!(hat, t(1.2, 1.2, 1.2));
    }

    #[test]
    fn a_step_identity_and_zero_operator() {
        let s = array![1.0, -2.0, 0.5];
        let b = array![0.25, 0.5, -1.0];
        let gamma = 0.7;
        let (r, a) = a_step(&s, &b, gamma, &ZeroOperator);
        assert!((&r - &(&s - &(&b * gamma))).iter().all(|x| x.abs() < 1e-15));
        assert!(a.iter().all(|x| x.abs() < 1e-15));

        let l1 = L1Subdifferential { nu: 0.8 };
        let (r, a) = a_step(&s, &b, gamma, &l1);
        assert_eq!(r, soft_threshold(&(&s - &(&b * gamma)), gamma * 0.8));
        let lhs = &r + &(&a * gamma);
        let rhs = &s - &(&b * gamma);
        assert!((&lhs - &rhs).iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn quadratic_resolvent_matches_direct_solve() {
        let q = array![[2.0, 0.5], [0.5, 1.0]];
        let op = QuadraticGradient { q: q.clone(), c: array![0.0, 0.0] };
        let u = array![1.0, -1.0];
        let gamma = 0.5;
        let r = op.apply(gamma, &u);
        // (I + γQ) r = u
        let back = &r + &(q.dot(&r) * gamma);
        assert!((&back - &u).iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn acceptance_and_theta_examples() {
        // exact B-solve: s + γb = r̂ + γb̂
        let hat = SplitTriple { s: array![0.0], b: array![1.0], r: array![2.0] };
        let gamma = 0.5;
        let s = array![1.5];
        let b = array![2.0]; // s + γb = 2.5 = r̂ + γb̂
        let r = array![0.5];
        assert!(dr_acceptance(&hat, &s, &b, &r, gamma, 0.0));
        assert!((theta(&hat, &s, &b, &r, gamma).unwrap() - 1.0).abs() < 1e-15);
        let b_off = array![2.4];
        assert!(!dr_acceptance(&hat, &s, &b_off, &r, gamma, 0.0));

        // hand instance: r̂ + γb̂ − (r + γb) = (1, 0), s − r = (0.5, 0), γ = 1
        let hat = SplitTriple { s: array![0.0, 0.0], b: array![0.0, 0.0], r: array![1.0, 0.0] };
        let th = theta(&hat, &array![0.5, 0.0], &array![0.0, 0.0], &array![0.0, 0.0], 1.0).unwrap();
        assert_eq!(th, 2.0);
        let same = array![1.0, 1.0];
        assert!(matches!(theta(&hat, &same, &same, &same, 1.0), Err(DrError::ZeroDenominator)));
    }

    #[test]
    fn acceptance_matches_hpp_criterion_under_embedding() {
        // hpp example: w = (1, 0), z̃ = (0.6, 0), v = (0.5, 0), λ = 1, σ = 0.5
        // realise it with γ = 1: r̂ + b̂ = w, r + b = z̃, s − r = v.
        let hat = SplitTriple { s: array![0.0, 0.0], b: array![0.25, 0.0], r: array![0.75, 0.0] };
        let r = array![0.2, 0.0];
        let b = array![0.4, 0.0];
        let s = &r + &array![0.5, 0.0];
        let e = embed_to_hpp(&hat, &hat, &s, &b, &r, 1.0);
        let cert = crate::hpp::ProxCertificate { z_tilde: e.z_tilde, v: e.v, lambda: 1.0 };
        for sigma in [0.0, 0.05, 0.2, 0.5, 0.9] {
            assert_eq!(
                dr_acceptance(&hat, &s, &b, &r, 1.0, sigma),
                crate::hpp::error_criterion_holds(&e.w, &cert, sigma)
            );
        }
    }

    #[test]
    fn update_identity() {
        let hat = SplitTriple { s: array![0.3, 0.1], b: array![1.0, -1.0], r: array![2.0, 0.5] };
        let s = array![1.0, 0.2];
        let r = array![0.4, -0.3];
        let gamma = 0.8;
        for (th, rho) in [(1.0, 1.0), (0.7, 1.4), (0.0, 1.0)] {
            let next = dr_update(&hat, &s, &r, th, rho, gamma);
            let expect = &hat.z(gamma) + &((&r - &s) * (rho * th));
            assert!((&next.z(gamma) - &expect).iter().all(|x| x.abs() < 1e-14));
            assert_eq!(next.s, s);
            assert_eq!(next.r, r);
        }
    }

    #[test]
    fn classical_step_with_zero_operators() {
        let z = array![1.0, -3.0];
        assert_eq!(classical_dr_step(&z, 1.0, &ZeroOperator, &ZeroOperator), z);
    }
}
