//! Relative-error inertial-relaxed hybrid proximal projection (HPP).
//!
//! Solves `0 ∈ T(z)` for a maximal monotone `T` that is only reachable
//! through an inexact resolvent oracle. One iteration:
//!
//! 1. extrapolate `w = z + α_k (z − z_prev)`;
//! 2. ask the oracle for `(z̃, v)` with `v ∈ T(z̃)` and
//!    `‖λv + z̃ − w‖² ≤ σ² (‖z̃ − w‖² + ‖λv‖²)`;
//! 3. move to `w − ρ_k τ v`, `τ = ⟨w − z̃, v⟩ / ‖v‖²`, i.e. an over-relaxed
//!    projection onto the hyperplane `{z : ⟨z, v⟩ = ⟨z̃, v⟩}` which separates
//!    `w` from the zeros of `T`.

pub mod catalog;
mod diagnostics;
pub mod params;

use std::time::Instant;

use thiserror::Error;

use crate::point::{all_finite, dist_sq, dot, norm, norm_sq, roundoff_floor, same_dim, Point};
use crate::record::{RunRecord, RunStatus};

pub use diagnostics::{alvarez_attouch_check, fejer_check, increment_partial_sums};
pub use params::{
    beta_of_rho_bar, q_coefficients, q_eval, rho_bar_of_beta, smallest_positive_root, DomainError,
    InertiaRelaxParams, ParamError, RHO_BOUND_SLACK,
};

/// Inexact resolvent output: a pair `v ∈ T(z̃)` produced with stepsize `λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProxCertificate {
    pub z_tilde: Point,
    pub v: Point,
    pub lambda: f64,
}

impl ProxCertificate {
    /// The exact pair `(J_{λT}(w), λ⁻¹(w − J_{λT}(w)))`.
    pub fn exact(w: &Point, resolvent: Point, lambda: f64) -> Self {
        let v = (w - &resolvent) / lambda;
        Self { z_tilde: resolvent, v, lambda }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum OracleOutput {
    Certificate(ProxCertificate),
    /// The oracle found `z̃` with `0 ∈ T(z̃)`.
    ExactSolution(Point),
}

/// Produces relative-error certificates for the resolvent of some maximal
/// monotone operator.
///
/// Implementations own whatever iterative state they need; a run holds its
/// oracle exclusively.
pub trait InexactResolventOracle {
    fn resolve(&mut self, w: &Point, lambda: f64, sigma: f64) -> Result<OracleOutput, String>;

    /// Inner steps spent by the most recent `resolve` call.
    fn last_inner_steps(&self) -> usize {
        1
    }
}

/// `(z^k, z^{k−1})` plus the inertial weight used at the previous step.
#[derive(Clone, Debug, PartialEq)]
pub struct HppState {
    pub z_cur: Point,
    pub z_prev: Point,
    pub k: usize,
    last_alpha: f64,
}

impl HppState {
    /// `z⁰ = z⁻¹ = z0`.
    pub fn new(z0: Point) -> Self {
        Self { z_prev: z0.clone(), z_cur: z0, k: 0, last_alpha: 0.0 }
    }
}

/// Everything observable about one HPP iteration `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationDiagnostics {
    pub k: usize,
    /// `z^k`
    pub z: Point,
    pub w: Point,
    pub z_tilde: Point,
    pub v: Point,
    /// `z^{k+1}`
    pub z_next: Point,
    pub alpha_k: f64,
    pub rho_k: f64,
    /// `⟨w − z̃, v⟩ / ‖v‖²`
    pub tau: f64,
    /// `s_{k+1} = (2 − ρ̄) max{ρ̄⁻¹ ‖z^{k+1} − w^k‖², ρ̲ (1 − σ²)² ‖z̃^k − w^k‖²}`
    pub s_next: f64,
    /// `‖λv + z̃ − w‖² / (σ² (‖z̃ − w‖² + ‖λv‖²))`
    pub error_ratio: f64,
    /// `‖z^k − z^{k−1}‖²`
    pub increment_sq: f64,
    /// `α_k (1 + α_k) ‖z^k − z^{k−1}‖²`
    pub delta_k: f64,
}

#[derive(Debug, Error)]
pub enum HppError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("non-finite iterate")]
    NonFinite,
    #[error("inertial weight α_k = {alpha_k} outside [{floor}, {cap}]")]
    AlphaOutOfRange { alpha_k: f64, floor: f64, cap: f64 },
    #[error("relaxation ρ_k = {0} outside [ρ̲, ρ̄]")]
    RhoOutOfRange(f64),
    #[error("v = 0: z̃ already solves the inclusion")]
    ZeroV,
    #[error("oracle failure: {0}")]
    OracleFailure(String),
    #[error("oracle certificate violates the relative error criterion (ratio {0})")]
    CriterionViolated(f64),
    #[error("iteration budget exhausted after {} iterations", .0.record.outer_iters)]
    BudgetExceeded(Box<HppRun>),
}

impl From<(usize, usize)> for HppError {
    fn from((a, b): (usize, usize)) -> Self {
        HppError::DimensionMismatch(a, b)
    }
}

/// `w = z_cur + α_k (z_cur − z_prev)`.
pub fn extrapolate(z_cur: &Point, z_prev: &Point, alpha_k: f64) -> Result<Point, HppError> {
    same_dim(z_cur, z_prev)?;
    Ok(z_cur + &((z_cur - z_prev) * alpha_k))
}

/// Both sides of the relative error criterion, without the `σ²` factor:
/// `(‖λv + z̃ − w‖², ‖z̃ − w‖² + ‖λv‖²)`.
pub fn criterion_sides(w: &Point, cert: &ProxCertificate) -> (f64, f64) {
    let lv = &cert.v * cert.lambda;
    let lhs = norm_sq(&(&lv + &cert.z_tilde - w));
    let rhs = dist_sq(&cert.z_tilde, w) + norm_sq(&lv);
    (lhs, rhs)
}

/// `‖λv + z̃ − w‖² ≤ σ² (‖z̃ − w‖² + ‖λv‖²)`.
pub fn error_criterion_holds(w: &Point, cert: &ProxCertificate, sigma: f64) -> bool {
    let (lhs, rhs) = criterion_sides(w, cert);
    lhs <= sigma * sigma * rhs
}

/// Two-sided bound on `‖λv‖ / ‖z̃ − w‖` implied by the error criterion.
///
/// With `t = 1 − σ²` and `s = √(1 − t²)` the ratio lies in
/// `[t / (1 + s), t / (1 − s)]`; at `σ = 0` both ends equal 1. The upper end
/// is `+∞` if `1 − s` rounds to zero. Inequalities are checked with a
/// relative slack of `1e-9`.
pub fn gauss_bounds_hold(w: &Point, cert: &ProxCertificate, sigma: f64) -> bool {
    const SLACK: f64 = 1e-9;
    let t = 1.0 - sigma * sigma;
    let s = (1.0 - t * t).max(0.0).sqrt();
    let dist = dist_sq(&cert.z_tilde, w).sqrt();
    let lv = norm(&cert.v) * cert.lambda;
    let lower = t / (1.0 + s) * dist;
    let upper = if 1.0 - s > 0.0 { t / (1.0 - s) * dist } else { f64::INFINITY };
    let tiny = 1e-300;
    lv >= lower * (1.0 - SLACK) - tiny && lv <= upper * (1.0 + SLACK) + tiny
}

/// `w − ρ_k τ v` with `τ = ⟨w − z̃, v⟩ / ‖v‖²`.
pub fn relaxed_projection(w: &Point, cert: &ProxCertificate, rho_k: f64) -> Result<Point, HppError> {
    same_dim(w, &cert.v)?;
    let vv = norm_sq(&cert.v);
    if vv == 0.0 {
        return Err(HppError::ZeroV);
    }
    let tau = dot(&(w - &cert.z_tilde), &cert.v) / vv;
    Ok(w - &(&cert.v * (rho_k * tau)))
}

/// Result of a single HPP iteration.
#[derive(Clone, Debug, PartialEq)]
pub enum HppStep {
    Advanced(HppState, Box<IterationDiagnostics>),
    /// The oracle reported `v = 0`; the point solves the inclusion.
    Solution(Point),
}

/// One iteration of the method.
///
/// `alpha_k` must lie in `[α_{k−1}, α]` (nondecreasing schedule) and `rho_k`
/// in `[ρ̲, ρ̄]`. Certificates that violate the error criterion beyond
/// rounding are rejected with [`HppError::CriterionViolated`].
pub fn hpp_iterate<O: InexactResolventOracle + ?Sized>(
    state: &HppState,
    oracle: &mut O,
    params: &InertiaRelaxParams,
    alpha_k: f64,
    rho_k: f64,
) -> Result<HppStep, HppError> {
    if !(alpha_k >= state.last_alpha && alpha_k <= params.alpha) {
        return Err(HppError::AlphaOutOfRange {
            alpha_k,
            floor: state.last_alpha,
            cap: params.alpha,
        });
    }
    if !(rho_k >= params.rho_lo && rho_k <= params.rho_hi) {
        return Err(HppError::RhoOutOfRange(rho_k));
    }
    let w = extrapolate(&state.z_cur, &state.z_prev, alpha_k)?;
    if !all_finite(&w) {
        return Err(HppError::NonFinite);
    }
    let cert = match oracle
        .resolve(&w, params.lambda, params.sigma)
        .map_err(HppError::OracleFailure)?
    {
        OracleOutput::ExactSolution(z) => return Ok(HppStep::Solution(z)),
        OracleOutput::Certificate(c) => c,
    };
    same_dim(&w, &cert.z_tilde)?;
    same_dim(&w, &cert.v)?;
    if cert.v.iter().all(|&x| x == 0.0) {
        return Ok(HppStep::Solution(cert.z_tilde));
    }

    let (lhs, rhs) = criterion_sides(&w, &cert);
    let sigma_sq = params.sigma * params.sigma;
    let scale = norm_sq(&w) + norm_sq(&cert.z_tilde) + rhs;
    if lhs > sigma_sq * rhs + roundoff_floor(scale) {
        return Err(HppError::CriterionViolated(lhs / (sigma_sq * rhs)));
    }
    let error_ratio = if lhs == 0.0 {
        0.0
    } else if sigma_sq * rhs == 0.0 {
        f64::INFINITY
    } else {
        lhs / (sigma_sq * rhs)
    };

    let vv = norm_sq(&cert.v);
    let tau = dot(&(&w - &cert.z_tilde), &cert.v) / vv;
    let z_next = &w - &(&cert.v * (rho_k * tau));
    if !all_finite(&z_next) {
        return Err(HppError::NonFinite);
    }

    let (rl, rh, sg) = (params.rho_lo, params.rho_hi, params.sigma);
    let s_next = (2.0 - rh)
        * f64::max(
            dist_sq(&z_next, &w) / rh,
            rl * (1.0 - sg * sg).powi(2) * dist_sq(&cert.z_tilde, &w),
        );
    let increment_sq = dist_sq(&state.z_cur, &state.z_prev);

    let diag = IterationDiagnostics {
        k: state.k,
        z: state.z_cur.clone(),
        w,
        z_tilde: cert.z_tilde,
        v: cert.v,
        z_next: z_next.clone(),
        alpha_k,
        rho_k,
        tau,
        s_next,
        error_ratio,
        increment_sq,
        delta_k: alpha_k * (1.0 + alpha_k) * increment_sq,
    };
    let next = HppState {
        z_prev: state.z_cur.clone(),
        z_cur: z_next,
        k: state.k + 1,
        last_alpha: alpha_k,
    };
    Ok(HppStep::Advanced(next, Box::new(diag)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HppStop {
    pub max_iters: usize,
    /// Stop once `‖v^k‖ ≤ v_tolerance`. Zero means only an exact `v = 0`
    /// terminates early.
    pub v_tolerance: f64,
}

impl Default for HppStop {
    fn default() -> Self {
        Self { max_iters: 10_000, v_tolerance: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HppRun {
    /// Best available approximation of a zero: `z̃` of the final iteration
    /// when the run converged, the current iterate otherwise.
    pub solution: Point,
    pub state: HppState,
    pub trajectory: Vec<IterationDiagnostics>,
    pub record: RunRecord,
}

/// Iterates [`hpp_iterate`] with constant `α_k = α` and `ρ_k = ρ̄`.
pub fn run_hpp<O: InexactResolventOracle + ?Sized>(
    z0: Point,
    oracle: &mut O,
    params: &InertiaRelaxParams,
    stop: HppStop,
) -> Result<HppRun, HppError> {
    params.validate()?;
    if !all_finite(&z0) {
        return Err(HppError::NonFinite);
    }
    let start = Instant::now();
    let mut state = HppState::new(z0);
    let mut trajectory = Vec::new();
    let mut inner = 0usize;
    let mut last_v = f64::INFINITY;

    let finish = |solution: Point,
                  state: HppState,
                  trajectory: Vec<IterationDiagnostics>,
                  inner: usize,
                  v: f64,
                  status: RunStatus| HppRun {
        record: RunRecord {
            outer_iters: state.k,
            inner_iters_total: inner,
            wall_seconds: start.elapsed().as_secs_f64(),
            final_kkt: v,
            final_objective: f64::NAN,
            status,
        },
        solution,
        state,
        trajectory,
    };

    while state.k < stop.max_iters {
        let step = hpp_iterate(&state, oracle, params, params.alpha, params.rho_hi)?;
        inner += oracle.last_inner_steps();
        match step {
            HppStep::Solution(z) => {
                return Ok(finish(z, state, trajectory, inner, 0.0, RunStatus::Converged));
            }
            HppStep::Advanced(next, diag) => {
                last_v = norm(&diag.v);
                let z_tilde = diag.z_tilde.clone();
                trajectory.push(*diag);
                state = next;
                if last_v <= stop.v_tolerance {
                    return Ok(finish(z_tilde, state, trajectory, inner, last_v, RunStatus::Converged));
                }
            }
        }
    }
    let z = state.z_cur.clone();
    Err(HppError::BudgetExceeded(Box::new(finish(
        z,
        state,
        trajectory,
        inner,
        last_v,
        RunStatus::BudgetExceeded,
    ))))
}

#[cfg(test)]
mod tests {
    use super::catalog::{AffineOracle, ScaledIdentityOracle};
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn extrapolation() {
        let a = array![1.0, 0.0];
        let b = array![0.0, 0.0];
        assert_eq!(extrapolate(&a, &b, 0.0).unwrap(), a);
        assert_eq!(extrapolate(&a, &a, 0.7).unwrap(), a);
        assert_eq!(extrapolate(&a, &b, 0.5).unwrap(), array![1.5, 0.0]);
        assert!(matches!(
            extrapolate(&a, &array![1.0], 0.5),
            Err(HppError::DimensionMismatch(2, 1))
        ));
    }

    #[test]
    fn criterion_examples() {
        let w = array![1.0, 0.0];
        let exact = ProxCertificate { z_tilde: array![0.5, 0.0], v: array![0.5, 0.0], lambda: 1.0 };
        assert!(error_criterion_holds(&w, &exact, 0.0));
        let off = ProxCertificate { z_tilde: array![0.6, 0.0], v: array![0.5, 0.0], lambda: 1.0 };
        assert!(!error_criterion_holds(&w, &off, 0.0));
        // LHS = 0.01, RHS = 0.25 · (0.16 + 0.25) = 0.1025
        let (lhs, rhs) = criterion_sides(&w, &off);
        assert!((lhs - 0.01).abs() < 1e-15);
        assert!((0.25 * rhs - 0.1025).abs() < 1e-15);
        assert!(error_criterion_holds(&w, &off, 0.5));
        assert!(gauss_bounds_hold(&w, &off, 0.5));
        // σ = 0 bounds collapse to ‖λv‖ = ‖z̃ − w‖
        assert!(gauss_bounds_hold(&w, &exact, 0.0));
        let lopsided = ProxCertificate { z_tilde: array![0.5, 0.0], v: array![0.6, 0.0], lambda: 1.0 };
        assert!(!gauss_bounds_hold(&w, &lopsided, 0.0));
    }

    #[test]
    fn projection_examples() {
        let w = array![1.0, 0.0];
        let cert = ProxCertificate { z_tilde: array![0.0, 0.0], v: array![1.0, 0.0], lambda: 1.0 };
        assert_eq!(relaxed_projection(&w, &cert, 1.5).unwrap(), array![-0.5, 0.0]);
        // exact certificate with ρ = 1 lands on z̃
        let w = array![2.0, -1.0];
        let exact = ProxCertificate::exact(&w, array![1.0, -0.5], 1.0);
        assert_eq!(relaxed_projection(&w, &exact, 1.0).unwrap(), exact.z_tilde);
        let zero = ProxCertificate { z_tilde: w.clone(), v: array![0.0, 0.0], lambda: 1.0 };
        assert!(matches!(relaxed_projection(&w, &zero, 1.0), Err(HppError::ZeroV)));
    }

    #[test]
    fn identity_operator_halves() {
        let params = InertiaRelaxParams::plain(0.0);
        let mut oracle = ScaledIdentityOracle::new(1.0);
        let state = HppState::new(array![1.0]);
        let HppStep::Advanced(next, diag) =
            hpp_iterate(&state, &mut oracle, &params, 0.0, 1.0).unwrap()
        else {
            panic!("expected a step");
        };
        assert_eq!(next.z_cur, array![0.5]);
        assert_eq!(diag.tau, 1.0);

        let mut state = HppState::new(array![1.0]);
        for _ in 0..50 {
            match hpp_iterate(&state, &mut oracle, &params, 0.0, 1.0).unwrap() {
                HppStep::Advanced(next, _) => state = next,
                HppStep::Solution(_) => panic!("unexpected solution"),
            }
        }
        assert_eq!(state.z_cur[0], 2f64.powi(-50));
    }

    #[test]
    fn already_solved() {
        let params = InertiaRelaxParams::plain(0.0);
        let mut oracle = ScaledIdentityOracle::new(1.0);
        let step = hpp_iterate(&HppState::new(array![0.0]), &mut oracle, &params, 0.0, 1.0).unwrap();
        assert_eq!(step, HppStep::Solution(array![0.0]));
    }

    #[test]
    fn schedule_checks() {
        let params = InertiaRelaxParams::new(0.2, 0.3, 0.0, 1.0, 1.0, 1.0);
        let mut oracle = ScaledIdentityOracle::new(1.0);
        let state = HppState::new(array![1.0]);
        assert!(matches!(
            hpp_iterate(&state, &mut oracle, &params, 0.25, 1.0),
            Err(HppError::AlphaOutOfRange { .. })
        ));
        assert!(matches!(
            hpp_iterate(&state, &mut oracle, &params, 0.1, 1.2),
            Err(HppError::RhoOutOfRange(_))
        ));
        let HppStep::Advanced(next, _) = hpp_iterate(&state, &mut oracle, &params, 0.1, 1.0).unwrap()
        else {
            panic!()
        };
        // α_k may not decrease
        assert!(matches!(
            hpp_iterate(&next, &mut oracle, &params, 0.05, 1.0),
            Err(HppError::AlphaOutOfRange { .. })
        ));
        assert!(hpp_iterate(&next, &mut oracle, &params, 0.15, 1.0).is_ok());
    }

    struct LyingOracle;
    impl InexactResolventOracle for LyingOracle {
        fn resolve(&mut self, w: &Point, lambda: f64, _: f64) -> Result<OracleOutput, String> {
            Ok(OracleOutput::Certificate(ProxCertificate {
                z_tilde: w * 0.5,
                v: w * 3.0,
                lambda,
            }))
        }
    }

    #[test]
    fn bad_certificates_are_rejected() {
        let params = InertiaRelaxParams::plain(0.3);
        let err = hpp_iterate(&HppState::new(array![1.0]), &mut LyingOracle, &params, 0.0, 1.0);
        assert!(matches!(err, Err(HppError::CriterionViolated(_))));
    }

    #[test]
    fn run_stops() {
        let params = InertiaRelaxParams::plain(0.0);
        let mut oracle = ScaledIdentityOracle::new(1.0);
        let run = run_hpp(array![1.0], &mut oracle, &params, HppStop { max_iters: 40, v_tolerance: 1e-8 })
            .unwrap();
        assert!(run.record.converged());
        assert!(run.record.outer_iters <= 40);
        assert!(run.solution[0].abs() < 1e-8);

        match run_hpp(array![1.0], &mut oracle, &params, HppStop { max_iters: 0, v_tolerance: 0.0 }) {
            Err(HppError::BudgetExceeded(run)) => {
                assert_eq!(run.solution, array![1.0]);
                assert_eq!(run.record.status, RunStatus::BudgetExceeded);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rotation_operator_is_fejer() {
        let m = Array2::from_shape_vec((2, 2), vec![0.1, 1.0, -1.0, 0.1]).unwrap();
        let mut oracle = AffineOracle::exact(m, array![0.0, 0.0]);
        let params = InertiaRelaxParams::plain(0.0);
        let stop = HppStop { max_iters: 400, v_tolerance: 1e-12 };
        let run = run_hpp(array![1.0, -2.0], &mut oracle, &params, stop).unwrap();
        assert!(run.solution.iter().all(|x| x.abs() < 1e-10));
        assert_eq!(fejer_check(&run.trajectory, &array![0.0, 0.0], &params, 1e-9), None);
    }
}
