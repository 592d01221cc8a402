//! Trajectory checks against a reference zero `z*`.

use super::{InertiaRelaxParams, IterationDiagnostics};
use crate::point::{dist_sq, Point};

/// Checks `‖z^{k+1} − z*‖² + s_{k+1} ≤ (1 + tol_rel) ‖w^k − z*‖²` at every
/// recorded iteration and returns the index of the first violation.
///
/// `s_{k+1}` is recomputed from `params` rather than read from the
/// diagnostics, so trajectories produced by other layers (after mapping into
/// HPP coordinates) can be checked too.
pub fn fejer_check(
    trajectory: &[IterationDiagnostics],
    z_star: &Point,
    params: &InertiaRelaxParams,
    tol_rel: f64,
) -> Option<usize> {
    let (rl, rh, sg) = (params.rho_lo, params.rho_hi, params.sigma);
    trajectory.iter().position(|d| {
        let s_next = (2.0 - rh)
            * f64::max(
                dist_sq(&d.z_next, &d.w) / rh,
                rl * (1.0 - sg * sg).powi(2) * dist_sq(&d.z_tilde, &d.w),
            );
        let lhs = dist_sq(&d.z_next, z_star) + s_next;
        let rhs = dist_sq(&d.w, z_star);
        lhs > rhs * (1.0 + tol_rel)
    })
}

/// Checks the partial-sum bound
/// `φ_k + Σ_{j=1..k} s_j ≤ φ_0 + (1 − α)⁻¹ Σ_{j=0..k−1} δ_j`
/// with `φ_k = ‖z^k − z*‖²`, for every prefix of the trajectory. Returns the
/// first `k` (1-based) at which it fails by more than `tol_rel` relative.
pub fn alvarez_attouch_check(
    trajectory: &[IterationDiagnostics],
    z_star: &Point,
    alpha: f64,
    tol_rel: f64,
) -> Option<usize> {
    let first = trajectory.first()?;
    let phi0 = dist_sq(&first.z, z_star);
    let (mut sum_s, mut sum_delta) = (0.0, 0.0);
    for (j, d) in trajectory.iter().enumerate() {
        sum_s += d.s_next;
        sum_delta += d.delta_k;
        let lhs = dist_sq(&d.z_next, z_star) + sum_s;
        let rhs = phi0 + sum_delta / (1.0 - alpha);
        if lhs > rhs * (1.0 + tol_rel) {
            return Some(j + 1);
        }
    }
    None
}

/// Running sums `Σ_{j ≤ k} ‖z^{j+1} − z^j‖²`.
pub fn increment_partial_sums(trajectory: &[IterationDiagnostics]) -> Vec<f64> {
    trajectory
        .iter()
        .scan(0.0, |acc, d| {
            *acc += dist_sq(&d.z_next, &d.z);
            Some(*acc)
        })
        .collect()
}
