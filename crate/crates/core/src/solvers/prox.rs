use crate::point::Point;

/// Proximal map of `κ‖·‖₁`: componentwise `sign(tᵢ)·max(|tᵢ| − κ, 0)`.
pub fn soft_threshold(t: &Point, kappa: f64) -> Point {
    t.mapv(|ti| soft_threshold_scalar(ti, kappa))
}

#[inline]
pub fn soft_threshold_scalar(t: f64, kappa: f64) -> f64 {
    if t > kappa {
        t - kappa
    } else if t < -kappa {
        t + kappa
    } else {
        0.0
    }
}
