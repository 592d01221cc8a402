use ndarray::s;

use super::{l1_kkt_component, DesignMatrix, ProblemError};
use crate::admm::{FProcedure, L1ShiftedProx, ShiftedProxG, SplitProblem};
use crate::point::Point;
use crate::solvers::fista::CompositeObjective;
use crate::solvers::lbfgs::{SmoothFProcedure, SmoothObjective};
use crate::solvers::prox::soft_threshold_scalar;

/// `log(1 + eᵘ)` without overflow.
pub fn softplus(u: f64) -> f64 {
    u.max(0.0) + (-u.abs()).exp().ln_1p()
}

/// `1 / (1 + e⁻ᵘ)` without overflow.
pub fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// `min Σ log(1 + exp(−bᵢ(aᵢᵀw + v))) + ν‖w‖₁` over `x = (v, w)`, bias at
/// index 0.
#[derive(Clone, Debug, PartialEq)]
pub struct LogisticProblem {
    pub features: DesignMatrix,
    pub labels: Point,
    pub nu: f64,
}

impl LogisticProblem {
    pub fn new(features: DesignMatrix, labels: Point, nu: f64) -> Result<Self, ProblemError> {
        if labels.len() != features.nrows() {
            return Err(ProblemError::DimensionMismatch { expected: features.nrows(), found: labels.len() });
        }
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(ProblemError::NuNotPositive(nu));
        }
        if let Some(bad) = labels.iter().find(|l| **l != 1.0 && **l != -1.0) {
            return Err(ProblemError::BadLabel(*bad));
        }
        if !features.all_finite() {
            return Err(ProblemError::NonFinite);
        }
        Ok(Self { features, labels, nu })
    }

    /// Length of the packed variable `(v, w)`.
    pub fn n(&self) -> usize {
        self.features.ncols() + 1
    }

    pub fn split(x: &Point) -> (f64, Point) {
        (x[0], x.slice(s![1..]).to_owned())
    }

    pub fn pack(v: f64, w: &Point) -> Point {
        std::iter::once(v).chain(w.iter().copied()).collect()
    }

    /// `(f(v, w), ∇f)` with the gradient packed as `(∂f/∂v, ∇_w f)`.
    pub fn value_gradient(&self, v: f64, w: &Point) -> (f64, Point) {
        let margins = self.features.apply(w) + v;
        let mut value = 0.0;
        let mut weights = Point::zeros(self.labels.len());
        for (i, (t, b)) in margins.iter().zip(self.labels.iter()).enumerate() {
            let m = b * t;
            value += softplus(-m);
            weights[i] = -b * sigmoid(-m);
        }
        let gv = weights.sum();
        let gw = self.features.apply_transpose(&weights);
        (value, Self::pack(gv, &gw))
    }

    pub fn f_value(&self, x: &Point) -> f64 {
        let (v, w) = Self::split(x);
        self.value_gradient(v, &w).0
    }

    pub fn f_gradient(&self, x: &Point) -> Point {
        let (v, w) = Self::split(x);
        self.value_gradient(v, &w).1
    }

    pub fn g_value(&self, x: &Point) -> f64 {
        self.nu * x.iter().skip(1).map(|v| v.abs()).sum::<f64>()
    }

    pub fn objective(&self, x: &Point) -> f64 {
        self.f_value(x) + self.g_value(x)
    }

    /// `dist∞(0, ∂(f + g)(v, w))`; the bias contributes `|∂f/∂v|`.
    pub fn kkt_dist_inf(&self, x: &Point) -> f64 {
        let g = self.f_gradient(x);
        let bias = g[0].abs();
        g.iter()
            .zip(x.iter())
            .skip(1)
            .map(|(gi, xi)| l1_kkt_component(*gi, *xi, self.nu))
            .fold(bias, f64::max)
    }

    /// The optimal bias when `w = 0`: `log(n₊ / n₋)`.
    pub fn null_bias(&self) -> f64 {
        let pos = self.labels.iter().filter(|l| **l > 0.0).count() as f64;
        let neg = self.labels.len() as f64 - pos;
        (pos / neg).ln()
    }

    pub fn make_solvers(&self) -> (Box<dyn FProcedure + '_>, Box<dyn ShiftedProxG + '_>) {
        (self.fprocedure(), self.gprox())
    }
}

impl SmoothObjective for LogisticProblem {
    fn dim(&self) -> usize {
        self.n()
    }
    fn value_grad(&self, x: &Point) -> (f64, Point) {
        let (v, w) = Self::split(x);
        self.value_gradient(v, &w)
    }
}

impl SplitProblem for LogisticProblem {
    fn dim(&self) -> usize {
        self.n()
    }
    fn fprocedure(&self) -> Box<dyn FProcedure + '_> {
        Box::new(SmoothFProcedure::new(self))
    }
    fn gprox(&self) -> Box<dyn ShiftedProxG + '_> {
        Box::new(L1ShiftedProx { nu: self.nu, free: 1 })
    }
    fn kkt_residual(&self, x: &Point) -> f64 {
        self.kkt_dist_inf(x)
    }
    fn objective(&self, x: &Point) -> f64 {
        LogisticProblem::objective(self, x)
    }
    fn smooth_gradient(&self, x: &Point) -> Point {
        self.f_gradient(x)
    }
}

impl CompositeObjective for LogisticProblem {
    fn dim(&self) -> usize {
        self.n()
    }
    fn smooth_value(&self, x: &Point) -> f64 {
        self.f_value(x)
    }
    fn smooth_gradient(&self, x: &Point) -> Point {
        self.f_gradient(x)
    }
    fn nonsmooth_value(&self, x: &Point) -> f64 {
        self.g_value(x)
    }
    fn prox_nonsmooth(&self, u: &Point, t: f64) -> Point {
        u.iter()
            .enumerate()
            .map(|(i, ui)| if i == 0 { *ui } else { soft_threshold_scalar(*ui, t * self.nu) })
            .collect()
    }
    fn kkt_residual(&self, x: &Point) -> f64 {
        self.kkt_dist_inf(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn single_sample() {
        let p = LogisticProblem::new(DesignMatrix::Dense(array![[1.0]]), array![1.0], 1.0).unwrap();
        let (value, grad) = p.value_gradient(0.0, &array![0.0]);
        assert!((value - 2f64.ln()).abs() < 1e-15);
        assert!((grad[0] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn large_margins_vanish() {
        let p = LogisticProblem::new(DesignMatrix::Dense(array![[1.0], [-1.0]]), array![1.0, -1.0], 1.0).unwrap();
        let (value, grad) = p.value_gradient(0.0, &array![1e6]);
        assert_eq!(value, 0.0);
        assert!(grad.iter().all(|g| *g == 0.0));
        let (value, _) = p.value_gradient(0.0, &array![-1e6]);
        assert!((value - 2e6).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_labels() {
        let r = LogisticProblem::new(DesignMatrix::Dense(array![[1.0]]), array![0.0], 1.0);
        assert!(matches!(r, Err(ProblemError::BadLabel(_))));
    }

    #[test]
    fn prox_skips_bias() {
        let p = LogisticProblem::new(DesignMatrix::Dense(array![[1.0, 2.0]]), array![1.0], 1.0).unwrap();
        assert_eq!(p.prox_nonsmooth(&array![0.5, 0.5, -3.0], 1.0), array![0.5, 0.0, -2.0]);
        assert_eq!(p.g_value(&array![100.0, 1.0, -2.0]), 3.0);
    }
}
