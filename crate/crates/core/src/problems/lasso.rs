use nalgebra::{DMatrix, DVector};

use super::{l1_kkt_component, DesignMatrix, ProblemError};
use crate::admm::{FProcedure, L1ShiftedProx, ShiftedProxG, SplitProblem};
use crate::point::{norm_inf, norm_sq, Point};
use crate::solvers::cg::make_quadratic_fprocedure;
use crate::solvers::fista::{fista_solve, CompositeObjective, FistaConfig, FistaError};
use crate::solvers::prox::soft_threshold;

/// `min ½‖Ax − b‖² + ν‖x‖₁`.
#[derive(Clone, Debug, PartialEq)]
pub struct LassoProblem {
    pub a: DesignMatrix,
    pub b: Point,
    pub nu: f64,
}

impl LassoProblem {
    pub fn new(a: DesignMatrix, b: Point, nu: f64) -> Result<Self, ProblemError> {
        if b.len() != a.nrows() {
            return Err(ProblemError::DimensionMismatch { expected: a.nrows(), found: b.len() });
        }
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(ProblemError::NuNotPositive(nu));
        }
        if !a.all_finite() || !b.iter().all(|v| v.is_finite()) {
            return Err(ProblemError::NonFinite);
        }
        Ok(Self { a, b, nu })
    }

    pub fn n(&self) -> usize {
        self.a.ncols()
    }

    /// `‖Aᵀb‖∞`: for `ν` at or above this, `x = 0` is optimal.
    pub fn nu_max(&self) -> f64 {
        norm_inf(&self.a.apply_transpose(&self.b))
    }

    pub fn f_value(&self, x: &Point) -> f64 {
        0.5 * norm_sq(&(self.a.apply(x) - &self.b))
    }

    /// `Aᵀ(Ax − b)`.
    pub fn f_gradient(&self, x: &Point) -> Point {
        self.a.apply_transpose(&(self.a.apply(x) - &self.b))
    }

    pub fn g_value(&self, x: &Point) -> f64 {
        self.nu * x.iter().map(|v| v.abs()).sum::<f64>()
    }

    pub fn objective(&self, x: &Point) -> f64 {
        self.f_value(x) + self.g_value(x)
    }

    /// `dist∞(0, Aᵀ(Ax − b) + ν∂‖x‖₁)`.
    pub fn kkt_dist_inf(&self, x: &Point) -> f64 {
        let g = self.f_gradient(x);
        g.iter().zip(x.iter()).map(|(gi, xi)| l1_kkt_component(*gi, *xi, self.nu)).fold(0.0, f64::max)
    }

    /// `(F-procedure, shifted prox)` for the ADMM driver.
    pub fn make_solvers(&self) -> (Box<dyn FProcedure + '_>, Box<dyn ShiftedProxG + '_>) {
        (self.fprocedure(), self.gprox())
    }

    /// A high-accuracy minimizer: FISTA to `dist∞ ≤ 1e-10`, then a Newton
    /// polish on the support (`A_SᵀA_S x_S = A_Sᵀb − ν sign(x_S)`) kept only
    /// if it preserves signs and lowers the residual.
    pub fn reference_solution(&self) -> Result<Point, FistaError> {
        let cfg = FistaConfig { epsilon: 1e-10, max_iters: 2_000_000, ..FistaConfig::default() };
        let x = fista_solve(self, Point::zeros(self.n()), &cfg)?.x;
        Ok(self.polish(x))
    }

    /// Support-restricted Newton step from `x`; returns `x` unchanged when
    /// the step is not an improvement.
    pub fn polish(&self, x: Point) -> Point {
        let support: Vec<usize> = (0..x.len()).filter(|&i| x[i] != 0.0).collect();
        if support.is_empty() || support.len() > self.a.nrows() {
            return x;
        }
        let dense = self.a.to_dense();
        let a_s = DMatrix::from_fn(dense.nrows(), support.len(), |i, j| dense[[i, support[j]]]);
        let b = DVector::from_iterator(self.b.len(), self.b.iter().copied());
        let sign = DVector::from_iterator(support.len(), support.iter().map(|&i| x[i].signum()));
        let rhs = a_s.transpose() * b - sign.clone() * self.nu;
        let Some(chol) = (a_s.transpose() * &a_s).cholesky() else {
            return x;
        };
        let xs = chol.solve(&rhs);
        let mut candidate = Point::zeros(x.len());
        for (k, &i) in support.iter().enumerate() {
            if xs[k].signum() != sign[k] {
                return x;
            }
            candidate[i] = xs[k];
        }
        if self.kkt_dist_inf(&candidate) < self.kkt_dist_inf(&x) {
            candidate
        } else {
            x
        }
    }
}

impl SplitProblem for LassoProblem {
    fn dim(&self) -> usize {
        self.n()
    }
    fn fprocedure(&self) -> Box<dyn FProcedure + '_> {
        Box::new(make_quadratic_fprocedure(&self.a, &self.b))
    }
    fn gprox(&self) -> Box<dyn ShiftedProxG + '_> {
        Box::new(L1ShiftedProx { nu: self.nu, free: 0 })
    }
    fn kkt_residual(&self, x: &Point) -> f64 {
        self.kkt_dist_inf(x)
    }
    fn objective(&self, x: &Point) -> f64 {
        LassoProblem::objective(self, x)
    }
    fn smooth_gradient(&self, x: &Point) -> Point {
        self.f_gradient(x)
    }
}

impl CompositeObjective for LassoProblem {
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
        soft_threshold(u, t * self.nu)
    }
    fn kkt_residual(&self, x: &Point) -> f64 {
        self.kkt_dist_inf(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn gradient_cases() {
        let eye = LassoProblem::new(DesignMatrix::Dense(Array2::eye(3)), Point::zeros(3), 1.0).unwrap();
        let x = array![1.0, -2.0, 0.5];
        assert_eq!(eye.f_gradient(&x), x);

        let a = array![[2.0, 1.0], [1.0, 3.0]];
        let b = array![1.0, 2.0];
        let p = LassoProblem::new(DesignMatrix::Dense(a.clone()), b.clone(), 0.1).unwrap();
        let xls = crate::dense::solve(&a, &b).unwrap();
        assert!(norm_inf(&p.f_gradient(&xls)) < 1e-14);
    }

    #[test]
    fn zero_is_optimal_above_threshold() {
        let a = array![[1.0, -2.0, 0.5], [0.3, 1.0, 2.0]];
        let b = array![1.0, -1.0];
        let mut p = LassoProblem::new(DesignMatrix::Dense(a), b, 1.0).unwrap();
        let atb = p.a.apply_transpose(&p.b);
        let expect = atb.iter().map(|g| (g.abs() - p.nu).max(0.0)).fold(0.0, f64::max);
        assert_eq!(p.kkt_dist_inf(&Point::zeros(3)), expect);
        p.nu = p.nu_max();
        assert_eq!(p.kkt_dist_inf(&Point::zeros(3)), 0.0);
    }

    #[test]
    fn rejects_invalid() {
        let a = DesignMatrix::Dense(Array2::eye(2));
        assert!(matches!(LassoProblem::new(a.clone(), Point::zeros(3), 1.0), Err(ProblemError::DimensionMismatch { .. })));
        assert!(matches!(LassoProblem::new(a, Point::zeros(2), 0.0), Err(ProblemError::NuNotPositive(_))));
    }

    #[test]
    fn fista_identity_design() {
        // A = I: the minimizer is the soft threshold of b
        let b = array![3.0, -0.5, 1.5, -2.0];
        let p = LassoProblem::new(DesignMatrix::Dense(Array2::eye(4)), b.clone(), 1.0).unwrap();
        let run = fista_solve(&p, Point::zeros(4), &FistaConfig::default()).unwrap();
        assert_eq!(run.x, soft_threshold(&b, 1.0));
        assert!(run.record.outer_iters <= 2);
    }
}
