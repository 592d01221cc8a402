//! Conjugate gradients, one step per call.

use crate::admm::{FProcedure, FSession};
use crate::point::{dot, norm_sq, Point};
use crate::problems::DesignMatrix;

/// CG on `H x = rhs` for a symmetric positive definite `H` given only as a
/// matrix-vector product.
///
/// The first call to [`CgSession::step`] returns the starting point with its
/// residual; each later call advances one CG iteration. The emitted `y` is the
/// residual `H x − rhs`, i.e. the gradient of `½ xᵀHx − rhsᵀx`, updated by the
/// usual recurrence.
pub struct CgSession<H> {
    op: H,
    rhs: Point,
    x: Point,
    r: Point,
    d: Point,
    rr: f64,
    started: bool,
    steps: usize,
}

impl<H: Fn(&Point) -> Point> CgSession<H> {
    pub fn new(op: H, rhs: Point, x0: Point) -> Self {
        let n = x0.len();
        Self {
            op,
            rhs,
            x: x0,
            r: Point::zeros(n),
            d: Point::zeros(n),
            rr: 0.0,
            started: false,
            steps: 0,
        }
    }

    /// Number of CG iterations taken so far (the initial residual evaluation
    /// does not count).
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn x(&self) -> &Point {
        &self.x
    }

    pub fn step(&mut self) -> Result<(Point, Point), String> {
        if !self.started {
            self.started = true;
            self.r = (self.op)(&self.x) - &self.rhs;
            self.d = -&self.r;
            self.rr = norm_sq(&self.r);
            return Ok((self.x.clone(), self.r.clone()));
        }
        if self.rr == 0.0 {
            return Ok((self.x.clone(), self.r.clone()));
        }
        let hd = (self.op)(&self.d);
        let curv = dot(&self.d, &hd);
        if !(curv > 0.0) {
            return Err(format!("CG breakdown: nonpositive curvature {curv:e}"));
        }
        let a = self.rr / curv;
        self.x.scaled_add(a, &self.d);
        self.r.scaled_add(a, &hd);
        let rr_new = norm_sq(&self.r);
        let beta = rr_new / self.rr;
        self.d *= beta;
        self.d -= &self.r;
        self.rr = rr_new;
        self.steps += 1;
        Ok((self.x.clone(), self.r.clone()))
    }
}

impl<H: Fn(&Point) -> Point> FSession for CgSession<H> {
    fn next(&mut self) -> Result<(Point, Point), String> {
        self.step()
    }
}

/// F-procedure for `f(x) = ½‖Ax − b‖²`: CG on
/// `(AᵀA + cI) x = Aᵀb − p + cz`, applying `A` and `Aᵀ` separately.
pub struct QuadraticFProcedure<'a> {
    a: &'a DesignMatrix,
    atb: Point,
}

pub fn make_quadratic_fprocedure<'a>(a: &'a DesignMatrix, b: &Point) -> QuadraticFProcedure<'a> {
    QuadraticFProcedure { a, atb: a.apply_transpose(b) }
}

impl FProcedure for QuadraticFProcedure<'_> {
    fn open<'s>(&'s self, p: &Point, z: &Point, c: f64, x_bar: &Point) -> Box<dyn FSession + 's> {
        assert!(c > 0.0, "penalty c must be positive");
        let a = self.a;
        let op = move |x: &Point| {
            let mut out = a.apply_transpose(&a.apply(x));
            out.scaled_add(c, x);
            out
        };
        let rhs = &self.atb - p + &(z * c);
        Box::new(CgSession::new(op, rhs, x_bar.clone()))
    }
}
