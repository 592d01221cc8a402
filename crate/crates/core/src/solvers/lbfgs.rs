//! Limited-memory BFGS with Armijo backtracking, one step per call.

use std::collections::VecDeque;

use crate::admm::{FProcedure, FSession};
use crate::point::{dot, norm, norm_sq, Point};

/// A differentiable function given by value and gradient.
pub trait SmoothObjective {
    fn dim(&self) -> usize;
    fn value_grad(&self, x: &Point) -> (f64, Point);
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LbfgsConfig {
    pub memory: usize,
    pub armijo: f64,
    /// Curvature constant of the weak Wolfe condition `φ'(t) ≥ c₂ φ'(0)`.
    pub wolfe: f64,
    /// Upper bound on the shrink factor per rejected trial.
    pub backtrack: f64,
    /// Trial steps per line search, counting expansions and contractions.
    pub max_backtracks: usize,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        Self { memory: 10, armijo: 1e-4, wolfe: 0.9, backtrack: 0.5, max_backtracks: 50 }
    }
}

/// L-BFGS session on a function `φ` given as a value-and-gradient closure.
///
/// The first call to [`LbfgsSession::step`] returns the start point and its
/// gradient; every later call takes one quasi-Newton step. The gradient is
/// always evaluated directly at the emitted point.
pub struct LbfgsSession<F> {
    eval: F,
    config: LbfgsConfig,
    x: Point,
    fx: f64,
    g: Point,
    memory: VecDeque<(Point, Point, f64)>,
    started: bool,
    steps: usize,
}

impl<F: Fn(&Point) -> (f64, Point)> LbfgsSession<F> {
    pub fn new(eval: F, x0: Point, config: LbfgsConfig) -> Self {
        let n = x0.len();
        Self {
            eval,
            config,
            x: x0,
            fx: f64::NAN,
            g: Point::zeros(n),
            memory: VecDeque::with_capacity(config.memory),
            started: false,
            steps: 0,
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn value(&self) -> f64 {
        self.fx
    }

    /// Two-loop recursion: `−H g` for the current memory.
    fn direction(&self) -> Point {
        let mut q = self.g.clone();
        let mut alphas = Vec::with_capacity(self.memory.len());
        for (s, y, rho) in self.memory.iter().rev() {
            let a = rho * dot(s, &q);
            q.scaled_add(-a, y);
            alphas.push(a);
        }
        let h0 = match self.memory.back() {
            Some((s, y, _)) => dot(s, y) / norm_sq(y),
            None => 1.0 / f64::max(1.0, norm(&self.g)),
        };
        q *= h0;
        for ((s, y, rho), a) in self.memory.iter().zip(alphas.into_iter().rev()) {
            let b = rho * dot(y, &q);
            q.scaled_add(a - b, s);
        }
        -q
    }

    pub fn step(&mut self) -> Result<(Point, Point), String> {
        if !self.started {
            self.started = true;
            let (fx, g) = (self.eval)(&self.x);
            self.fx = fx;
            self.g = g;
            return Ok((self.x.clone(), self.g.clone()));
        }
        if norm_sq(&self.g) == 0.0 {
            return Ok((self.x.clone(), self.g.clone()));
        }
        let mut d = self.direction();
        let mut slope = dot(&self.g, &d);
        if !(slope < 0.0) {
            self.memory.clear();
            d = -&self.g / f64::max(1.0, norm(&self.g));
            slope = dot(&self.g, &d);
        }
        // Values near a minimizer are only known to a few ulps of |φ|, so the
        // sufficient-decrease test is allowed that much slack.
        let noise = 8.0 * f64::EPSILON * self.fx.abs();
        let eval_at = |t: f64| {
            let x = &self.x + &(&d * t);
            let (f, g) = (self.eval)(&x);
            let dphi = dot(&g, &d);
            (x, f, g, dphi)
        };
        let armijo = |t: f64, f_t: f64| f_t <= self.fx + self.config.armijo * t * slope + noise;
        let curvature = |dphi: f64| dphi >= self.config.wolfe * slope;
        // Minimizer of the quadratic through φ(0), φ'(0) and φ(t).
        let interpolate = |t: f64, f_t: f64| {
            let curv = f_t - self.fx - slope * t;
            if curv > 0.0 {
                -slope * t * t / (2.0 * curv)
            } else {
                f64::INFINITY
            }
        };
        // Weak Wolfe search: [lo, hi] brackets acceptable steps once hi is
        // finite; before that the step doubles.
        let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
        let mut t = 1.0;
        let mut trial = eval_at(t);
        let mut found = false;
        for _ in 0..=self.config.max_backtracks {
            if !armijo(t, trial.1) {
                hi = t;
                t = if lo == 0.0 {
                    interpolate(t, trial.1).clamp(0.1 * t, self.config.backtrack * t)
                } else {
                    0.5 * (lo + hi)
                };
            } else if !curvature(trial.3) {
                lo = t;
                t = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * t };
            } else {
                found = true;
                break;
            }
            trial = eval_at(t);
        }
        if !found {
            // Sufficient decrease alone still makes progress; the pair is
            // dropped below if its curvature is not positive.
            if !armijo(t, trial.1) {
                return Err(format!("line search failed after {} trials", self.config.max_backtracks));
            }
        }
        // One interpolated trial from an accepted step; exact on quadratics.
        let tq = interpolate(t, trial.1);
        if tq.is_finite() && (tq - t).abs() > 1e-3 * t {
            let alt = eval_at(tq);
            if alt.1 < trial.1 && curvature(alt.3) {
                trial = alt;
            }
        }
        let (x_new, f_new, g_new, _) = trial;
        let s = &x_new - &self.x;
        let y = &g_new - &self.g;
        let sy = dot(&s, &y);
        if sy > f64::EPSILON * norm(&s) * norm(&y) {
            if self.memory.len() == self.config.memory {
                self.memory.pop_front();
            }
            self.memory.push_back((s, y, 1.0 / sy));
        }
        self.x = x_new;
        self.fx = f_new;
        self.g = g_new;
        self.steps += 1;
        Ok((self.x.clone(), self.g.clone()))
    }
}

impl<F: Fn(&Point) -> (f64, Point)> FSession for LbfgsSession<F> {
    fn next(&mut self) -> Result<(Point, Point), String> {
        self.step()
    }
}

/// F-procedure for a smooth `f`: L-BFGS on
/// `f(x) + ⟨p, x⟩ + (c/2)‖x − z‖²`.
pub struct SmoothFProcedure<'a, O: ?Sized> {
    pub f: &'a O,
    pub config: LbfgsConfig,
}

impl<'a, O: SmoothObjective + ?Sized> SmoothFProcedure<'a, O> {
    pub fn new(f: &'a O) -> Self {
        Self { f, config: LbfgsConfig::default() }
    }
}

/// Value and gradient of `f(x) + ⟨p, x⟩ + (c/2)‖x − z‖²`.
pub fn augmented_value_grad<O: SmoothObjective + ?Sized>(
    f: &O,
    p: &Point,
    z: &Point,
    c: f64,
    x: &Point,
) -> (f64, Point) {
    let (fv, mut g) = f.value_grad(x);
    let dx = x - z;
    g += p;
    g.scaled_add(c, &dx);
    (fv + dot(p, x) + 0.5 * c * norm_sq(&dx), g)
}

impl<O: SmoothObjective + ?Sized> FProcedure for SmoothFProcedure<'_, O> {
    fn open<'s>(&'s self, p: &Point, z: &Point, c: f64, x_bar: &Point) -> Box<dyn FSession + 's> {
        assert!(c > 0.0, "penalty c must be positive");
        let (p, z, f) = (p.clone(), z.clone(), self.f);
        let eval = move |x: &Point| augmented_value_grad(f, &p, &z, c, x);
        Box::new(LbfgsSession::new(eval, x_bar.clone(), self.config))
    }
}
