//! Reference operators with known resolvents, used to exercise the HPP engine.

use ndarray::{Array2, Axis};

use super::{criterion_sides, InexactResolventOracle, OracleOutput, ProxCertificate};
use crate::dense;
use crate::point::{norm_sq, Point};

/// `T(z) = μ z` with `μ > 0`; the resolvent is `w / (1 + λμ)`.
#[derive(Clone, Debug)]
pub struct ScaledIdentityOracle {
    pub mu: f64,
}

impl ScaledIdentityOracle {
    pub fn new(mu: f64) -> Self {
        Self { mu }
    }
}

impl InexactResolventOracle for ScaledIdentityOracle {
    fn resolve(&mut self, w: &Point, lambda: f64, _sigma: f64) -> Result<OracleOutput, String> {
        let z_tilde = w / (1.0 + lambda * self.mu);
        let v = &z_tilde * self.mu;
        Ok(OracleOutput::Certificate(ProxCertificate { z_tilde, v, lambda }))
    }
}

/// `T(z) = M z + q` for a matrix with positive semidefinite symmetric part.
///
/// In exact mode the resolvent system `(I + λM) z = w − λq` is solved
/// directly. In inexact mode CG on the normal equations runs from `z = w`
/// and stops at the first iterate whose certificate `(z, Mz + q)` passes the
/// relative error test.
#[derive(Clone, Debug)]
pub struct AffineOracle {
    pub m: Array2<f64>,
    pub q: Point,
    pub inexact: bool,
    pub max_steps: usize,
    last_steps: usize,
}

impl AffineOracle {
    pub fn exact(m: Array2<f64>, q: Point) -> Self {
        Self { m, q, inexact: false, max_steps: 0, last_steps: 0 }
    }

    pub fn inexact(m: Array2<f64>, q: Point, max_steps: usize) -> Self {
        Self { m, q, inexact: true, max_steps, last_steps: 0 }
    }

    pub fn apply(&self, z: &Point) -> Point {
        self.m.dot(z) + &self.q
    }

    fn system(&self, lambda: f64) -> Array2<f64> {
        let n = self.q.len();
        Array2::eye(n) + &(&self.m * lambda)
    }
}

impl InexactResolventOracle for AffineOracle {
    fn resolve(&mut self, w: &Point, lambda: f64, sigma: f64) -> Result<OracleOutput, String> {
        let k = self.system(lambda);
        let rhs = w - &(&self.q * lambda);
        if !self.inexact {
            self.last_steps = 1;
            let z_tilde = dense::solve(&k, &rhs).ok_or("singular resolvent system")?;
            let v = self.apply(&z_tilde);
            return Ok(OracleOutput::Certificate(ProxCertificate { z_tilde, v, lambda }));
        }

        let kt = k.t().to_owned();
        let mut z = w.clone();
        let mut r = &rhs - &k.dot(&z);
        let mut s = kt.dot(&r);
        let mut p = s.clone();
        let mut ss = norm_sq(&s);
        for step in 1..=self.max_steps {
            if ss == 0.0 {
                self.last_steps = step;
                let v = self.apply(&z);
                return Ok(OracleOutput::Certificate(ProxCertificate { z_tilde: z, v, lambda }));
            }
            let kp = k.dot(&p);
            let a = ss / norm_sq(&kp);
            z.scaled_add(a, &p);
            r.scaled_add(-a, &kp);
            let cert = ProxCertificate { z_tilde: z.clone(), v: self.apply(&z), lambda };
            let (lhs, rhs_sides) = criterion_sides(w, &cert);
            if lhs <= sigma * sigma * rhs_sides {
                self.last_steps = step;
                return Ok(OracleOutput::Certificate(cert));
            }
            s = kt.dot(&r);
            let ss_new = norm_sq(&s);
            p = &s + &(&p * (ss_new / ss));
            ss = ss_new;
        }
        self.last_steps = self.max_steps;
        Err(format!("no acceptable certificate within {} steps", self.max_steps))
    }

    fn last_inner_steps(&self) -> usize {
        self.last_steps
    }
}

/// True if `M + Mᵀ` has no negative diagonal pivot in a Cholesky attempt
/// after a tiny shift, i.e. `T(z) = Mz + q` is monotone.
pub fn is_monotone(m: &Array2<f64>) -> bool {
    let sym = m + &m.t();
    let n = sym.len_of(Axis(0));
    let shifted = sym + Array2::<f64>::eye(n) * 1e-12;
    dense::solve_spd(&shifted, &Point::zeros(n)).is_some()
}
