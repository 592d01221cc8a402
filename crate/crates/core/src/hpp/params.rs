//! Parameter algebra coupling the inertial cap and the relaxation cap.
//!
//! The admissible relaxation bound is a decreasing function of the inertial
//! bound `β`:
//!
//! ```text
//! ψ(β) = 2(β − 1)² / (2(β − 1)² + 3β − 1),     β ∈ (0, 1)  →  (0, 2)
//! φ(ρ) = 2(2 − ρ) / (4 − ρ + √(16ρ − 7ρ²)),    ρ ∈ (0, 2)  →  (0, 1)
//! ```
//!
//! `φ` and `ψ` are mutually inverse. `φ(ρ̄)` is also the smallest positive
//! root of the quadratic [`q_eval`], which is what makes every `α < β`
//! admissible.

use thiserror::Error;

/// Slack allowed on `ρ̄ ≤ ψ(β)`.
///
/// Published parameter pairs quote `ρ̄` to four decimals, so a value rounded
/// up in the last place (e.g. `β = 0.1001`, `ρ̄ = 1.7606` while
/// `ψ(0.1001) = 1.760593…`) must still validate.
pub const RHO_BOUND_SLACK: f64 = 5e-5;

#[derive(Clone, Copy, Debug, PartialEq, Error)]
#[error("{what} = {value} is outside {domain}")]
pub struct DomainError {
    pub what: &'static str,
    pub value: f64,
    pub domain: &'static str,
}

/// One variant per violated parameter invariant.
#[derive(Clone, Copy, Debug, PartialEq, Error)]
pub enum ParamError {
    #[error("non-finite parameter `{0}`")]
    NonFinite(&'static str),
    #[error("0 ≤ α violated (α = {0})")]
    AlphaNegative(f64),
    #[error("α < β violated (α = {alpha}, β = {beta})")]
    AlphaNotBelowBeta { alpha: f64, beta: f64 },
    #[error("β < 1 violated (β = {0})")]
    BetaNotBelowOne(f64),
    #[error("0 ≤ σ < 1 violated (σ = {0})")]
    SigmaOutOfRange(f64),
    #[error("0 < ρ̲ violated (ρ̲ = {0})")]
    RhoLoNotPositive(f64),
    #[error("ρ̲ ≤ ρ̄ violated (ρ̲ = {rho_lo}, ρ̄ = {rho_hi})")]
    RhoOrder { rho_lo: f64, rho_hi: f64 },
    #[error("ρ̄ ≤ ψ(β) violated (ρ̄ = {rho_hi}, ψ(β) = {bound})")]
    RhoAboveCoupling { rho_hi: f64, bound: f64 },
    #[error("λ > 0 violated (λ = {0})")]
    LambdaNotPositive(f64),
}

/// `ψ(β)`: the largest relaxation factor admissible with inertial bound `β`.
pub fn rho_bar_of_beta(beta: f64) -> Result<f64, DomainError> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(DomainError { what: "β", value: beta, domain: "(0, 1)" });
    }
    let sq = 2.0 * (beta - 1.0) * (beta - 1.0);
    Ok(sq / (sq + 3.0 * beta - 1.0))
}

/// `φ(ρ̄)`: the inertial bound matching relaxation cap `ρ̄`.
pub fn beta_of_rho_bar(rho_bar: f64) -> Result<f64, DomainError> {
    if !(rho_bar > 0.0 && rho_bar < 2.0) {
        return Err(DomainError { what: "ρ̄", value: rho_bar, domain: "(0, 2)" });
    }
    let disc = 16.0 * rho_bar - 7.0 * rho_bar * rho_bar;
    Ok(2.0 * (2.0 - rho_bar) / (4.0 - rho_bar + disc.sqrt()))
}

/// `q(ν) = 2(ρ̄⁻¹ − 1)ν² − (4ρ̄⁻¹ − 1)ν + 2ρ̄⁻¹ − 1`.
pub fn q_eval(nu: f64, rho_bar: f64) -> Result<f64, DomainError> {
    if !(rho_bar > 0.0 && rho_bar < 2.0) {
        return Err(DomainError { what: "ρ̄", value: rho_bar, domain: "(0, 2)" });
    }
    let inv = 1.0 / rho_bar;
    Ok(2.0 * (inv - 1.0) * nu * nu - (4.0 * inv - 1.0) * nu + 2.0 * inv - 1.0)
}

/// Coefficients `(a, b, c)` of `q(ν) = aν² − bν + c` for a given `ρ̄`.
pub fn q_coefficients(rho_bar: f64) -> (f64, f64, f64) {
    let inv = 1.0 / rho_bar;
    (2.0 * (inv - 1.0), 4.0 * inv - 1.0, 2.0 * inv - 1.0)
}

/// Root `2c / (b + √(b² − 4ac))` of `aν² − bν + c`.
///
/// For `a = 0` this is the root of the affine function, for `a > 0` the
/// smaller root and for `a < 0` the larger one. In every case `q` decreases
/// on `[0, root]`. The rationalized form never divides by `a`.
pub fn smallest_positive_root(a: f64, b: f64, c: f64) -> Result<f64, DomainError> {
    if !(b > 0.0) {
        return Err(DomainError { what: "b", value: b, domain: "(0, ∞)" });
    }
    if !(c > 0.0) {
        return Err(DomainError { what: "c", value: c, domain: "(0, ∞)" });
    }
    let disc = b * b - 4.0 * a * c;
    if !(disc > 0.0) {
        return Err(DomainError { what: "b² − 4ac", value: disc, domain: "(0, ∞)" });
    }
    Ok(2.0 * c / (b + disc.sqrt()))
}

/// Inertia, relaxation and error-tolerance settings shared by the HPP,
/// Douglas-Rachford and ADMM layers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InertiaRelaxParams {
    /// Cap on the per-step inertial weights `α_k`.
    pub alpha: f64,
    /// Coupling parameter; must dominate `alpha` and fixes the cap `ψ(β)`.
    pub beta: f64,
    /// Relative error tolerance for the inexact subproblems.
    pub sigma: f64,
    pub rho_lo: f64,
    pub rho_hi: f64,
    /// Constant proximal stepsize.
    pub lambda: f64,
}

impl InertiaRelaxParams {
    pub fn new(alpha: f64, beta: f64, sigma: f64, rho_lo: f64, rho_hi: f64, lambda: f64) -> Self {
        Self { alpha, beta, sigma, rho_lo, rho_hi, lambda }
    }

    /// `ρ̲ = ρ̄ = ψ(β)` and `λ = 1`.
    pub fn coupled(alpha: f64, beta: f64, sigma: f64) -> Result<Self, DomainError> {
        let rho = rho_bar_of_beta(beta)?;
        Ok(Self::new(alpha, beta, sigma, rho, rho, 1.0))
    }

    /// No inertia and no relaxation: `α = 0`, `ρ = 1`.
    pub fn plain(sigma: f64) -> Self {
        Self::new(0.0, 1.0 / 3.0, sigma, 1.0, 1.0, 1.0)
    }

    /// Settings used for the LASSO experiments:
    /// `α = 0.18966`, `β = 0.18976`, `ρ̄ = 1.4882`, `σ = 0.99`.
    pub fn lasso_defaults() -> Self {
        Self::new(0.18966, 0.18976, 0.99, 1.4882, 1.4882, 1.0)
    }

    /// Settings used for the logistic regression experiments:
    /// `α = 0.1`, `β = 0.1001`, `ρ̄ = 1.7606`, `σ = 0.99`.
    pub fn logistic_defaults() -> Self {
        Self::new(0.1, 0.1001, 0.99, 1.7606, 1.7606, 1.0)
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("sigma", self.sigma),
            ("rho_lo", self.rho_lo),
            ("rho_hi", self.rho_hi),
            ("lambda", self.lambda),
        ] {
            if !v.is_finite() {
                return Err(ParamError::NonFinite(name));
            }
        }
        if self.alpha < 0.0 {
            return Err(ParamError::AlphaNegative(self.alpha));
        }
        if self.alpha >= self.beta {
            return Err(ParamError::AlphaNotBelowBeta { alpha: self.alpha, beta: self.beta });
        }
        if self.beta >= 1.0 {
            return Err(ParamError::BetaNotBelowOne(self.beta));
        }
        if !(0.0..1.0).contains(&self.sigma) {
            return Err(ParamError::SigmaOutOfRange(self.sigma));
        }
        if self.rho_lo <= 0.0 {
            return Err(ParamError::RhoLoNotPositive(self.rho_lo));
        }
        if self.rho_lo > self.rho_hi {
            return Err(ParamError::RhoOrder { rho_lo: self.rho_lo, rho_hi: self.rho_hi });
        }
        // β > α ≥ 0 and β < 1 here, so ψ(β) is defined.
        let bound = rho_bar_of_beta(self.beta).expect("β checked above");
        if self.rho_hi > bound + RHO_BOUND_SLACK {
            return Err(ParamError::RhoAboveCoupling { rho_hi: self.rho_hi, bound });
        }
        if self.lambda <= 0.0 {
            return Err(ParamError::LambdaNotPositive(self.lambda));
        }
        Ok(())
    }
}
