//! Batch configuration: a TOML file with one `[[runs]]` table per run.
//!
//! ```toml
//! [[runs]]
//! solver = "admm_inertial"
//! seed = 3
//! problem = { kind = "synthetic_lasso", m = 100, n = 300 }
//! admm = { sigma = 0.99, c = 1.0 }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use irsplit::admm::{AcceptanceRule, AdmmParams};
use irsplit::hpp::{beta_of_rho_bar, rho_bar_of_beta, InertiaRelaxParams};
use irsplit::solvers::FistaConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    AdmmInertial,
    /// `α = 0`, `ρ = 1`.
    AdmmPlain,
    Fista,
}

impl SolverKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverKind::AdmmInertial => "admm_inertial",
            SolverKind::AdmmPlain => "admm_plain",
            SolverKind::Fista => "fista",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    SyntheticLasso {
        m: usize,
        n: usize,
        #[serde(default = "one")]
        density: f64,
        #[serde(default = "default_noise")]
        noise: f64,
        /// Overrides the generated `ν = 0.1‖Aᵀb‖∞`.
        #[serde(default)]
        nu: Option<f64>,
    },
    SyntheticLogistic {
        q: usize,
        n: usize,
    },
    LassoCsv {
        a: PathBuf,
        b: PathBuf,
        nu: f64,
        #[serde(default)]
        skip_header: bool,
    },
    Libsvm {
        path: PathBuf,
        nu: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn default_noise() -> f64 {
    0.01
}

impl ProblemSpec {
    pub fn is_logistic(&self) -> bool {
        matches!(self, ProblemSpec::SyntheticLogistic { .. } | ProblemSpec::Libsvm { .. })
    }

    /// Short label used in tables.
    pub fn label(&self, seed: u64) -> String {
        match self {
            ProblemSpec::SyntheticLasso { m, n, .. } => format!("lasso_{m}x{n}_s{seed}"),
            ProblemSpec::SyntheticLogistic { q, n } => format!("logistic_{q}x{n}_s{seed}"),
            ProblemSpec::LassoCsv { a, .. } => stem(a),
            ProblemSpec::Libsvm { path, .. } => stem(path),
        }
    }

    /// Resolves relative paths against `base`.
    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match self {
            ProblemSpec::LassoCsv { a, b, .. } => {
                fix(a);
                fix(b);
            }
            ProblemSpec::Libsvm { path, .. } => fix(path),
            _ => {}
        }
    }
}

fn stem(p: &Path) -> String {
    p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned())
}

/// ADMM settings. Unset `alpha`, `beta`, `rho_bar` fall back to the
/// published defaults for the problem family; setting only one of `beta`
/// and `rho_bar` derives the other through the coupling `ρ̄ = ψ(β)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdmmSettings {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub rho_bar: Option<f64>,
    pub sigma: f64,
    pub c: f64,
    pub epsilon: f64,
    pub criterion: AcceptanceRule,
    pub max_outer: usize,
    pub inner_budget: usize,
    pub kkt_stride: usize,
}

impl Default for AdmmSettings {
    fn default() -> Self {
        Self {
            alpha: None,
            beta: None,
            rho_bar: None,
            sigma: 0.99,
            c: 1.0,
            epsilon: 1e-6,
            criterion: AcceptanceRule::MaxForm,
            max_outer: 10_000,
            inner_budget: 10_000,
            kkt_stride: 1,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid parameters: {0}")]
    Invalid(String),
}

impl AdmmSettings {
    /// Concrete parameters for `solver` on a problem of the given family.
    pub fn resolve(&self, solver: SolverKind, logistic: bool) -> Result<AdmmParams, ConfigError> {
        let invalid = |e: &dyn std::fmt::Display| ConfigError::Invalid(e.to_string());
        let core = match solver {
            SolverKind::AdmmPlain => InertiaRelaxParams::plain(self.sigma),
            _ => {
                let base = if logistic {
                    InertiaRelaxParams::logistic_defaults()
                } else {
                    InertiaRelaxParams::lasso_defaults()
                };
                let (beta, rho) = match (self.beta, self.rho_bar) {
                    (None, None) => (base.beta, base.rho_hi),
                    (Some(b), None) => (b, rho_bar_of_beta(b).map_err(|e| invalid(&e))?),
                    (None, Some(r)) => (beta_of_rho_bar(r).map_err(|e| invalid(&e))?, r),
                    (Some(b), Some(r)) => (b, r),
                };
                let alpha = self.alpha.unwrap_or(if self.beta.is_none() && self.rho_bar.is_none() {
                    base.alpha
                } else {
                    // keep the published α/β proportion
                    beta * base.alpha / base.beta
                });
                InertiaRelaxParams::new(alpha, beta, self.sigma, rho, rho, 1.0)
            }
        };
        let params = AdmmParams {
            c: self.c,
            core,
            criterion: self.criterion,
            epsilon: self.epsilon,
            inner_budget: self.inner_budget,
            max_outer: self.max_outer,
            kkt_stride: self.kkt_stride,
        };
        params.validate().map_err(|e| invalid(&e))?;
        Ok(params)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FistaSettings {
    pub l0: f64,
    pub eta: f64,
    pub epsilon: f64,
    pub max_iters: usize,
}

impl Default for FistaSettings {
    fn default() -> Self {
        let d = FistaConfig::default();
        Self { l0: d.l0, eta: d.eta, epsilon: d.epsilon, max_iters: d.max_iters }
    }
}

impl FistaSettings {
    pub fn resolve(&self) -> Result<FistaConfig, ConfigError> {
        if !(self.l0 > 0.0) || !(self.eta > 1.0) || !(self.epsilon > 0.0) {
            return Err(ConfigError::Invalid("FISTA needs L0 > 0, η > 1, ε > 0".into()));
        }
        Ok(FistaConfig { l0: self.l0, eta: self.eta, epsilon: self.epsilon, max_iters: self.max_iters })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub solver: SolverKind,
    #[serde(default)]
    pub admm: AdmmSettings,
    #[serde(default)]
    pub fista: FistaSettings,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one_rep")]
    pub repetitions: usize,
}

fn one_rep() -> usize {
    1
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchConfig {
    #[serde(default)]
    pub runs: Vec<RunConfig>,
}

/// Command-line overrides applied to every run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub rho_bar: Option<f64>,
    pub sigma: Option<f64>,
    pub c: Option<f64>,
    pub epsilon: Option<f64>,
}

impl BatchConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    /// Reads a config file; relative data paths are taken relative to it.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_owned(), source })?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for run in &mut cfg.runs {
            run.problem.rebase(base);
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        for run in &mut self.runs {
            let a = &mut run.admm;
            a.alpha = o.alpha.or(a.alpha);
            a.beta = o.beta.or(a.beta);
            a.rho_bar = o.rho_bar.or(a.rho_bar);
            a.sigma = o.sigma.unwrap_or(a.sigma);
            a.c = o.c.unwrap_or(a.c);
            if let Some(eps) = o.epsilon {
                a.epsilon = eps;
                run.fista.epsilon = eps;
            }
        }
    }

    /// Checks every run's parameters without executing anything.
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (i, run) in self.runs.iter().enumerate() {
            let ctx = |e: ConfigError| ConfigError::Invalid(format!("run {}: {e}", i + 1));
            match run.solver {
                SolverKind::Fista => run.fista.resolve().map(|_| ()).map_err(ctx)?,
                s => run.admm.resolve(s, run.problem.is_logistic()).map(|_| ()).map_err(ctx)?,
            }
            if run.repetitions == 0 {
                return Err(ConfigError::Invalid(format!("run {}: repetitions must be at least 1", i + 1)));
            }
        }
        Ok(())
    }
}
