//! Executing configured runs.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use irsplit::admm::{run_admm, AdmmError, PrimalDualTriple, SplitProblem};
use irsplit::problems::{load_dense_csv, load_libsvm, synthetic_lasso, synthetic_logistic, LassoProblem, LogisticProblem};
use irsplit::solvers::{fista_solve, FistaError};
use irsplit::{Point, RunRecord, RunStatus};

use crate::config::{ProblemSpec, RunConfig, SolverKind};

/// One line of the results table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub problem: String,
    pub solver: SolverKind,
    pub seed: u64,
    pub outer: usize,
    pub inner: usize,
    pub seconds: f64,
    pub kkt: Option<f64>,
    pub objective: Option<f64>,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunRow {
    fn from_record(problem: String, solver: SolverKind, seed: u64, r: &RunRecord) -> Self {
        let finite = |v: f64| v.is_finite().then_some(v);
        Self {
            problem,
            solver,
            seed,
            outer: r.outer_iters,
            inner: r.inner_iters_total,
            seconds: r.wall_seconds,
            kkt: finite(r.final_kkt),
            objective: finite(r.final_objective),
            status: r.status,
            error: None,
        }
    }

    fn failed(problem: String, solver: SolverKind, seed: u64, msg: String) -> Self {
        Self {
            problem,
            solver,
            seed,
            outer: 0,
            inner: 0,
            seconds: 0.0,
            kkt: None,
            objective: None,
            status: RunStatus::Error,
            error: Some(msg),
        }
    }

    pub fn converged(&self) -> bool {
        self.status == RunStatus::Converged
    }
}

pub enum BuiltProblem {
    Lasso(LassoProblem),
    Logistic(LogisticProblem),
}

impl BuiltProblem {
    pub fn dim(&self) -> usize {
        match self {
            BuiltProblem::Lasso(p) => p.n(),
            BuiltProblem::Logistic(p) => p.n(),
        }
    }
}

pub fn build_problem(spec: &ProblemSpec, seed: u64) -> anyhow::Result<BuiltProblem> {
    Ok(match spec {
        ProblemSpec::SyntheticLasso { m, n, density, noise, nu } => {
            anyhow::ensure!(*m >= 1 && *n >= 1, "synthetic_lasso needs m, n ≥ 1");
            anyhow::ensure!(*density > 0.0 && *density <= 1.0, "density must lie in (0, 1]");
            let mut p = synthetic_lasso(*m, *n, *density, *noise, seed).problem;
            if let Some(nu) = nu {
                anyhow::ensure!(*nu > 0.0, "ν must be positive");
                p.nu = *nu;
            }
            BuiltProblem::Lasso(p)
        }
        ProblemSpec::SyntheticLogistic { q, n } => {
            anyhow::ensure!(*q >= 2 && *n >= 2, "synthetic_logistic needs q ≥ 2, n ≥ 2");
            BuiltProblem::Logistic(synthetic_logistic(*q, *n, seed).problem)
        }
        ProblemSpec::LassoCsv { a, b, nu, skip_header } => BuiltProblem::Lasso(load_dense_csv(a, b, *nu, *skip_header)?),
        ProblemSpec::Libsvm { path, nu } => BuiltProblem::Logistic(load_libsvm(path, *nu)?),
    })
}

fn admm_on<P: SplitProblem>(p: &P, cfg: &RunConfig, logistic: bool) -> anyhow::Result<(Point, RunRecord)> {
    let params = cfg.admm.resolve(cfg.solver, logistic)?;
    match run_admm(p, &params, PrimalDualTriple::zeros(p.dim())) {
        Ok(run) => Ok((run.x, run.record)),
        Err(AdmmError::InnerBudgetExceeded(run) | AdmmError::OuterBudgetExceeded(run)) => Ok((run.x, run.record)),
        Err(e) => Err(e.into()),
    }
}

fn fista_on<P: irsplit::solvers::CompositeObjective>(p: &P, cfg: &RunConfig) -> anyhow::Result<(Point, RunRecord)> {
    let fc = cfg.fista.resolve()?;
    match fista_solve(p, Point::zeros(p.dim()), &fc) {
        Ok(run) => Ok((run.x, run.record)),
        Err(FistaError::BudgetExceeded(run)) => Ok((run.x, run.record)),
        Err(e) => Err(e.into()),
    }
}

/// Runs the configured solver once on an already built problem.
pub fn execute(problem: &BuiltProblem, cfg: &RunConfig) -> anyhow::Result<(Point, RunRecord)> {
    match (problem, cfg.solver) {
        (BuiltProblem::Lasso(p), SolverKind::Fista) => fista_on(p, cfg),
        (BuiltProblem::Logistic(p), SolverKind::Fista) => fista_on(p, cfg),
        (BuiltProblem::Lasso(p), _) => admm_on(p, cfg, false),
        (BuiltProblem::Logistic(p), _) => admm_on(p, cfg, true),
    }
}

/// Builds the problem and runs it `repetitions` times, after one discarded
/// warm-up when `repetitions > 1`. Counts come from the last run; the
/// reported time is the mean over the timed runs. Loading time is excluded.
pub fn run_one(cfg: &RunConfig) -> RunRow {
    let label = cfg.problem.label(cfg.seed);
    let problem = match build_problem(&cfg.problem, cfg.seed) {
        Ok(p) => p,
        Err(e) => return RunRow::failed(label, cfg.solver, cfg.seed, format!("{e:#}")),
    };
    let reps = cfg.repetitions.max(1);
    if reps > 1 {
        if let Err(e) = execute(&problem, cfg) {
            return RunRow::failed(label, cfg.solver, cfg.seed, format!("{e:#}"));
        }
    }
    let mut total = 0.0;
    let mut last = None;
    for _ in 0..reps {
        let t = Instant::now();
        match execute(&problem, cfg) {
            Ok((_, rec)) => {
                total += t.elapsed().as_secs_f64();
                last = Some(rec);
            }
            Err(e) => return RunRow::failed(label, cfg.solver, cfg.seed, format!("{e:#}")),
        }
    }
    let mut rec = last.expect("at least one repetition");
    rec.wall_seconds = total / reps as f64;
    RunRow::from_record(label, cfg.solver, cfg.seed, &rec)
}

/// Runs every config, at most `jobs` at a time, and returns rows in input
/// order. Failures are reported per row and never abort the batch.
pub fn run_benchmark(configs: &[RunConfig], jobs: usize) -> Vec<RunRow> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().expect("thread pool");
    pool.install(|| configs.par_iter().map(run_one).collect())
}
