use serde::{Deserialize, Serialize};

/// How a run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    BudgetExceeded,
    Error,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::BudgetExceeded => "budget_exceeded",
            RunStatus::Error => "error",
        }
    }
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-run metrics reported by every solver in the crate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub outer_iters: usize,
    /// Cumulative count of subproblem steps (CG / L-BFGS iterations, or
    /// backtracking trials for FISTA).
    pub inner_iters_total: usize,
    pub wall_seconds: f64,
    pub final_kkt: f64,
    pub final_objective: f64,
    pub status: RunStatus,
}

impl RunRecord {
    pub fn converged(&self) -> bool {
        self.status == RunStatus::Converged
    }
}
