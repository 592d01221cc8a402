//! Benchmark harness: batch configuration, parallel execution, summary
//! tables and CSV/JSON output for the `irsplit` solvers.

pub mod config;
pub mod emit;
pub mod run;
pub mod summary;

pub use config::{BatchConfig, Overrides, RunConfig, SolverKind};
pub use run::{run_benchmark, run_one, RunRow};
pub use summary::{geometric_mean, summarize, Summary};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/benchmarks.md")]
mod book_benchmarks {}
