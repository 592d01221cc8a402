//! Iterative subproblem solvers and the FISTA baseline.

pub mod cg;
pub mod fista;
pub mod lbfgs;
pub mod prox;

pub use cg::{make_quadratic_fprocedure, CgSession, QuadraticFProcedure};
pub use fista::{fista_solve, CompositeObjective, FistaConfig, FistaError, FistaRun};
pub use lbfgs::{LbfgsConfig, LbfgsSession, SmoothFProcedure, SmoothObjective};
pub use prox::soft_threshold;
