//! Relative-error inertial-relaxed splitting: a hybrid proximal projection
//! engine, the partially inexact Douglas-Rachford method built on it, and the
//! ADMM built on that, with LASSO and logistic regression front ends.

pub mod admm;
pub mod dense;
pub mod dr;
pub mod hpp;
pub mod point;
pub mod problems;
pub mod record;
pub mod solvers;

pub use point::Point;
pub use record::{RunRecord, RunStatus};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/parameters.md")]
    mod parameters {}
    #[doc = include_str!("../../../book/src/hpp.md")]
    mod hpp {}
    #[doc = include_str!("../../../book/src/dr.md")]
    mod dr {}
    #[doc = include_str!("../../../book/src/admm.md")]
    mod admm {}
    #[doc = include_str!("../../../book/src/solvers.md")]
    mod solvers {}
    #[doc = include_str!("../../../book/src/problems.md")]
    mod problems {}
}
