//! Small dense linear solves used by reference oracles and solution polishing.

use nalgebra::{DMatrix, DVector};
use ndarray::Array2;

use crate::point::Point;

/// Solves `a x = b` by LU with partial pivoting; `None` if `a` is singular.
pub fn solve(a: &Array2<f64>, b: &Point) -> Option<Point> {
    let (n, m) = a.dim();
    assert_eq!(n, m, "square system expected");
    assert_eq!(b.len(), n);
    let mat = DMatrix::from_fn(n, n, |i, j| a[[i, j]]);
    let rhs = DVector::from_iterator(n, b.iter().cloned());
    let x = mat.lu().solve(&rhs)?;
    Some(x.iter().cloned().collect())
}

/// Solves `a x = b` for symmetric positive definite `a` by Cholesky.
pub fn solve_spd(a: &Array2<f64>, b: &Point) -> Option<Point> {
    let (n, m) = a.dim();
    assert_eq!(n, m, "square system expected");
    let mat = DMatrix::from_fn(n, n, |i, j| a[[i, j]]);
    let rhs = DVector::from_iterator(n, b.iter().cloned());
    let chol = mat.cholesky()?;
    Some(chol.solve(&rhs).iter().cloned().collect())
}
