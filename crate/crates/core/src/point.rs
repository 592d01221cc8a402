//! The iterate type shared by every layer, plus the handful of vector
//! helpers the algorithms need.

use ndarray::Array1;

/// A point of `R^n`.
pub type Point = Array1<f64>;

#[inline]
pub fn dot(a: &Point, b: &Point) -> f64 {
    a.dot(b)
}

#[inline]
pub fn norm_sq(a: &Point) -> f64 {
    a.dot(a)
}

#[inline]
pub fn norm(a: &Point) -> f64 {
    norm_sq(a).sqrt()
}

/// `‖a − b‖²` without allocating.
pub fn dist_sq(a: &Point, b: &Point) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn norm_inf(a: &Point) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn all_finite(a: &Point) -> bool {
    a.iter().all(|v| v.is_finite())
}

/// Returns `Err((left, right))` when the lengths differ.
pub fn same_dim(a: &Point, b: &Point) -> Result<(), (usize, usize)> {
    if a.len() == b.len() {
        Ok(())
    } else {
        Err((a.len(), b.len()))
    }
}

/// Smallest absolute floor used by the inner-loop acceptance tests so that a
/// residual at the level of floating-point cancellation counts as zero.
///
/// `scale` is a squared magnitude of the quantities being compared.
#[inline]
pub(crate) fn roundoff_floor(scale: f64) -> f64 {
    const EPS_SQ: f64 = (64.0 * f64::EPSILON) * (64.0 * f64::EPSILON);
    EPS_SQ * scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn helpers() {
        let a = array![3.0, -4.0];
        let b = array![0.0, 0.0];
        assert_eq!(norm(&a), 5.0);
        assert_eq!(dist_sq(&a, &b), 25.0);
        assert_eq!(norm_inf(&a), 4.0);
        assert!(same_dim(&a, &b).is_ok());
        assert_eq!(same_dim(&a, &array![1.0]), Err((2, 1)));
        assert!(!all_finite(&array![1.0, f64::NAN]));
    }
}
