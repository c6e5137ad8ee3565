//! Serial vector kernels shared by every solver.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn check_len<S: Scalar>(x: &[S], y: &[S], what: &str) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "{what}: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    Ok(())
}

/// Inner product `conj(x)^T y`. The first argument is conjugated.
pub fn dot<S: Scalar>(x: &[S], y: &[S]) -> Result<S> {
    check_len(x, y, "dot")?;
    Ok(dot_uc(x, y))
}

pub(crate) fn dot_uc<S: Scalar>(x: &[S], y: &[S]) -> S {
    x.iter().zip(y).map(|(&a, &b)| a.conj() * b).sum()
}

/// `alpha * x + y`, elementwise.
pub fn axpy<S: Scalar>(alpha: S, x: &[S], y: &[S]) -> Result<Vec<S>> {
    check_len(x, y, "axpy")?;
    Ok(x.iter().zip(y).map(|(&a, &b)| alpha * a + b).collect())
}

pub(crate) fn axpy_in_place<S: Scalar>(alpha: S, x: &[S], y: &mut [S]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Euclidean norm, always a real number.
pub fn norm2<S: Scalar>(x: &[S]) -> f64 {
    x.iter().map(|&a| a.abs() * a.abs()).sum::<f64>().sqrt()
}

pub(crate) fn scale_in_place<S: Scalar>(alpha: S, x: &mut [S]) {
    for xi in x.iter_mut() {
        *xi *= alpha;
    }
}

pub(crate) fn sub<S: Scalar>(x: &[S], y: &[S]) -> Vec<S> {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(&a, &b)| a - b).collect()
}
