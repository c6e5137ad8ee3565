//! Operator abstractions shared by the Krylov solvers and the Arnoldi
//! machinery.

use crate::error::Result;
use crate::scalar::Scalar;
use crate::sparse::CsrMatrix;

/// A linear operator `x -> A x` on vectors of a fixed dimension.
pub trait LinearOp<S: Scalar> {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[S]) -> Result<Vec<S>>;
}

impl<S: Scalar> LinearOp<S> for CsrMatrix<S> {
    fn dim(&self) -> usize {
        self.n_rows()
    }
    fn apply(&self, x: &[S]) -> Result<Vec<S>> {
        self.spmv(x)
    }
}

impl<S: Scalar> LinearOp<S> for crate::dense::DenseMatrix<S> {
    fn dim(&self) -> usize {
        self.rows()
    }
    fn apply(&self, x: &[S]) -> Result<Vec<S>> {
        self.matvec(x)
    }
}

/// An operator wrapped around a closure.
pub struct FnOp<S, F>
where
    F: Fn(&[S]) -> Result<Vec<S>>,
{
    dim: usize,
    f: F,
    _marker: std::marker::PhantomData<S>,
}

impl<S: Scalar, F: Fn(&[S]) -> Result<Vec<S>>> FnOp<S, F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnOp {
            dim,
            f,
            _marker: std::marker::PhantomData,
        }
    }
}

impl<S: Scalar, F: Fn(&[S]) -> Result<Vec<S>>> LinearOp<S> for FnOp<S, F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, x: &[S]) -> Result<Vec<S>> {
        (self.f)(x)
    }
}

/// A preconditioner application `r -> M^{-1} r`. Implementations may vary
/// between calls (flexible preconditioning).
pub trait Preconditioner<S: Scalar> {
    fn apply(&self, r: &[S]) -> Result<Vec<S>>;
}

pub struct IdentityPrecond;

impl<S: Scalar> Preconditioner<S> for IdentityPrecond {
    fn apply(&self, r: &[S]) -> Result<Vec<S>> {
        Ok(r.to_vec())
    }
}

/// Preconditioner wrapped around a closure.
pub struct FnPrecond<S, F>
where
    F: Fn(&[S]) -> Result<Vec<S>>,
{
    f: F,
    _marker: std::marker::PhantomData<S>,
}

impl<S: Scalar, F: Fn(&[S]) -> Result<Vec<S>>> FnPrecond<S, F> {
    pub fn new(f: F) -> Self {
        FnPrecond {
            f,
            _marker: std::marker::PhantomData,
        }
    }
}

impl<S: Scalar, F: Fn(&[S]) -> Result<Vec<S>>> Preconditioner<S> for FnPrecond<S, F> {
    fn apply(&self, r: &[S]) -> Result<Vec<S>> {
        (self.f)(r)
    }
}
