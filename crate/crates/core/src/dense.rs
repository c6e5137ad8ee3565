//! Dense column-major matrices and the small direct kernels built on them:
//! LU with partial pivoting, triangular solves, products, norms.
//!
//! These back the compressed Schur-complement objects (Krylov bases,
//! Hessenberg and triangular forms, Grammians) and the desk-scale exact
//! solves; there is no BLAS/LAPACK delegation.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<S> {
    rows: usize,
    cols: usize,
    /// Column-major storage, `rows * cols` entries.
    values: Vec<S>,
}

impl<S: Scalar> DenseMatrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            values: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, S::one());
        }
        m
    }

    pub fn from_col_major(rows: usize, cols: usize, values: Vec<S>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "dense storage holds {} values for a {rows}x{cols} matrix",
                values.len()
            )));
        }
        Ok(DenseMatrix { rows, cols, values })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut m = Self::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Assemble from column vectors, which must share one length.
    pub fn from_cols(cols: &[Vec<S>]) -> Self {
        let rows = cols.first().map_or(0, |c| c.len());
        let mut m = Self::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            m.set_col(j, col);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> S {
        debug_assert!(i < self.rows && j < self.cols);
        self.values[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: S) {
        debug_assert!(i < self.rows && j < self.cols);
        self.values[j * self.rows + i] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[S] {
        &self.values[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [S] {
        &mut self.values[j * self.rows..(j + 1) * self.rows]
    }

    pub fn set_col(&mut self, j: usize, v: &[S]) {
        self.col_mut(j).copy_from_slice(v);
    }

    /// Keep the leading `rows x cols` block.
    pub fn submatrix(&self, rows: usize, cols: usize) -> Self {
        assert!(rows <= self.rows && cols <= self.cols);
        Self::from_fn(rows, cols, |i, j| self.get(i, j))
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[S]) -> Result<Vec<S>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "matvec: {} columns vs vector length {}",
                self.cols,
                x.len()
            )));
        }
        let mut y = vec![S::zero(); self.rows];
        for (j, &xj) in x.iter().enumerate() {
            let col = self.col(j);
            for (yi, &aij) in y.iter_mut().zip(col) {
                *yi += aij * xj;
            }
        }
        Ok(y)
    }

    /// `y = A^H x` (conjugate transpose).
    pub fn matvec_adj(&self, x: &[S]) -> Result<Vec<S>> {
        if x.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "matvec_adj: {} rows vs vector length {}",
                self.rows,
                x.len()
            )));
        }
        let mut y = vec![S::zero(); self.cols];
        for (j, yj) in y.iter_mut().enumerate() {
            let col = self.col(j);
            *yj = col.iter().zip(x).map(|(&a, &b)| a.conj() * b).sum();
        }
        Ok(y)
    }

    pub fn matmul(&self, other: &DenseMatrix<S>) -> Result<DenseMatrix<S>> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "matmul: {}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let bcol = other.col(j);
            let ocol = out.col_mut(j);
            for (k, &bkj) in bcol.iter().enumerate() {
                let acol = self.col(k);
                for (oi, &aik) in ocol.iter_mut().zip(acol) {
                    *oi += aik * bkj;
                }
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> DenseMatrix<S> {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn add(&self, other: &DenseMatrix<S>) -> Result<DenseMatrix<S>> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch("dense add".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a + b)
            .collect();
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            values,
        })
    }

    pub fn sub(&self, other: &DenseMatrix<S>) -> Result<DenseMatrix<S>> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch("dense sub".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a - b)
            .collect();
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            values,
        })
    }

    pub fn scale(&self, alpha: S) -> DenseMatrix<S> {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().map(|&v| alpha * v).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values
            .iter()
            .map(|&v| v.abs() * v.abs())
            .sum::<f64>()
            .sqrt()
    }

    pub fn to_complex(&self) -> DenseMatrix<Complex64> {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().map(|&v| v.to_complex()).collect(),
        }
    }

    /// Solve `U x = b` with `U` the upper triangle of this square matrix.
    pub fn solve_upper_triangular(&self, b: &[S]) -> Result<Vec<S>> {
        let n = self.rows;
        if self.cols != n || b.len() != n {
            return Err(Error::DimensionMismatch("triangular solve".into()));
        }
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.get(i, j) * x[j];
            }
            let d = self.get(i, i);
            if d.abs() == 0.0 {
                return Err(Error::Singular(format!("triangular diagonal {i} is zero")));
            }
            x[i] = s / d;
        }
        Ok(x)
    }

    /// LU factorization with partial pivoting.
    pub fn lu(&self) -> Result<DenseLu<S>> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch("lu: matrix not square".into()));
        }
        let n = self.rows;
        let mut lu = self.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            // pivot search in column k
            let mut p = k;
            let mut best = lu.get(k, k).abs();
            for i in k + 1..n {
                let m = lu.get(i, k).abs();
                if m > best {
                    best = m;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(Error::Singular(format!("lu: column {k} has no pivot")));
            }
            if p != k {
                piv.swap(k, p);
                for j in 0..n {
                    let a = lu.get(k, j);
                    let b = lu.get(p, j);
                    lu.set(k, j, b);
                    lu.set(p, j, a);
                }
            }
            let pivot = lu.get(k, k);
            for i in k + 1..n {
                let m = lu.get(i, k) / pivot;
                lu.set(i, k, m);
                if m.abs() != 0.0 {
                    for j in k + 1..n {
                        let v = lu.get(i, j) - m * lu.get(k, j);
                        lu.set(i, j, v);
                    }
                }
            }
        }
        Ok(DenseLu { lu, piv })
    }

    /// Dense inverse through LU; intended for small validation problems.
    pub fn inverse(&self) -> Result<DenseMatrix<S>> {
        let n = self.rows;
        let f = self.lu()?;
        let mut inv = DenseMatrix::zeros(n, n);
        let mut e = vec![S::zero(); n];
        for j in 0..n {
            e[j] = S::one();
            let x = f.solve(&e)?;
            inv.set_col(j, &x);
            e[j] = S::zero();
        }
        Ok(inv)
    }
}

/// LU factors with the pivot permutation applied on the left.
#[derive(Debug, Clone)]
pub struct DenseLu<S> {
    lu: DenseMatrix<S>,
    piv: Vec<usize>,
}

impl<S: Scalar> DenseLu<S> {
    pub fn solve(&self, b: &[S]) -> Result<Vec<S>> {
        let n = self.lu.rows();
        if b.len() != n {
            return Err(Error::DimensionMismatch("lu solve".into()));
        }
        let mut x: Vec<S> = self.piv.iter().map(|&p| b[p]).collect();
        // forward: L has unit diagonal
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu.get(i, j) * x[j];
            }
            x[i] = s;
        }
        // backward
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu.get(i, j) * x[j];
            }
            x[i] = s / self.lu.get(i, i);
        }
        Ok(x)
    }
}
