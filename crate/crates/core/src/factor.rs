//! Incomplete LU factorization with dual dropping (ILUT) and the
//! block-Jacobi wrapper built on it.
//!
//! Elimination is row-wise in the given order with no pivoting; a zero
//! pivot is a hard error and the complex diagonal shift is the documented
//! remedy for indefinite problems. The drop rule compares entry magnitudes
//! against `tau` times the 2-norm of the original row; `lfil` caps the
//! strictly off-diagonal entries kept per row in each factor (the diagonal
//! is always kept).

use crate::error::{Error, Result};
use crate::reorder;
use crate::scalar::Scalar;
use crate::sparse::CsrMatrix;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Unit-lower / upper triangular ILUT factors.
#[derive(Debug, Clone)]
pub struct IlutFactors<S> {
    /// Strictly lower triangle; the unit diagonal is implicit.
    lower: CsrMatrix<S>,
    /// Upper triangle including the diagonal.
    upper: CsrMatrix<S>,
    pub tau: f64,
    pub lfil: usize,
    /// Diagonal shift that was added before elimination.
    pub shift: S,
}

impl<S: Scalar> IlutFactors<S> {
    pub fn n(&self) -> usize {
        self.lower.n_rows()
    }

    pub fn nnz(&self) -> usize {
        self.lower.nnz() + self.upper.nnz()
    }

    pub fn lower(&self) -> &CsrMatrix<S> {
        &self.lower
    }

    pub fn upper(&self) -> &CsrMatrix<S> {
        &self.upper
    }

    /// Ratio of the largest to smallest upper-diagonal magnitude; a cheap
    /// conditioning probe for the factorization.
    pub fn kappa_proxy(&self) -> f64 {
        let mut min = f64::INFINITY;
        let mut max = 0.0f64;
        for i in 0..self.n() {
            let d = self.upper.get(i, i).abs();
            min = min.min(d);
            max = max.max(d);
        }
        if self.n() == 0 {
            1.0
        } else {
            max / min
        }
    }

    /// Explicit product `L * U` as a dense matrix, for accuracy checks on
    /// small problems.
    pub fn product_dense(&self) -> crate::dense::DenseMatrix<S> {
        let n = self.n();
        let mut l = self.lower.to_dense();
        for i in 0..n {
            l.set(i, i, S::one());
        }
        let u = self.upper.to_dense();
        l.matmul(&u).expect("square factors")
    }

    pub fn to_complex(&self) -> IlutFactors<num_complex::Complex64> {
        IlutFactors {
            lower: self.lower.to_complex(),
            upper: self.upper.to_complex(),
            tau: self.tau,
            lfil: self.lfil,
            shift: self.shift.to_complex(),
        }
    }
}

/// ILUT factorization of a square matrix, optionally with a pure-imaginary
/// diagonal shift `i * shift_factor * sum(|a_ii|) / n` added before
/// elimination.
pub fn ilut<S: Scalar>(
    a: &CsrMatrix<S>,
    tau: f64,
    lfil: usize,
    shift_factor: f64,
) -> Result<IlutFactors<S>> {
    if a.n_rows() != a.n_cols() {
        return Err(Error::DimensionMismatch("ilut expects a square matrix".into()));
    }
    if tau < 0.0 {
        return Err(Error::InvalidArgument("tau must be non-negative".into()));
    }
    if lfil == 0 {
        return Err(Error::InvalidArgument("lfil must be at least 1".into()));
    }
    let n = a.n_rows();

    let shift = if shift_factor == 0.0 || n == 0 {
        S::zero()
    } else {
        let diag_mean: f64 =
            (0..n).map(|i| a.get(i, i).abs()).sum::<f64>() / n as f64;
        S::from_parts(0.0, shift_factor * diag_mean).ok_or(Error::ComplexShiftOnReal)?
    };

    // rows of the factors, column-sorted
    let mut l_rows: Vec<Vec<(usize, S)>> = Vec::with_capacity(n);
    let mut u_rows: Vec<Vec<(usize, S)>> = Vec::with_capacity(n);

    // dense workspace with a touched-entry list
    let mut w = vec![S::zero(); n];
    let mut in_pattern = vec![false; n];
    let mut touched: Vec<usize> = Vec::new();

    for i in 0..n {
        let (cols, vals) = a.row(i);
        let row_norm = vals.iter().map(|v| v.abs() * v.abs()).sum::<f64>().sqrt();
        let drop_tol = tau * row_norm;

        let mut lower_heap: BinaryHeap<Reverse<usize>> = BinaryHeap::new();
        let mut upper_cols: Vec<usize> = Vec::new();
        for (&c, &v) in cols.iter().zip(vals) {
            w[c] = v;
            in_pattern[c] = true;
            touched.push(c);
            if c < i {
                lower_heap.push(Reverse(c));
            } else {
                upper_cols.push(c);
            }
        }
        if !in_pattern[i] {
            in_pattern[i] = true;
            touched.push(i);
            upper_cols.push(i);
        }
        w[i] += shift;

        while let Some(Reverse(k)) = lower_heap.pop() {
            let pivot = u_rows[k]
                .first()
                .filter(|(c, _)| *c == k)
                .map(|&(_, v)| v)
                .expect("upper rows start at their diagonal");
            let factor = w[k] / pivot;
            if factor.abs() < drop_tol {
                w[k] = S::zero();
                continue;
            }
            w[k] = factor;
            for &(j, ukj) in u_rows[k].iter().skip(1) {
                if !in_pattern[j] {
                    in_pattern[j] = true;
                    touched.push(j);
                    if j < i {
                        lower_heap.push(Reverse(j));
                    } else {
                        upper_cols.push(j);
                    }
                }
                w[j] -= factor * ukj;
            }
        }

        // gather, drop, cap
        let mut l_new: Vec<(usize, S)> = touched
            .iter()
            .filter(|&&c| c < i && w[c].abs() != 0.0)
            .map(|&c| (c, w[c]))
            .collect();
        let mut u_new: Vec<(usize, S)> = upper_cols
            .iter()
            .filter(|&&c| c > i && w[c].abs() >= drop_tol)
            .map(|&c| (c, w[c]))
            .collect();
        let diag = w[i];
        if diag.abs() == 0.0 {
            return Err(Error::ZeroPivot { row: i });
        }
        keep_largest(&mut l_new, lfil);
        keep_largest(&mut u_new, lfil);
        l_new.sort_unstable_by_key(|&(c, _)| c);
        u_new.sort_unstable_by_key(|&(c, _)| c);
        let mut u_row = Vec::with_capacity(u_new.len() + 1);
        u_row.push((i, diag));
        u_row.extend(u_new);
        l_rows.push(l_new);
        u_rows.push(u_row);

        for &c in &touched {
            w[c] = S::zero();
            in_pattern[c] = false;
        }
        touched.clear();
    }

    let to_csr = |rows: Vec<Vec<(usize, S)>>| -> CsrMatrix<S> {
        let mut triplets = Vec::new();
        for (i, row) in rows.into_iter().enumerate() {
            for (c, v) in row {
                triplets.push((i, c, v));
            }
        }
        CsrMatrix::from_triplets(n, n, triplets).expect("factor rows are sorted and unique")
    };
    Ok(IlutFactors {
        lower: to_csr(l_rows),
        upper: to_csr(u_rows),
        tau,
        lfil,
        shift,
    })
}

/// Keep the `lfil` entries of largest magnitude; ties resolve toward the
/// lower column index.
fn keep_largest<S: Scalar>(entries: &mut Vec<(usize, S)>, lfil: usize) {
    if entries.len() <= lfil {
        return;
    }
    entries.sort_unstable_by(|a, b| {
        b.1.abs()
            .partial_cmp(&a.1.abs())
            .expect("factor entries are finite")
            .then(a.0.cmp(&b.0))
    });
    entries.truncate(lfil);
}

/// `U^{-1} L^{-1} b` by forward then backward substitution.
pub fn lu_solve<S: Scalar>(f: &IlutFactors<S>, b: &[S]) -> Result<Vec<S>> {
    let n = f.n();
    if b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "lu_solve: factors of size {n} vs vector length {}",
            b.len()
        )));
    }
    let mut x = b.to_vec();
    for i in 0..n {
        let (cols, vals) = f.lower.row(i);
        let mut s = x[i];
        for (&c, &v) in cols.iter().zip(vals) {
            s -= v * x[c];
        }
        x[i] = s;
    }
    for i in (0..n).rev() {
        let (cols, vals) = f.upper.row(i);
        let mut s = x[i];
        let mut diag = S::one();
        for (&c, &v) in cols.iter().zip(vals) {
            if c == i {
                diag = v;
            } else {
                s -= v * x[c];
            }
        }
        x[i] = s / diag;
    }
    Ok(x)
}

/// Block-Jacobi preconditioner: RCM-permute, keep contiguous near-equal
/// diagonal blocks, factor each with ILUT, discard everything else.
#[derive(Debug, Clone)]
pub struct BlockJacobiPrecond<S> {
    /// New-to-old permutation (RCM order of the adjacency graph).
    perm: Vec<usize>,
    /// Cumulative block boundaries: block `b` covers `ends[b]..ends[b+1]`.
    ends: Vec<usize>,
    factors: Vec<IlutFactors<S>>,
    n: usize,
}

pub fn block_jacobi_build<S: Scalar>(
    c: &CsrMatrix<S>,
    n_blocks: usize,
    tau: f64,
    lfil: usize,
) -> Result<BlockJacobiPrecond<S>> {
    if n_blocks == 0 {
        return Err(Error::InvalidArgument("n_blocks must be at least 1".into()));
    }
    let n = c.n_rows();
    if n == 0 {
        return Ok(BlockJacobiPrecond {
            perm: Vec::new(),
            ends: vec![0],
            factors: Vec::new(),
            n: 0,
        });
    }
    let graph = reorder::build_graph(c)?;
    let perm = reorder::rcm(&graph);
    let cp = c.permute_sym(&perm)?;

    let blocks = n_blocks.min(n);
    let base = n / blocks;
    let extra = n % blocks;
    let mut ends = Vec::with_capacity(blocks + 1);
    ends.push(0);
    let mut at = 0;
    for b in 0..blocks {
        at += base + usize::from(b < extra);
        ends.push(at);
    }

    let mut factors = Vec::with_capacity(blocks);
    for b in 0..blocks {
        let range = ends[b]..ends[b + 1];
        let block = cp.block(range.clone(), range.clone());
        let f = ilut(&block, tau, lfil, 0.0).map_err(|e| match e {
            Error::ZeroPivot { row } => Error::ZeroPivot {
                row: perm[range.start + row],
            },
            other => other,
        })?;
        factors.push(f);
    }
    Ok(BlockJacobiPrecond {
        perm,
        ends,
        factors,
        n,
    })
}

impl<S: Scalar> BlockJacobiPrecond<S> {
    pub fn to_complex(&self) -> BlockJacobiPrecond<num_complex::Complex64> {
        BlockJacobiPrecond {
            perm: self.perm.clone(),
            ends: self.ends.clone(),
            factors: self.factors.iter().map(|f| f.to_complex()).collect(),
            n: self.n,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_blocks(&self) -> usize {
        self.factors.len()
    }

    pub fn nnz(&self) -> usize {
        self.factors.iter().map(|f| f.nnz()).sum()
    }

    /// Solve each retained diagonal block independently.
    pub fn apply(&self, b: &[S]) -> Result<Vec<S>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "block-jacobi apply: size {} vs vector length {}",
                self.n,
                b.len()
            )));
        }
        let pb: Vec<S> = self.perm.iter().map(|&old| b[old]).collect();
        let mut py = vec![S::zero(); self.n];
        for (bi, f) in self.factors.iter().enumerate() {
            let range = self.ends[bi]..self.ends[bi + 1];
            let y = lu_solve(f, &pb[range.clone()])?;
            py[range].copy_from_slice(&y);
        }
        let mut out = vec![S::zero(); self.n];
        for (new, &old) in self.perm.iter().enumerate() {
            out[old] = py[new];
        }
        Ok(out)
    }
}
