//! Compressed sparse row matrices over a real or complex scalar field.
//!
//! Matrices are always kept canonical: `row_ptr` is monotone with
//! `row_ptr[0] = 0`, column indices are strictly increasing within each row,
//! and duplicates are merged at construction. Every downstream kernel relies
//! on this.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<S> {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<S>,
}

impl<S: Scalar> CsrMatrix<S> {
    /// Build from raw CSR arrays, validating canonical form.
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<S>,
    ) -> Result<Self> {
        let m = CsrMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        };
        m.validate()?;
        Ok(m)
    }

    /// Build from (row, col, value) triplets. Entries are sorted and
    /// duplicates are summed.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, S)>,
    ) -> Result<Self> {
        let mut entries: Vec<(usize, usize, S)> = triplets.into_iter().collect();
        for &(r, c, _) in &entries {
            if r >= n_rows || c >= n_cols {
                return Err(Error::InvalidStructure(format!(
                    "triplet ({r}, {c}) outside {n_rows}x{n_cols}"
                )));
            }
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        let mut prev: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if prev == Some((r, c)) {
                let last = values.len() - 1;
                let merged = values[last] + v;
                values[last] = merged;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                prev = Some((r, c));
            }
        }
        for r in 0..n_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix::new(n_rows, n_cols, row_ptr, col_idx, values)
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![S::one(); n],
        }
    }

    pub fn from_diagonal(diag: &[S]) -> Self {
        let n = diag.len();
        CsrMatrix {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    /// Canonical-form validator: offsets monotone, columns strictly
    /// increasing per row, no duplicates.
    pub fn validate(&self) -> Result<()> {
        if self.row_ptr.len() != self.n_rows + 1 {
            return Err(Error::InvalidStructure("row_ptr length".into()));
        }
        if self.row_ptr[0] != 0 || self.row_ptr[self.n_rows] != self.col_idx.len() {
            return Err(Error::InvalidStructure("row_ptr endpoints".into()));
        }
        if self.col_idx.len() != self.values.len() {
            return Err(Error::InvalidStructure("col/value length mismatch".into()));
        }
        for r in 0..self.n_rows {
            let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
            if hi < lo {
                return Err(Error::InvalidStructure(format!("row {r} offsets decrease")));
            }
            let mut prev: Option<usize> = None;
            for &c in &self.col_idx[lo..hi] {
                if c >= self.n_cols {
                    return Err(Error::InvalidStructure(format!(
                        "column {c} out of range in row {r}"
                    )));
                }
                if let Some(p) = prev {
                    if c <= p {
                        return Err(Error::InvalidStructure(format!(
                            "row {r} columns not strictly increasing"
                        )));
                    }
                }
                prev = Some(c);
            }
        }
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[S]) {
        let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    pub fn get(&self, r: usize, c: usize) -> S {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => S::zero(),
        }
    }

    /// `y = A x`.
    pub fn spmv(&self, x: &[S]) -> Result<Vec<S>> {
        if x.len() != self.n_cols {
            return Err(Error::DimensionMismatch(format!(
                "spmv: {} columns vs vector length {}",
                self.n_cols,
                x.len()
            )));
        }
        let mut y = vec![S::zero(); self.n_rows];
        self.spmv_into(x, &mut y);
        Ok(y)
    }

    pub(crate) fn spmv_into(&self, x: &[S], y: &mut [S]) {
        for (r, yr) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(r);
            let mut s = S::zero();
            for (&c, &v) in cols.iter().zip(vals) {
                s += v * x[c];
            }
            *yr = s;
        }
    }

    pub fn to_dense(&self) -> crate::dense::DenseMatrix<S> {
        let mut d = crate::dense::DenseMatrix::zeros(self.n_rows, self.n_cols);
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                d.set(r, c, v);
            }
        }
        d
    }

    pub fn transpose(&self) -> CsrMatrix<S> {
        let mut triplets = Vec::with_capacity(self.nnz());
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                triplets.push((c, r, v));
            }
        }
        CsrMatrix::from_triplets(self.n_cols, self.n_rows, triplets)
            .expect("transpose of a valid matrix is valid")
    }

    /// Symmetric permutation: entry `(i, j)` of the result equals entry
    /// `(perm[i], perm[j])` of `self`, i.e. `perm` maps new indices to old.
    pub fn permute_sym(&self, perm: &[usize]) -> Result<CsrMatrix<S>> {
        if self.n_rows != self.n_cols || perm.len() != self.n_rows {
            return Err(Error::DimensionMismatch("permute_sym".into()));
        }
        let n = self.n_rows;
        let mut inv = vec![usize::MAX; n];
        for (new, &old) in perm.iter().enumerate() {
            if old >= n || inv[old] != usize::MAX {
                return Err(Error::InvalidArgument("perm is not a bijection".into()));
            }
            inv[old] = new;
        }
        let mut triplets = Vec::with_capacity(self.nnz());
        for r in 0..n {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                triplets.push((inv[r], inv[c], v));
            }
        }
        CsrMatrix::from_triplets(n, n, triplets)
    }

    /// Extract the block with the given row and column ranges.
    pub fn block(
        &self,
        rows: std::ops::Range<usize>,
        cols: std::ops::Range<usize>,
    ) -> CsrMatrix<S> {
        let mut triplets = Vec::new();
        for r in rows.clone() {
            let (cidx, vals) = self.row(r);
            for (&c, &v) in cidx.iter().zip(vals) {
                if c >= cols.start && c < cols.end {
                    triplets.push((r - rows.start, c - cols.start, v));
                }
            }
        }
        CsrMatrix::from_triplets(rows.len(), cols.len(), triplets)
            .expect("block of a valid matrix is valid")
    }

    /// `A + shift * I`.
    pub fn add_diagonal(&self, shift: S) -> Result<CsrMatrix<S>> {
        if self.n_rows != self.n_cols {
            return Err(Error::DimensionMismatch("add_diagonal on non-square".into()));
        }
        let mut triplets: Vec<(usize, usize, S)> = Vec::with_capacity(self.nnz() + self.n_rows);
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                triplets.push((r, c, v));
            }
            triplets.push((r, r, shift));
        }
        CsrMatrix::from_triplets(self.n_rows, self.n_cols, triplets)
    }

    pub fn to_complex(&self) -> CsrMatrix<Complex64> {
        CsrMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: self.values.iter().map(|&v| v.to_complex()).collect(),
        }
    }
}
