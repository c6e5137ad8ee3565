//! Arnoldi iteration, dense complex Schur decomposition, and the rank-k
//! Schur-vector correction term.
//!
//! The Schur path is always complex, also for real operators, so there is a
//! single code path; the compressed matrices are small (a few times the
//! requested rank), so the promotion costs nothing. Eigenvalues are ranked
//! by `|g / (1 - g)|`, the magnitude each mode attains inside the
//! correction `W [(I - R)^{-1} - I] W^H`.

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::op::LinearOp;
use crate::scalar::Scalar;
use crate::vecops;
use num_complex::Complex64;

type C64 = Complex64;

/// Basis and compressed matrix from `steps` Arnoldi iterations:
/// `op * V_m = V_{m+1} * H` with `H` upper Hessenberg of shape
/// `(steps+1) x steps`.
#[derive(Debug, Clone)]
pub struct ArnoldiResult<S> {
    /// `steps + 1` orthonormal basis vectors; the final one is zero when
    /// the iteration broke down on an invariant subspace.
    pub basis: Vec<Vec<S>>,
    /// `(steps+1) x steps` Hessenberg matrix.
    pub hess: DenseMatrix<S>,
    pub steps: usize,
    pub breakdown: bool,
}

impl<S: Scalar> ArnoldiResult<S> {
    /// Final subdiagonal residual magnitude.
    pub fn residual_norm(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.hess.get(self.steps, self.steps - 1).abs()
        }
    }

    /// The square `steps x steps` Hessenberg block.
    pub fn square_hessenberg(&self) -> DenseMatrix<S> {
        self.hess.submatrix(self.steps, self.steps)
    }

    pub fn basis_matrix(&self) -> DenseMatrix<S> {
        DenseMatrix::from_cols(&self.basis)
    }
}

/// Orthogonalize `w` against `basis` by modified Gram-Schmidt with one
/// reorthogonalization pass. Returns the coefficients and the remaining
/// norm.
fn orthogonalize<S: Scalar>(basis: &[Vec<S>], w: &mut [S]) -> (Vec<S>, f64) {
    let mut coeffs = vec![S::zero(); basis.len()];
    for _ in 0..2 {
        for (j, vj) in basis.iter().enumerate() {
            let c = vecops::dot_uc(vj, w);
            coeffs[j] += c;
            vecops::axpy_in_place(-c, vj, w);
        }
    }
    (coeffs, vecops::norm2(w))
}

const BREAKDOWN_TOL: f64 = 1e-14;

/// `m`-step Arnoldi from `v0`. Exits early on breakdown, returning the
/// shorter exact relation.
pub fn arnoldi<S: Scalar>(
    op: &dyn LinearOp<S>,
    m: usize,
    v0: &[S],
) -> Result<ArnoldiResult<S>> {
    let s = op.dim();
    if v0.len() != s {
        return Err(Error::DimensionMismatch(format!(
            "arnoldi: operator dimension {s} vs start vector length {}",
            v0.len()
        )));
    }
    if m > s {
        return Err(Error::InvalidArgument(format!(
            "arnoldi: {m} steps exceed the operator dimension {s}"
        )));
    }
    let norm = vecops::norm2(v0);
    if norm == 0.0 {
        return Err(Error::ZeroStartVector);
    }
    let mut basis: Vec<Vec<S>> = Vec::with_capacity(m + 1);
    let mut first = v0.to_vec();
    vecops::scale_in_place(S::from_re(1.0 / norm), &mut first);
    basis.push(first);

    let mut hess = DenseMatrix::zeros(m + 1, m);
    let mut steps = 0usize;
    let mut breakdown = false;
    for i in 0..m {
        let mut w = op.apply(&basis[i])?;
        let (coeffs, beta) = orthogonalize(&basis, &mut w);
        for (j, &c) in coeffs.iter().enumerate() {
            hess.set(j, i, c);
        }
        hess.set(i + 1, i, S::from_re(beta));
        steps = i + 1;
        if beta < BREAKDOWN_TOL {
            breakdown = true;
            basis.push(vec![S::zero(); s]);
            break;
        }
        vecops::scale_in_place(S::from_re(1.0 / beta), &mut w);
        basis.push(w);
    }
    let hess = hess.submatrix(steps + 1, steps);
    basis.truncate(steps + 1);
    Ok(ArnoldiResult {
        basis,
        hess,
        steps,
        breakdown,
    })
}

/// Unitary Schur form `A = Q T Q^H` with `T` upper triangular.
#[derive(Debug, Clone)]
pub struct SchurForm {
    pub q: DenseMatrix<C64>,
    pub t: DenseMatrix<C64>,
}

impl SchurForm {
    pub fn eigenvalues(&self) -> Vec<C64> {
        (0..self.t.rows()).map(|i| self.t.get(i, i)).collect()
    }
}

fn c_givens(a: C64, b: C64) -> (f64, C64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if an == 0.0 {
        return (0.0, C64::new(1.0, 0.0));
    }
    let r = (an * an + bn * bn).sqrt();
    let c = an / r;
    let s = (a / an) * b.conj() / r;
    (c, s)
}

/// Eigenvalues of a complex 2x2 matrix.
fn eig_2x2(a: C64, b: C64, c: C64, d: C64) -> (C64, C64) {
    let tr = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (tr * tr - det).sqrt();
    (tr + disc, tr - disc)
}

const SCHUR_DEFLATE: f64 = 1e-12;

/// Complex Schur decomposition of a square matrix: Householder reduction to
/// Hessenberg form followed by a shifted QR iteration (Wilkinson shift)
/// with deflation. Fails after `100 * n` sweeps.
pub fn schur_decompose(a: &DenseMatrix<C64>) -> Result<SchurForm> {
    if a.rows() != a.cols() {
        return Err(Error::DimensionMismatch("schur: matrix not square".into()));
    }
    let n = a.rows();
    let mut t = a.clone();
    let mut q = DenseMatrix::<C64>::identity(n);
    if n == 0 {
        return Ok(SchurForm { q, t });
    }

    // Householder reduction to upper Hessenberg, accumulating Q
    for k in 0..n.saturating_sub(2) {
        let mut v: Vec<C64> = (k + 1..n).map(|i| t.get(i, k)).collect();
        let xnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = v[0];
        let alpha = if x0.norm() == 0.0 {
            C64::new(-xnorm, 0.0)
        } else {
            -(x0 / x0.norm()) * xnorm
        };
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // t = P t P with P = I - 2 v v^H on rows/cols k+1..n
        for j in 0..n {
            let mut dot = C64::new(0.0, 0.0);
            for (r, vi) in v.iter().enumerate() {
                dot += vi.conj() * t.get(k + 1 + r, j);
            }
            for (r, vi) in v.iter().enumerate() {
                let val = t.get(k + 1 + r, j) - 2.0 * vi * dot;
                t.set(k + 1 + r, j, val);
            }
        }
        for i in 0..n {
            let mut dot = C64::new(0.0, 0.0);
            for (r, vi) in v.iter().enumerate() {
                dot += t.get(i, k + 1 + r) * *vi;
            }
            for (r, vi) in v.iter().enumerate() {
                let val = t.get(i, k + 1 + r) - 2.0 * dot * vi.conj();
                t.set(i, k + 1 + r, val);
            }
        }
        for i in 0..n {
            let mut dot = C64::new(0.0, 0.0);
            for (r, vi) in v.iter().enumerate() {
                dot += q.get(i, k + 1 + r) * *vi;
            }
            for (r, vi) in v.iter().enumerate() {
                let val = q.get(i, k + 1 + r) - 2.0 * dot * vi.conj();
                q.set(i, k + 1 + r, val);
            }
        }
    }

    // shifted QR with deflation on the Hessenberg form
    let deflate_threshold = |t: &DenseMatrix<C64>, i: usize| -> f64 {
        let s = SCHUR_DEFLATE * (t.get(i, i).norm() + t.get(i + 1, i + 1).norm());
        if s == 0.0 {
            SCHUR_DEFLATE
        } else {
            s
        }
    };
    let max_sweeps = 100 * n;
    let mut sweeps = 0usize;
    let mut hi = n - 1; // active block ends at hi
    let mut stall = 0usize;
    while hi > 0 {
        // deflate converged subdiagonals at the bottom
        if t.get(hi, hi - 1).norm() <= deflate_threshold(&t, hi - 1) {
            t.set(hi, hi - 1, C64::new(0.0, 0.0));
            hi -= 1;
            stall = 0;
            continue;
        }
        // find the start of the unreduced block
        let mut lo = hi;
        while lo > 0 && t.get(lo, lo - 1).norm() > deflate_threshold(&t, lo - 1) {
            lo -= 1;
        }
        for i in lo..hi {
            if t.get(i + 1, i).norm() <= deflate_threshold(&t, i) {
                t.set(i + 1, i, C64::new(0.0, 0.0));
            }
        }
        if sweeps >= max_sweeps {
            return Err(Error::SchurNoConvergence { sweeps });
        }
        sweeps += 1;
        stall += 1;

        // Wilkinson shift: the eigenvalue of the trailing 2x2 closest to
        // the corner entry; an exceptional shift breaks rare stalls
        let corner = t.get(hi, hi);
        let mu = if stall % 12 == 0 {
            corner + C64::new(1.5 * t.get(hi, hi - 1).norm(), 0.0)
        } else {
            let (e1, e2) = eig_2x2(
                t.get(hi - 1, hi - 1),
                t.get(hi - 1, hi),
                t.get(hi, hi - 1),
                corner,
            );
            if (e1 - corner).norm() <= (e2 - corner).norm() {
                e1
            } else {
                e2
            }
        };

        for i in lo..=hi {
            let d = t.get(i, i) - mu;
            t.set(i, i, d);
        }
        let mut rots: Vec<(f64, C64)> = Vec::with_capacity(hi - lo);
        for i in lo..hi {
            let (c, s) = c_givens(t.get(i, i), t.get(i + 1, i));
            // rows i, i+1
            for j in i..n {
                let t1 = t.get(i, j);
                let t2 = t.get(i + 1, j);
                t.set(i, j, C64::new(c, 0.0) * t1 + s * t2);
                t.set(i + 1, j, -s.conj() * t1 + C64::new(c, 0.0) * t2);
            }
            rots.push((c, s));
        }
        for (idx, &(c, s)) in rots.iter().enumerate() {
            let i = lo + idx;
            // columns i, i+1 of t and q (right-multiplication by the
            // adjoint rotation)
            let top = (i + 2).min(n);
            for r in 0..top {
                let t1 = t.get(r, i);
                let t2 = t.get(r, i + 1);
                t.set(r, i, C64::new(c, 0.0) * t1 + s.conj() * t2);
                t.set(r, i + 1, -s * t1 + C64::new(c, 0.0) * t2);
            }
            for r in 0..n {
                let q1 = q.get(r, i);
                let q2 = q.get(r, i + 1);
                q.set(r, i, C64::new(c, 0.0) * q1 + s.conj() * q2);
                q.set(r, i + 1, -s * q1 + C64::new(c, 0.0) * q2);
            }
        }
        for i in lo..=hi {
            let d = t.get(i, i) + mu;
            t.set(i, i, d);
        }
    }
    // zero out the strict lower triangle (rounding residue)
    for j in 0..n {
        for i in j + 1..n {
            t.set(i, j, C64::new(0.0, 0.0));
        }
    }
    Ok(SchurForm { q, t })
}

/// Schur decomposition of an upper-Hessenberg matrix; the entry point keeps
/// the contract name even though [`schur_decompose`] accepts any square
/// matrix.
pub fn hessenberg_schur(h: &DenseMatrix<C64>) -> Result<SchurForm> {
    schur_decompose(h)
}

/// Ranking functional for the correction: `|g / (1 - g)|`.
pub fn correction_weight(gamma: C64) -> f64 {
    let denom = (C64::new(1.0, 0.0) - gamma).norm();
    if denom < 1e-300 {
        f64::INFINITY
    } else {
        gamma.norm() / denom
    }
}

/// Swap the diagonal entries at `i`, `i+1` of a triangular form by a
/// unitary similarity, updating `q` alongside.
fn swap_adjacent(sf: &mut SchurForm, i: usize) {
    let a = sf.t.get(i, i);
    let b = sf.t.get(i, i + 1);
    let c = sf.t.get(i + 1, i + 1);
    // eigenvector of [[a, b], [0, c]] for eigenvalue c
    let v1 = b;
    let v2 = c - a;
    let nrm = (v1.norm_sqr() + v2.norm_sqr()).sqrt();
    if nrm == 0.0 || v2.norm() == 0.0 {
        // equal eigenvalues: nothing to move
        return;
    }
    let g11 = v1 / nrm;
    let g21 = v2 / nrm;
    // unitary [ [g11, -conj(g21)], [g21, conj(g11)] ]
    let n = sf.t.rows();
    for col in 0..n {
        let t1 = sf.t.get(i, col);
        let t2 = sf.t.get(i + 1, col);
        sf.t.set(i, col, g11.conj() * t1 + g21.conj() * t2);
        sf.t.set(i + 1, col, -g21 * t1 + g11 * t2);
    }
    for row in 0..n {
        let t1 = sf.t.get(row, i);
        let t2 = sf.t.get(row, i + 1);
        sf.t.set(row, i, t1 * g11 + t2 * g21);
        sf.t.set(row, i + 1, -t1 * g21.conj() + t2 * g11.conj());
        let q1 = sf.q.get(row, i);
        let q2 = sf.q.get(row, i + 1);
        sf.q.set(row, i, q1 * g11 + q2 * g21);
        sf.q.set(row, i + 1, -q1 * g21.conj() + q2 * g11.conj());
    }
    sf.t.set(i + 1, i, C64::new(0.0, 0.0));
}

/// Reorder a Schur form so the diagonal comes in descending
/// [`correction_weight`] order (bubble passes of adjacent swaps).
pub fn reorder_schur_descending(sf: &mut SchurForm) {
    let n = sf.t.rows();
    if n < 2 {
        return;
    }
    loop {
        let mut swapped = false;
        for i in 0..n - 1 {
            let wi = correction_weight(sf.t.get(i, i));
            let wj = correction_weight(sf.t.get(i + 1, i + 1));
            if wj > wi {
                swap_adjacent(sf, i);
                swapped = true;
            }
        }
        if !swapped {
            return;
        }
    }
}

/// The rank-k correction data: `W_k` with orthonormal columns and the
/// leading triangular block `R_k`.
#[derive(Debug, Clone)]
pub struct LowRankTerm {
    w: DenseMatrix<C64>,
    r: DenseMatrix<C64>,
}

impl LowRankTerm {
    pub fn empty(dim: usize) -> Self {
        LowRankTerm {
            w: DenseMatrix::zeros(dim, 0),
            r: DenseMatrix::zeros(0, 0),
        }
    }

    pub fn rank(&self) -> usize {
        self.r.rows()
    }

    pub fn dim(&self) -> usize {
        self.w.rows()
    }

    pub fn basis(&self) -> &DenseMatrix<C64> {
        &self.w
    }

    pub fn triangular(&self) -> &DenseMatrix<C64> {
        &self.r
    }

    /// The retained eigenvalue estimates (diagonal of `R_k`).
    pub fn eigenvalues(&self) -> Vec<C64> {
        (0..self.rank()).map(|i| self.r.get(i, i)).collect()
    }

    /// Entry count of the stored dense blocks, for fill accounting.
    pub fn stored_entries(&self) -> usize {
        self.w.rows() * self.w.cols() + self.r.rows() * self.r.cols()
    }

    /// Dense `W [(I - R)^{-1} - I] W^H`, for validation at small sizes.
    pub fn correction_dense(&self) -> DenseMatrix<C64> {
        let k = self.rank();
        let s = self.dim();
        if k == 0 {
            return DenseMatrix::zeros(s, s);
        }
        let mut i_minus_r = DenseMatrix::<C64>::identity(k);
        for j in 0..k {
            for i in 0..k {
                let v = i_minus_r.get(i, j) - self.r.get(i, j);
                i_minus_r.set(i, j, v);
            }
        }
        let inv = i_minus_r.inverse().expect("checked invertible at build");
        let mut middle = inv;
        for i in 0..k {
            let v = middle.get(i, i) - C64::new(1.0, 0.0);
            middle.set(i, i, v);
        }
        let wm = self.w.matmul(&middle).expect("shapes agree");
        wm.matmul(&self.w.adjoint()).expect("shapes agree")
    }
}

/// Select the `k` leading Schur vectors from an Arnoldi relation and its
/// compressed Schur form: reorder descending, take `W_k = V_m Q_k` and the
/// leading `k x k` of `T`.
pub fn select_rank_k(
    ar: &ArnoldiResult<C64>,
    sf: &SchurForm,
    k: usize,
) -> Result<LowRankTerm> {
    let m = ar.steps;
    if sf.t.rows() != m {
        return Err(Error::DimensionMismatch(
            "select_rank_k: Schur form does not match the Arnoldi relation".into(),
        ));
    }
    if k > m {
        return Err(Error::InvalidArgument(format!(
            "select_rank_k: rank {k} exceeds the {m}-step relation"
        )));
    }
    let mut sorted = sf.clone();
    reorder_schur_descending(&mut sorted);
    build_term(&ar.basis[..m], &sorted, k)
}

fn build_term(basis: &[Vec<C64>], sorted: &SchurForm, k: usize) -> Result<LowRankTerm> {
    let dim = basis.first().map_or(0, |v| v.len());
    if k == 0 {
        return Ok(LowRankTerm::empty(dim));
    }
    for i in 0..k {
        let gamma = sorted.t.get(i, i);
        let margin = (C64::new(1.0, 0.0) - gamma).norm();
        if margin < 1e-12 {
            return Err(Error::SingularCorrection { magnitude: margin });
        }
    }
    let vm = DenseMatrix::from_cols(basis);
    let qk = sorted.q.submatrix(sorted.q.rows(), k);
    let w = vm.matmul(&qk)?;
    let r = sorted.t.submatrix(k, k);
    Ok(LowRankTerm { w, r })
}

/// Build a rank-k term directly from an explicitly assembled dense
/// operator: full Schur decomposition, reorder, truncate. Used when the
/// requested rank covers the whole dimension and Krylov iteration from a
/// single start vector could miss multiple eigenvalues.
pub fn schur_term_from_dense(g: &DenseMatrix<C64>, k: usize) -> Result<LowRankTerm> {
    let n = g.rows();
    let mut sf = schur_decompose(g)?;
    reorder_schur_descending(&mut sf);
    let basis: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[j] = C64::new(1.0, 0.0);
            e
        })
        .collect();
    build_term(&basis, &sf, k.min(n))
}

/// Apply `W_k [(I - R_k)^{-1} - I] W_k^H` to a vector: a tall adjoint
/// product, a small triangular solve, a tall product back.
pub fn apply_correction<S: Scalar>(term: &LowRankTerm, z: &[S]) -> Result<Vec<S>> {
    if z.len() != term.dim() {
        return Err(Error::DimensionMismatch(format!(
            "apply_correction: dimension {} vs vector length {}",
            term.dim(),
            z.len()
        )));
    }
    if term.rank() == 0 {
        return Ok(vec![S::zero(); z.len()]);
    }
    let zc: Vec<C64> = z.iter().map(|&v| v.to_complex()).collect();
    let u = term.w.matvec_adj(&zc)?;
    let k = term.rank();
    let mut i_minus_r = DenseMatrix::<C64>::zeros(k, k);
    for j in 0..k {
        for i in 0..=j {
            let eye = if i == j {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            };
            i_minus_r.set(i, j, eye - term.r.get(i, j));
        }
    }
    let y = i_minus_r.solve_upper_triangular(&u)?;
    let d: Vec<C64> = y.iter().zip(&u).map(|(&a, &b)| a - b).collect();
    let out = term.w.matvec(&d)?;
    Ok(out.iter().map(|&v| S::from_complex_lossy(v)).collect())
}

/// Convergence tolerance on the retained eigenvalues between restart
/// cycles: two correct digits, measured as relative change.
const RESTART_EIG_TOL: f64 = 1e-2;

/// Thick-restart (Krylov-Schur) computation of the `k` leading Schur
/// vectors of `op`, with cycles of length `2k`. After each cycle the `k`
/// current Schur vectors plus the residual direction restart the basis;
/// iteration stops when every retained eigenvalue changed by less than two
/// digits relative, on breakdown, or after `max_cycles` cycles.
///
/// Returns the term and the number of cycles run.
pub fn restarted_schur_vectors(
    op: &dyn LinearOp<C64>,
    k: usize,
    max_cycles: usize,
) -> Result<(LowRankTerm, usize)> {
    let s = op.dim();
    if k == 0 {
        return Ok((LowRankTerm::empty(s), 0));
    }
    if max_cycles == 0 {
        return Err(Error::InvalidArgument("max_cycles must be at least 1".into()));
    }
    let k_eff = k.min(s);
    let m = (2 * k_eff).min(s);

    let ones = vec![C64::new(1.0, 0.0); s];
    let ar = arnoldi(op, m, &ones)?;
    let mut basis: Vec<Vec<C64>> = ar.basis[..ar.steps].to_vec();
    let mut compressed = ar.square_hessenberg();
    // coupling row: op * V_q = V_q * M + v_out * spike
    let mut spike: Vec<C64> = {
        let mut row = vec![C64::new(0.0, 0.0); ar.steps];
        if ar.steps > 0 {
            row[ar.steps - 1] = ar.hess.get(ar.steps, ar.steps - 1);
        }
        row
    };
    let mut v_out: Vec<C64> = ar.basis[ar.steps].clone();
    let mut exact = ar.breakdown;

    let mut prev_eigs: Option<Vec<C64>> = None;
    let mut cycles = 0usize;
    loop {
        cycles += 1;
        let mut sf = schur_decompose(&compressed)?;
        reorder_schur_descending(&mut sf);
        let q = basis.len();
        let kk = k_eff.min(q);
        let eigs: Vec<C64> = (0..kk).map(|i| sf.t.get(i, i)).collect();

        let converged = match &prev_eigs {
            Some(prev) if prev.len() == eigs.len() => eigs
                .iter()
                .zip(prev)
                .all(|(e, p)| (e - p).norm() <= RESTART_EIG_TOL * e.norm().max(1e-30)),
            _ => false,
        };
        if converged || exact || cycles >= max_cycles {
            let term = build_term(&basis, &sf, kk)?;
            return Ok((term, cycles));
        }
        prev_eigs = Some(eigs);

        // compress to the k leading Schur vectors plus the residual
        let vm = DenseMatrix::from_cols(&basis);
        let qk = sf.q.submatrix(q, kk);
        let wk = vm.matmul(&qk)?;
        let mut new_basis: Vec<Vec<C64>> = (0..kk).map(|j| wk.col(j).to_vec()).collect();
        let new_spike: Vec<C64> = {
            // spike * Q_k
            (0..kk)
                .map(|j| {
                    (0..q)
                        .map(|i| spike[i] * sf.q.get(i, j))
                        .sum::<C64>()
                })
                .collect()
        };
        new_basis.push(v_out.clone());

        let mut me = DenseMatrix::<C64>::zeros(m, m);
        for j in 0..kk {
            for i in 0..=j {
                me.set(i, j, sf.t.get(i, j));
            }
            me.set(kk, j, new_spike[j]);
        }

        // expand back to m vectors
        basis = new_basis;
        let mut beta_final = 0.0f64;
        let mut q_now = kk + 1;
        for i in kk..m {
            let mut w = op.apply(&basis[i])?;
            let (coeffs, beta) = orthogonalize(&basis, &mut w);
            for (j, &c) in coeffs.iter().enumerate() {
                me.set(j, i, c);
            }
            if beta < BREAKDOWN_TOL {
                exact = true;
                q_now = i + 1;
                beta_final = 0.0;
                break;
            }
            if i + 1 < m {
                me.set(i + 1, i, C64::new(beta, 0.0));
                vecops::scale_in_place(C64::new(1.0 / beta, 0.0), &mut w);
                basis.push(w);
                q_now = i + 2;
            } else {
                beta_final = beta;
                vecops::scale_in_place(C64::new(1.0 / beta, 0.0), &mut w);
                v_out = w;
                q_now = m;
            }
        }
        basis.truncate(q_now);
        compressed = me.submatrix(q_now, q_now);
        spike = vec![C64::new(0.0, 0.0); q_now];
        if !exact && q_now == m {
            spike[m - 1] = C64::new(beta_final, 0.0);
        } else if exact {
            v_out = vec![C64::new(0.0, 0.0); s];
        }
    }
}
