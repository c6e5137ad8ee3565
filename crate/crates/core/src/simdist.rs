//! Simulated multi-rank execution layer.
//!
//! All `p` logical ranks live in one process and execute in a fixed,
//! deterministic order, so every communication event is exactly countable.
//! Distributed kernels return the same values as their serial counterparts
//! and record what a message-passing implementation would send:
//!
//! * point-to-point messages (one per (sender, receiver) pair that has to
//!   move data, with the moved word count),
//! * all-reduce operations with their word volume,
//! * gather/scatter collectives with their total word volume,
//! * floating-point work along the critical path (the maximum per-rank
//!   flop count of the operation).
//!
//! [`model_cost`] turns a trace into modeled seconds: a point-to-point
//! message of `m` words costs `t_s + m*t_w`; an all-reduce of `m` words
//! costs `ceil(log2 p) * (t_s + m*t_w)`; a gather or scatter moving `m`
//! total words costs `ceil(log2 p)*t_s + m*(p-1)/p*t_w`; each flop costs
//! `t_c`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::CsrMatrix;
use crate::vecops;
use std::fmt;
use std::io::Write;

/// Machine parameters of the cost model.
#[derive(Debug, Clone, Copy)]
pub struct CostParams {
    /// Startup latency per message, seconds.
    pub t_s: f64,
    /// Transfer time per word, seconds.
    pub t_w: f64,
    /// Compute time per flop, seconds.
    pub t_c: f64,
    /// Rank count.
    pub p: usize,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams {
            t_s: 1e-6,
            t_w: 8e-9,
            t_c: 1e-9,
            p: 8,
        }
    }
}

/// Monotone counters for one traced region.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CommTrace {
    pub p2p_messages: u64,
    pub p2p_words: u64,
    pub allreduce_count: u64,
    pub allreduce_words: u64,
    pub gather_count: u64,
    pub gather_words: u64,
    pub flops: u64,
}

impl CommTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }

    pub fn record_p2p(&mut self, words: usize) {
        self.p2p_messages += 1;
        self.p2p_words += words as u64;
    }

    pub fn record_allreduce(&mut self, words: usize) {
        self.allreduce_count += 1;
        self.allreduce_words += words as u64;
    }

    pub fn record_gather(&mut self, words: usize) {
        self.gather_count += 1;
        self.gather_words += words as u64;
    }

    pub fn record_flops(&mut self, flops: usize) {
        self.flops += flops as u64;
    }

    /// One row per counter.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "counter,value")?;
        writeln!(w, "p2p_messages,{}", self.p2p_messages)?;
        writeln!(w, "p2p_words,{}", self.p2p_words)?;
        writeln!(w, "allreduce_count,{}", self.allreduce_count)?;
        writeln!(w, "allreduce_words,{}", self.allreduce_words)?;
        writeln!(w, "gather_count,{}", self.gather_count)?;
        writeln!(w, "gather_words,{}", self.gather_words)?;
        writeln!(w, "flops,{}", self.flops)?;
        Ok(())
    }
}

impl fmt::Display for CommTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<18} {:>12}", "counter", "value")?;
        writeln!(f, "{:<18} {:>12}", "p2p messages", self.p2p_messages)?;
        writeln!(f, "{:<18} {:>12}", "p2p words", self.p2p_words)?;
        writeln!(f, "{:<18} {:>12}", "allreduce count", self.allreduce_count)?;
        writeln!(f, "{:<18} {:>12}", "allreduce words", self.allreduce_words)?;
        writeln!(f, "{:<18} {:>12}", "gather count", self.gather_count)?;
        writeln!(f, "{:<18} {:>12}", "gather words", self.gather_words)?;
        write!(f, "{:<18} {:>12}", "flops", self.flops)
    }
}

/// Contiguous row ownership: rank `r` owns `starts[r]..starts[r+1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankLayout {
    starts: Vec<usize>,
}

impl RankLayout {
    /// Balanced contiguous split; local lengths differ by at most one.
    pub fn balanced(global_n: usize, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidArgument("p must be at least 1".into()));
        }
        if p > global_n {
            return Err(Error::InvalidArgument(format!(
                "p = {p} exceeds the {global_n} rows available"
            )));
        }
        let base = global_n / p;
        let extra = global_n % p;
        let mut starts = Vec::with_capacity(p + 1);
        let mut at = 0;
        starts.push(0);
        for r in 0..p {
            at += base + usize::from(r < extra);
            starts.push(at);
        }
        Ok(RankLayout { starts })
    }

    /// Split with explicit block sizes (used by partition-aware layouts).
    pub fn from_sizes(sizes: &[usize]) -> Self {
        let mut starts = Vec::with_capacity(sizes.len() + 1);
        let mut at = 0;
        starts.push(0);
        for &s in sizes {
            at += s;
            starts.push(at);
        }
        RankLayout { starts }
    }

    pub fn ranks(&self) -> usize {
        self.starts.len() - 1
    }

    pub fn global_n(&self) -> usize {
        *self.starts.last().unwrap()
    }

    pub fn range(&self, rank: usize) -> std::ops::Range<usize> {
        self.starts[rank]..self.starts[rank + 1]
    }

    pub fn owner(&self, global_idx: usize) -> usize {
        match self.starts.binary_search(&global_idx) {
            Ok(r) if r == self.ranks() => r - 1,
            Ok(r) => r,
            Err(r) => r - 1,
        }
    }

    pub fn max_local_len(&self) -> usize {
        (0..self.ranks()).map(|r| self.range(r).len()).max().unwrap_or(0)
    }
}

/// Row-distributed vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DistVector<S> {
    layout: RankLayout,
    locals: Vec<Vec<S>>,
}

impl<S: Scalar> DistVector<S> {
    pub fn from_serial(x: &[S], p: usize) -> Result<Self> {
        let layout = RankLayout::balanced(x.len(), p)?;
        Ok(Self::from_serial_with_layout(x, layout))
    }

    pub fn from_serial_with_layout(x: &[S], layout: RankLayout) -> Self {
        let locals = (0..layout.ranks())
            .map(|r| x[layout.range(r)].to_vec())
            .collect();
        DistVector { layout, locals }
    }

    pub fn assemble(&self) -> Vec<S> {
        let mut out = Vec::with_capacity(self.layout.global_n());
        for l in &self.locals {
            out.extend_from_slice(l);
        }
        out
    }

    pub fn layout(&self) -> &RankLayout {
        &self.layout
    }

    pub fn local(&self, rank: usize) -> &[S] {
        &self.locals[rank]
    }

    fn check_same_layout(&self, other: &Self) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch(
                "distributed vectors use different row splits".into(),
            ));
        }
        Ok(())
    }
}

/// Gather instructions for one receiving rank: for every sending rank, the
/// sender-local indices to ship.
type GatherPlan = Vec<Vec<(usize, Vec<usize>)>>;

/// Row-partitioned matrix split into a local (diagonal) block and a
/// compacted exterior (off-diagonal) block per rank.
#[derive(Debug, Clone)]
pub struct PartitionedSystem<S> {
    layout: RankLayout,
    /// Square local-rows x local-cols block per rank.
    diag: Vec<CsrMatrix<S>>,
    /// Local-rows x exterior-cols block per rank, columns compacted.
    offd: Vec<CsrMatrix<S>>,
    /// Global column index of each compacted exterior column, sorted.
    ext_cols: Vec<Vec<usize>>,
    plan: GatherPlan,
}

/// Split a square matrix row-wise over `p` ranks with the balanced layout.
pub fn partition_rows<S: Scalar>(a: &CsrMatrix<S>, p: usize) -> Result<PartitionedSystem<S>> {
    let layout = RankLayout::balanced(a.n_rows(), p)?;
    partition_rows_with_layout(a, layout)
}

/// Split a square matrix row-wise with an explicit layout (e.g. one derived
/// from a graph partition).
pub fn partition_rows_with_layout<S: Scalar>(
    a: &CsrMatrix<S>,
    layout: RankLayout,
) -> Result<PartitionedSystem<S>> {
    if a.n_rows() != a.n_cols() {
        return Err(Error::DimensionMismatch(
            "partition_rows expects a square matrix".into(),
        ));
    }
    if layout.global_n() != a.n_rows() {
        return Err(Error::LayoutMismatch("layout does not cover the matrix".into()));
    }
    let p = layout.ranks();
    let mut diag = Vec::with_capacity(p);
    let mut offd = Vec::with_capacity(p);
    let mut ext_cols = Vec::with_capacity(p);
    for r in 0..p {
        let rows = layout.range(r);
        let local_n = rows.len();
        let mut cols: Vec<usize> = Vec::new();
        for row in rows.clone() {
            let (cidx, _) = a.row(row);
            for &c in cidx {
                if !rows.contains(&c) {
                    cols.push(c);
                }
            }
        }
        cols.sort_unstable();
        cols.dedup();
        let col_of: std::collections::BTreeMap<usize, usize> =
            cols.iter().enumerate().map(|(k, &c)| (c, k)).collect();
        let mut dtrip = Vec::new();
        let mut otrip = Vec::new();
        for (li, row) in rows.clone().enumerate() {
            let (cidx, vals) = a.row(row);
            for (&c, &v) in cidx.iter().zip(vals) {
                if rows.contains(&c) {
                    dtrip.push((li, c - rows.start, v));
                } else {
                    otrip.push((li, col_of[&c], v));
                }
            }
        }
        diag.push(CsrMatrix::from_triplets(local_n, local_n, dtrip)?);
        offd.push(CsrMatrix::from_triplets(local_n, cols.len(), otrip)?);
        ext_cols.push(cols);
    }

    let mut plan: GatherPlan = Vec::with_capacity(p);
    for cols in ext_cols.iter() {
        let mut per_sender: Vec<(usize, Vec<usize>)> = Vec::new();
        for &c in cols {
            let owner = layout.owner(c);
            let local = c - layout.range(owner).start;
            match per_sender.last_mut() {
                Some((s, v)) if *s == owner => v.push(local),
                _ => per_sender.push((owner, vec![local])),
            }
        }
        plan.push(per_sender);
    }

    Ok(PartitionedSystem {
        layout,
        diag,
        offd,
        ext_cols,
        plan,
    })
}

impl<S: Scalar> PartitionedSystem<S> {
    pub fn layout(&self) -> &RankLayout {
        &self.layout
    }

    pub fn ranks(&self) -> usize {
        self.layout.ranks()
    }

    pub fn diag_block(&self, rank: usize) -> &CsrMatrix<S> {
        &self.diag[rank]
    }

    pub fn offd_block(&self, rank: usize) -> &CsrMatrix<S> {
        &self.offd[rank]
    }

    pub fn exterior_cols(&self, rank: usize) -> &[usize] {
        &self.ext_cols[rank]
    }

    /// Reassemble the original matrix from the diagonal/off-diagonal split.
    pub fn assemble(&self) -> CsrMatrix<S> {
        let n = self.layout.global_n();
        let mut triplets = Vec::new();
        for r in 0..self.ranks() {
            let rows = self.layout.range(r);
            for (li, row) in rows.clone().enumerate() {
                let (cidx, vals) = self.diag[r].row(li);
                for (&c, &v) in cidx.iter().zip(vals) {
                    triplets.push((row, rows.start + c, v));
                }
                let (cidx, vals) = self.offd[r].row(li);
                for (&c, &v) in cidx.iter().zip(vals) {
                    triplets.push((row, self.ext_cols[r][c], v));
                }
            }
        }
        CsrMatrix::from_triplets(n, n, triplets).expect("split blocks are valid")
    }
}

/// Distributed sparse matrix-vector product. Exterior entries move as one
/// point-to-point message per (sender, receiver) pair that needs data.
pub fn dist_spmv<S: Scalar>(
    sys: &PartitionedSystem<S>,
    x: &DistVector<S>,
    trace: &mut CommTrace,
) -> Result<DistVector<S>> {
    if sys.layout != *x.layout() {
        return Err(Error::LayoutMismatch(
            "matrix and vector row splits differ".into(),
        ));
    }
    let p = sys.ranks();
    let mut locals = Vec::with_capacity(p);
    let mut max_rank_flops = 0usize;
    for r in 0..p {
        // gather exterior entries
        let mut ext = Vec::with_capacity(sys.ext_cols[r].len());
        for (sender, idxs) in &sys.plan[r] {
            trace.record_p2p(idxs.len());
            for &li in idxs {
                ext.push(x.locals[*sender][li]);
            }
        }
        let mut y = vec![S::zero(); sys.diag[r].n_rows()];
        sys.diag[r].spmv_into(x.local(r), &mut y);
        if !ext.is_empty() {
            let yo = sys.offd[r].spmv(&ext)?;
            for (yi, oi) in y.iter_mut().zip(yo) {
                *yi += oi;
            }
        }
        max_rank_flops = max_rank_flops.max(2 * (sys.diag[r].nnz() + sys.offd[r].nnz()));
        locals.push(y);
    }
    trace.record_flops(max_rank_flops);
    Ok(DistVector {
        layout: sys.layout.clone(),
        locals,
    })
}

/// Distributed inner product: local partial dots plus one single-word
/// all-reduce.
pub fn dist_dot<S: Scalar>(
    x: &DistVector<S>,
    y: &DistVector<S>,
    trace: &mut CommTrace,
) -> Result<S> {
    x.check_same_layout(y)?;
    let mut acc = S::zero();
    for r in 0..x.layout.ranks() {
        acc += vecops::dot_uc(x.local(r), y.local(r));
    }
    trace.record_flops(2 * x.layout.max_local_len());
    trace.record_allreduce(1);
    Ok(acc)
}

/// Distributed axpy: purely local, no communication recorded.
pub fn dist_axpy<S: Scalar>(
    alpha: S,
    x: &DistVector<S>,
    y: &DistVector<S>,
    trace: &mut CommTrace,
) -> Result<DistVector<S>> {
    x.check_same_layout(y)?;
    let locals = x
        .locals
        .iter()
        .zip(&y.locals)
        .map(|(xl, yl)| xl.iter().zip(yl).map(|(&a, &b)| alpha * a + b).collect())
        .collect();
    trace.record_flops(x.layout.max_local_len());
    Ok(DistVector {
        layout: x.layout.clone(),
        locals,
    })
}

/// Distribute a replicated vector from the root; one scatter collective.
pub fn scatter_from_root<S: Scalar>(
    x: &[S],
    p: usize,
    trace: &mut CommTrace,
) -> Result<DistVector<S>> {
    let v = DistVector::from_serial(x, p)?;
    trace.record_gather(x.len());
    Ok(v)
}

/// Collect a distributed vector on the root; one gather collective.
pub fn gather_to_root<S: Scalar>(x: &DistVector<S>, trace: &mut CommTrace) -> Vec<S> {
    trace.record_gather(x.layout.global_n());
    x.assemble()
}

fn ceil_log2(p: usize) -> f64 {
    if p <= 1 {
        0.0
    } else {
        ((p as f64).log2()).ceil()
    }
}

/// Itemized modeled time for a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct CostReport {
    pub p2p_seconds: f64,
    pub allreduce_seconds: f64,
    pub gather_seconds: f64,
    pub compute_seconds: f64,
}

impl CostReport {
    pub fn total(&self) -> f64 {
        self.p2p_seconds + self.allreduce_seconds + self.gather_seconds + self.compute_seconds
    }

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "item,seconds")?;
        writeln!(w, "p2p,{:e}", self.p2p_seconds)?;
        writeln!(w, "allreduce,{:e}", self.allreduce_seconds)?;
        writeln!(w, "gather_scatter,{:e}", self.gather_seconds)?;
        writeln!(w, "compute,{:e}", self.compute_seconds)?;
        writeln!(w, "total,{:e}", self.total())?;
        Ok(())
    }
}

impl fmt::Display for CostReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<16} {:>14}", "item", "seconds")?;
        writeln!(f, "{:<16} {:>14.6e}", "p2p", self.p2p_seconds)?;
        writeln!(f, "{:<16} {:>14.6e}", "allreduce", self.allreduce_seconds)?;
        writeln!(f, "{:<16} {:>14.6e}", "gather/scatter", self.gather_seconds)?;
        writeln!(f, "{:<16} {:>14.6e}", "compute", self.compute_seconds)?;
        writeln!(f, "{:<16} {:>14.6e}", "total", self.total())?;
        write!(
            f,
            "conventions: p2p = ts + m*tw; allreduce = log2(p)*(ts + m*tw); \
             gather/scatter of m total words = log2(p)*ts + m*(p-1)/p*tw; log2 rounded up"
        )
    }
}

/// Turn a trace into modeled seconds under the given machine parameters.
pub fn model_cost(trace: &CommTrace, params: &CostParams) -> CostReport {
    let lg = ceil_log2(params.p);
    let p = params.p as f64;
    CostReport {
        p2p_seconds: trace.p2p_messages as f64 * params.t_s + trace.p2p_words as f64 * params.t_w,
        allreduce_seconds: lg
            * (trace.allreduce_count as f64 * params.t_s
                + trace.allreduce_words as f64 * params.t_w),
        gather_seconds: lg * trace.gather_count as f64 * params.t_s
            + trace.gather_words as f64 * (p - 1.0) / p * params.t_w,
        compute_seconds: trace.flops as f64 * params.t_c,
    }
}
