//! The multilevel Schur-complement low-rank preconditioner.
//!
//! Setup reorders the matrix level by level (interiors first, interface
//! last), factors each level's block-diagonal interior with ILUT, builds a
//! block-Jacobi solve for the deepest interface block, and then assembles a
//! rank-k Schur-vector correction per level bottom-up, so each level's
//! interface operator can already use everything below it.
//!
//! Application walks the levels recursively: interior solve, interface
//! residual, correction, recurse, back-substitution. With
//! `root_inner_iters = 0` ("single-pass" mode) the whole application is one
//! fixed linear operator; with a positive value the root level instead runs
//! a few steps of right-preconditioned GMRES on the inexact interface Schur
//! complement, which improves quality but makes the operator vary between
//! calls.
//!
//! # Communication accounting
//!
//! Applications and interface matvecs drive a [`CommTrace`] with the
//! collectives a rank-per-part message-passing run would need:
//!
//! * assembling the interface residual after the interior-coupling product
//!   costs one all-reduce per level visited,
//! * the adjoint tall product of a rank-k correction costs one all-reduce,
//! * the replicated last-level block solve costs one all-reduce,
//! * inside an interface matvec the coupling products are left in partial
//!   form and their reduction is folded into the Arnoldi orthogonalization,
//!   which together with normalization costs two all-reduces per iteration.
//!
//! Under this accounting one application at level `l` performs exactly
//! `2 (levels - l) + 1` all-reduces, an interface matvec `2 (levels - l) - 1`,
//! and an m-step Arnoldi cycle `(2 levels - 2 l + 1) m`; [`predict_comm`]
//! returns these closed forms and the traces reproduce them exactly.

use crate::error::{Error, Result};
use crate::factor::{self, BlockJacobiPrecond, IlutFactors};
use crate::krylov;
use crate::lowrank::{self, LowRankTerm};
use crate::op::{FnOp, FnPrecond};
use crate::reorder;
use crate::scalar::Scalar;
use crate::simdist::CommTrace;
use crate::sparse::CsrMatrix;
use num_complex::Complex64;
use std::cell::RefCell;
use std::time::Instant;

type C64 = Complex64;

/// Preconditioner controls.
#[derive(Debug, Clone)]
pub struct MslrParams {
    /// Requested level count.
    pub levels: usize,
    /// Parts per level.
    pub parts: usize,
    /// Correction rank per level (capped by each interface size).
    pub rank: usize,
    /// ILUT drop tolerance.
    pub tau: f64,
    /// ILUT fill cap per row per factor.
    pub lfil: usize,
    /// Cap on thick-restart cycles when building correction terms.
    pub max_cycles: usize,
    /// Inner GMRES steps on the root interface system; 0 selects
    /// single-pass mode.
    pub root_inner_iters: usize,
    /// Imaginary diagonal shift factor handed to ILUT.
    pub shift_factor: f64,
    /// Retained blocks of the deepest interface matrix; 0 means `parts`.
    pub last_level_blocks: usize,
}

impl Default for MslrParams {
    fn default() -> Self {
        MslrParams {
            levels: 2,
            parts: 8,
            rank: 10,
            tau: 1e-2,
            lfil: 50,
            max_cycles: 5,
            root_inner_iters: 3,
            shift_factor: 0.0,
            last_level_blocks: 0,
        }
    }
}

impl MslrParams {
    pub fn single_pass(mut self) -> Self {
        self.root_inner_iters = 0;
        self
    }

    fn bj_blocks(&self) -> usize {
        if self.last_level_blocks == 0 {
            self.parts
        } else {
            self.last_level_blocks
        }
    }
}

/// One level of the hierarchy: the permutation that produced it, the
/// block-diagonal interior factors, the coupling blocks, and the rank-k
/// correction for its interface Schur complement.
#[derive(Debug, Clone)]
struct Level<S> {
    /// New-to-old permutation within this level's window.
    perm: Vec<usize>,
    /// Cumulative interior block boundaries (one entry per part plus 0).
    part_ends: Vec<usize>,
    interior_len: usize,
    interface_len: usize,
    interior_factors: Vec<IlutFactors<S>>,
    /// Interface-rows x interior-cols coupling.
    lower_coupling: CsrMatrix<S>,
    /// Interior-rows x interface-cols coupling.
    upper_coupling: CsrMatrix<S>,
    /// Interface block to be handled by the next level (or block-Jacobi at
    /// the deepest level).
    interface_block: CsrMatrix<S>,
    correction: Option<LowRankTerm>,
}

impl<S: Scalar> Level<S> {
    fn to_complex(&self) -> Level<C64> {
        Level {
            perm: self.perm.clone(),
            part_ends: self.part_ends.clone(),
            interior_len: self.interior_len,
            interface_len: self.interface_len,
            interior_factors: self.interior_factors.iter().map(|f| f.to_complex()).collect(),
            lower_coupling: self.lower_coupling.to_complex(),
            upper_coupling: self.upper_coupling.to_complex(),
            interface_block: self.interface_block.to_complex(),
            correction: self.correction.clone(),
        }
    }

    fn solve_interior(&self, b: &[S]) -> Result<Vec<S>> {
        let mut out = vec![S::zero(); self.interior_len];
        for (j, f) in self.interior_factors.iter().enumerate() {
            let range = self.part_ends[j]..self.part_ends[j + 1];
            let y = factor::lu_solve(f, &b[range.clone()])?;
            out[range].copy_from_slice(&y);
        }
        Ok(out)
    }
}

/// Setup statistics: achieved structure, fill, timings, and the
/// communication trace accumulated while building correction terms.
#[derive(Debug, Clone)]
pub struct SetupStats {
    pub achieved_levels: usize,
    pub interior_sizes: Vec<usize>,
    pub interface_sizes: Vec<usize>,
    /// Stored preconditioner entries over `nnz(A)`.
    pub fill: f64,
    pub stored_entries: usize,
    pub setup_seconds: f64,
    /// Thick-restart cycles used per level (deepest first zeros omitted).
    pub arnoldi_cycles: Vec<usize>,
    pub setup_trace: CommTrace,
}

/// The assembled multilevel preconditioner.
#[derive(Debug, Clone)]
pub struct MslrPreconditioner<S> {
    levels: Vec<Level<S>>,
    last_level: BlockJacobiPrecond<S>,
    params: MslrParams,
    stats: SetupStats,
    n: usize,
}

impl<S: Scalar> MslrPreconditioner<S> {
    pub fn setup(a: &CsrMatrix<S>, params: MslrParams) -> Result<Self> {
        if a.n_rows() != a.n_cols() {
            return Err(Error::DimensionMismatch("setup expects a square matrix".into()));
        }
        if params.levels == 0 || params.parts == 0 {
            return Err(Error::InvalidArgument(
                "levels and parts must be at least 1".into(),
            ));
        }
        let started = Instant::now();
        let ordering = reorder::multilevel_reorder(a, params.levels, params.parts)?;
        let achieved = ordering.achieved_levels;

        // split each level window into blocks and factor the interiors;
        // interior blocks never couple across parts, so the per-part
        // diagonal blocks carry everything in those rows
        let mut levels: Vec<Level<S>> = Vec::with_capacity(achieved);
        let mut current = a.clone();
        for (l, lev) in ordering.levels.iter().enumerate() {
            let permuted = current.permute_sym(&lev.perm)?;
            let d: usize = lev.part_sizes.iter().sum();
            let s = lev.separator_len;
            let n_l = d + s;
            let mut part_ends = Vec::with_capacity(lev.part_sizes.len() + 1);
            part_ends.push(0);
            for &sz in &lev.part_sizes {
                part_ends.push(part_ends.last().unwrap() + sz);
            }
            let mut factors = Vec::with_capacity(lev.part_sizes.len());
            for j in 0..lev.part_sizes.len() {
                let range = part_ends[j]..part_ends[j + 1];
                let block = permuted.block(range.clone(), range);
                let f = factor::ilut(&block, params.tau, params.lfil, params.shift_factor)
                    .map_err(|e| match e {
                        Error::ZeroPivot { row } => Error::BlockZeroPivot {
                            level: l,
                            block: j,
                            row,
                        },
                        other => other,
                    })?;
                factors.push(f);
            }
            let level = Level {
                perm: lev.perm.clone(),
                part_ends,
                interior_len: d,
                interface_len: s,
                interior_factors: factors,
                lower_coupling: permuted.block(d..n_l, 0..d),
                upper_coupling: permuted.block(0..d, d..n_l),
                interface_block: permuted.block(d..n_l, d..n_l),
                correction: None,
            };
            current = level.interface_block.clone();
            levels.push(level);
        }

        let deepest = levels
            .last()
            .map(|l| l.interface_block.clone())
            .expect("at least one level");
        let last_level =
            factor::block_jacobi_build(&deepest, params.bj_blocks(), params.tau, params.lfil)?;

        let mut pre = MslrPreconditioner {
            levels,
            last_level,
            params,
            stats: SetupStats {
                achieved_levels: achieved,
                interior_sizes: Vec::new(),
                interface_sizes: Vec::new(),
                fill: 0.0,
                stored_entries: 0,
                setup_seconds: 0.0,
                arnoldi_cycles: vec![0; achieved],
                setup_trace: CommTrace::new(),
            },
            n: a.n_rows(),
        };
        pre.stats.interior_sizes = pre.levels.iter().map(|l| l.interior_len).collect();
        pre.stats.interface_sizes = pre.levels.iter().map(|l| l.interface_len).collect();

        // corrections, bottom-up on the complex shadow of the hierarchy
        if pre.params.rank > 0 {
            let mut shadow = MslrPreconditioner {
                levels: pre.levels.iter().map(|l| l.to_complex()).collect(),
                last_level: pre.last_level.to_complex(),
                params: pre.params.clone().single_pass(),
                stats: pre.stats.clone(),
                n: pre.n,
            };
            let mut setup_trace = CommTrace::new();
            for l in (0..achieved).rev() {
                let s_l = shadow.levels[l].interface_len;
                let k_l = pre.params.rank.min(s_l);
                if k_l == 0 {
                    continue;
                }
                let (term, cycles) = if k_l >= s_l {
                    // full rank: assemble the interface operator densely so
                    // multiple eigenvalues cannot hide from a single-vector
                    // Krylov space
                    let mut g = crate::dense::DenseMatrix::<C64>::zeros(s_l, s_l);
                    let mut e = vec![C64::new(0.0, 0.0); s_l];
                    for j in 0..s_l {
                        e[j] = C64::new(1.0, 0.0);
                        let col = shadow.interface_matvec(l, &e, &mut setup_trace)?;
                        g.set_col(j, &col);
                        e[j] = C64::new(0.0, 0.0);
                    }
                    (lowrank::schur_term_from_dense(&g, k_l)?, 0)
                } else {
                    let trace_cell = RefCell::new(&mut setup_trace);
                    let op = FnOp::new(s_l, |z: &[C64]| {
                        let mut tr = trace_cell.borrow_mut();
                        let y = shadow.interface_matvec(l, z, &mut tr)?;
                        // fused orthogonalization reduce + normalization
                        tr.record_allreduce(1);
                        tr.record_allreduce(1);
                        Ok(y)
                    });
                    lowrank::restarted_schur_vectors(&op, k_l, pre.params.max_cycles)?
                };
                pre.stats.arnoldi_cycles[l] = cycles;
                shadow.levels[l].correction = Some(term.clone());
                pre.levels[l].correction = Some(term);
            }
            pre.stats.setup_trace = setup_trace;
        }

        let mut stored = pre.last_level.nnz();
        for level in &pre.levels {
            stored += level
                .interior_factors
                .iter()
                .map(|f| f.nnz())
                .sum::<usize>();
            if let Some(t) = &level.correction {
                stored += t.stored_entries();
            }
        }
        pre.stats.stored_entries = stored;
        pre.stats.fill = stored as f64 / a.nnz().max(1) as f64;
        pre.stats.setup_seconds = started.elapsed().as_secs_f64();
        Ok(pre)
    }

    pub fn achieved_levels(&self) -> usize {
        self.stats.achieved_levels
    }

    pub fn stats(&self) -> &SetupStats {
        &self.stats
    }

    pub fn params(&self) -> &MslrParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Window dimension at `level` (the whole system at level 0).
    pub fn level_dim(&self, level: usize) -> usize {
        if level == 0 {
            self.n
        } else {
            self.levels[level - 1].interface_len
        }
    }

    /// Interface dimension at `level`.
    pub fn interface_dim(&self, level: usize) -> usize {
        self.levels[level].interface_len
    }

    /// New-to-old permutation applied within the window of `level`.
    pub fn level_permutation(&self, level: usize) -> &[usize] {
        &self.levels[level].perm
    }

    /// Cumulative interior part boundaries of `level`.
    pub fn level_part_ends(&self, level: usize) -> &[usize] {
        &self.levels[level].part_ends
    }

    /// Coupling blocks of `level`: (interface x interior,
    /// interior x interface, interface x interface).
    pub fn level_coupling_blocks(
        &self,
        level: usize,
    ) -> (&CsrMatrix<S>, &CsrMatrix<S>, &CsrMatrix<S>) {
        let lev = &self.levels[level];
        (
            &lev.lower_coupling,
            &lev.upper_coupling,
            &lev.interface_block,
        )
    }

    /// Correction rank retained at `level`.
    pub fn correction_rank(&self, level: usize) -> usize {
        self.levels[level]
            .correction
            .as_ref()
            .map_or(0, |t| t.rank())
    }

    /// Retained interface eigenvalue estimates at `level`, for spectrum
    /// dumps.
    pub fn correction_eigenvalues(&self, level: usize) -> Vec<C64> {
        self.levels[level]
            .correction
            .as_ref()
            .map_or_else(Vec::new, |t| t.eigenvalues())
    }

    /// Apply the preconditioner at the root level.
    pub fn apply(&self, b: &[S]) -> Result<Vec<S>> {
        let mut scratch = CommTrace::new();
        self.apply_traced(b, 0, &mut scratch)
    }

    /// Apply the preconditioner for the system at `level`, recording
    /// communication.
    pub fn apply_traced(&self, b: &[S], level: usize, trace: &mut CommTrace) -> Result<Vec<S>> {
        if level >= self.levels.len() {
            return Err(Error::InvalidArgument(format!(
                "level {level} out of range ({} levels)",
                self.levels.len()
            )));
        }
        if b.len() != self.level_dim(level) {
            return Err(Error::DimensionMismatch(format!(
                "apply at level {level}: dimension {} vs vector length {}",
                self.level_dim(level),
                b.len()
            )));
        }
        let lev = &self.levels[level];
        let d = lev.interior_len;

        let pb: Vec<S> = lev.perm.iter().map(|&old| b[old]).collect();
        let (b1, b2) = pb.split_at(d);

        let z1 = lev.solve_interior(b1)?;
        let t = lev.lower_coupling.spmv(&z1)?;
        let z2: Vec<S> = b2.iter().zip(&t).map(|(&a, &b)| a - b).collect();
        if lev.interface_len > 0 {
            trace.record_allreduce(lev.interface_len);
        }

        let y2 = if level == 0 && self.params.root_inner_iters > 0 {
            self.root_inner_solve(&z2, trace)?
        } else {
            self.interface_solve(level, &z2, trace)?
        };

        let w = lev.upper_coupling.spmv(&y2)?;
        let z1b = lev.solve_interior(&w)?;
        let y1: Vec<S> = z1.iter().zip(&z1b).map(|(&a, &b)| a - b).collect();

        let mut out = vec![S::zero(); pb.len()];
        for (new, &old) in lev.perm.iter().enumerate() {
            out[old] = if new < d { y1[new] } else { y2[new - d] };
        }
        Ok(out)
    }

    /// Correction plus descent: approximates the interface Schur complement
    /// inverse of `level` applied to `z2`.
    fn interface_solve(&self, level: usize, z2: &[S], trace: &mut CommTrace) -> Result<Vec<S>> {
        let lev = &self.levels[level];
        let rhs = match &lev.correction {
            Some(term) if term.rank() > 0 => {
                let u2 = lowrank::apply_correction(term, z2)?;
                trace.record_allreduce(term.rank());
                u2.iter().zip(z2).map(|(&u, &z)| u + z).collect()
            }
            _ => z2.to_vec(),
        };
        if level + 1 < self.levels.len() {
            self.apply_traced(&rhs, level + 1, trace)
        } else {
            let y = self.last_level.apply(&rhs)?;
            if self.last_level.n() > 0 {
                trace.record_allreduce(self.last_level.n());
            }
            Ok(y)
        }
    }

    /// A few steps of right-preconditioned GMRES on the inexact root
    /// interface Schur complement, preconditioned by the correction-plus-
    /// descent solve.
    fn root_inner_solve(&self, z2: &[S], trace: &mut CommTrace) -> Result<Vec<S>> {
        let lev = &self.levels[0];
        let s = lev.interface_len;
        if s == 0 {
            return Ok(Vec::new());
        }
        let iters = self.params.root_inner_iters;
        let cell = RefCell::new(trace);
        let op = FnOp::new(s, |v: &[S]| {
            let mut tr = cell.borrow_mut();
            self.inexact_schur_matvec(0, v, &mut tr)
        });
        let pc = FnPrecond::new(|v: &[S]| {
            let mut tr = cell.borrow_mut();
            self.interface_solve(0, v, &mut tr)
        });
        let (y, _) = krylov::gmres_right(&op, &pc, z2, iters, 1e-14, iters)?;
        Ok(y)
    }

    /// `C_l v - E_l (LU)^{-1} F_l v`: the interface Schur complement with
    /// the interior solve replaced by its incomplete factors.
    fn inexact_schur_matvec(&self, level: usize, v: &[S], trace: &mut CommTrace) -> Result<Vec<S>> {
        let lev = &self.levels[level];
        let fv = lev.upper_coupling.spmv(v)?;
        let bf = lev.solve_interior(&fv)?;
        let ef = lev.lower_coupling.spmv(&bf)?;
        if lev.interface_len > 0 {
            trace.record_allreduce(lev.interface_len);
        }
        let cv = lev.interface_block.spmv(v)?;
        Ok(cv.iter().zip(&ef).map(|(&a, &b)| a - b).collect())
    }

    /// The level-`level` interface operator
    /// `E (LU)^{-1} F  C^{-1}`: coupling products around the recursive
    /// lower-level solve. The coupling products stay in partial form here;
    /// their assembly is accounted to the orthogonalization reduce of the
    /// consuming Arnoldi iteration.
    pub fn interface_matvec(
        &self,
        level: usize,
        z: &[S],
        trace: &mut CommTrace,
    ) -> Result<Vec<S>> {
        let lev = &self.levels[level];
        if z.len() != lev.interface_len {
            return Err(Error::DimensionMismatch(format!(
                "interface matvec at level {level}: dimension {} vs vector length {}",
                lev.interface_len,
                z.len()
            )));
        }
        let y = if level + 1 < self.levels.len() {
            self.apply_traced(z, level + 1, trace)?
        } else {
            let y = self.last_level.apply(z)?;
            if self.last_level.n() > 0 {
                trace.record_allreduce(self.last_level.n());
            }
            y
        };
        let fy = lev.upper_coupling.spmv(&y)?;
        let by = lev.solve_interior(&fy)?;
        lev.lower_coupling.spmv(&by)
    }

    /// Untraced interface matvec.
    pub fn ghat_matvec(&self, level: usize, z: &[S]) -> Result<Vec<S>> {
        let mut scratch = CommTrace::new();
        self.interface_matvec(level, z, &mut scratch)
    }

    /// Run one `m`-step Arnoldi cycle on the instrumented interface
    /// operator of `level`, exactly as the setup phase does, recording its
    /// communication. Returns the steps actually performed.
    pub fn traced_arnoldi_cycle(
        &self,
        level: usize,
        m: usize,
        trace: &mut CommTrace,
    ) -> Result<usize> {
        let s = self.interface_dim(level);
        let cell = RefCell::new(trace);
        let op = FnOp::new(s, |z: &[S]| {
            let mut tr = cell.borrow_mut();
            let y = self.interface_matvec(level, z, &mut tr)?;
            tr.record_allreduce(1);
            tr.record_allreduce(1);
            Ok(y)
        });
        let ones = vec![S::one(); s];
        let ar = lowrank::arnoldi(&op, m, &ones)?;
        Ok(ar.steps)
    }

}

/// Closed-form all-reduce counts for one preconditioner application at
/// `level` and per-iteration of a setup Arnoldi cycle at that level
/// (single-pass mode, positive rank).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommPrediction {
    pub apply_allreduce: u64,
    pub interface_matvec_allreduce: u64,
}

impl CommPrediction {
    pub fn arnoldi_cycle_allreduce(&self, m: usize) -> u64 {
        (self.interface_matvec_allreduce + 2) * m as u64
    }
}

pub fn predict_comm(params: &MslrParams, level: usize) -> Result<CommPrediction> {
    if level >= params.levels {
        return Err(Error::InvalidArgument(format!(
            "level {level} out of range ({} levels)",
            params.levels
        )));
    }
    let depth = (params.levels - level) as u64;
    Ok(CommPrediction {
        apply_allreduce: 2 * depth + 1,
        interface_matvec_allreduce: 2 * depth - 1,
    })
}

/// Adapter exposing the preconditioner to the Krylov solvers while
/// accumulating the solve-phase communication trace.
pub struct TracedPrecond<'a, S> {
    pre: &'a MslrPreconditioner<S>,
    trace: RefCell<CommTrace>,
}

impl<'a, S: Scalar> TracedPrecond<'a, S> {
    pub fn new(pre: &'a MslrPreconditioner<S>) -> Self {
        TracedPrecond {
            pre,
            trace: RefCell::new(CommTrace::new()),
        }
    }

    pub fn take_trace(&self) -> CommTrace {
        self.trace.borrow().clone()
    }
}

impl<'a, S: Scalar> crate::op::Preconditioner<S> for TracedPrecond<'a, S> {
    fn apply(&self, r: &[S]) -> Result<Vec<S>> {
        let mut tr = self.trace.borrow_mut();
        self.pre.apply_traced(r, 0, &mut tr)
    }
}
