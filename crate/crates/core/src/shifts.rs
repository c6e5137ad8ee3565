//! Design suite for multi-pole complex-shift preconditioners.
//!
//! Poles sit off the real axis (on a circle by default). A preconditioner
//! is either a weighted combination `M^{-1} = sum_j alpha_j (A - s_j I)^{-1}`
//! with weights from an equality-constrained least-squares problem, or a
//! Richardson compounding of the shifted solves. The residual of the
//! combined form at an eigenvalue `t` is the rational function
//! `rho(t) = 1 - t * sum_j alpha_j / (t - s_j)`; Richardson compounding has
//! the product form `rho_k(t) = prod_j (-s_j) / (t - s_j)`.
//!
//! The weights minimize `integral of |rho|^2 w` over a user interval under
//! `sum alpha = 1`, which reduces to a quadratic program over the Grammian
//! of the rational basis `phi_j(t) = s_j / (t - s_j)`.

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::factor::{self, IlutFactors};
use crate::sparse::CsrMatrix;
use crate::vecops;
use num_complex::Complex64;
use std::collections::HashMap;
use std::io::Write;

type C64 = Complex64;

/// A set of complex poles, none on the real axis.
#[derive(Debug, Clone)]
pub struct ShiftSet {
    poles: Vec<C64>,
    radius: f64,
}

impl ShiftSet {
    /// `k` poles on the circle of radius `r`, rotated off the real axis:
    /// `s_j = r e^{i pi (2j - 1) / k}` for `j = 1..k`. `k` must be even so
    /// the set is closed under conjugation without touching the axis.
    pub fn circle_poles(k: usize, r: f64) -> Result<Self> {
        if k == 0 || k % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "pole count must be even and positive, got {k}"
            )));
        }
        if r <= 0.0 {
            return Err(Error::InvalidArgument("radius must be positive".into()));
        }
        let poles = (1..=k)
            .map(|j| {
                let angle = std::f64::consts::PI * (2 * j - 1) as f64 / k as f64;
                C64::new(r * angle.cos(), r * angle.sin())
            })
            .collect();
        Ok(ShiftSet { poles, radius: r })
    }

    /// Wrap explicit poles, rejecting any on the real axis.
    pub fn from_poles(poles: Vec<C64>) -> Result<Self> {
        if poles.is_empty() {
            return Err(Error::InvalidArgument("at least one pole required".into()));
        }
        for p in &poles {
            if p.im == 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "pole {p} lies on the real axis"
                )));
            }
        }
        let radius = poles.iter().map(|p| p.norm()).fold(0.0, f64::max);
        Ok(ShiftSet { poles, radius })
    }

    pub fn poles(&self) -> &[C64] {
        &self.poles
    }

    pub fn len(&self) -> usize {
        self.poles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Pair each upper-half-plane pole with its conjugate. `None` when the
    /// set is not closed under conjugation.
    pub fn conjugate_pairs(&self) -> Option<Vec<(usize, usize)>> {
        let mut used = vec![false; self.poles.len()];
        let mut pairs = Vec::new();
        for (i, p) in self.poles.iter().enumerate() {
            if used[i] || p.im <= 0.0 {
                continue;
            }
            let partner = self.poles.iter().enumerate().find(|(j, q)| {
                !used[*j] && *j != i && (q.conj() - p).norm() <= 1e-14 * p.norm().max(1.0)
            });
            match partner {
                Some((j, _)) => {
                    used[i] = true;
                    used[j] = true;
                    pairs.push((i, j));
                }
                None => return None,
            }
        }
        if used.iter().zip(&self.poles).all(|(&u, p)| u || p.im < 0.0) && 2 * pairs.len() == self.poles.len()
        {
            Some(pairs)
        } else {
            None
        }
    }
}

/// Piecewise-constant weight on an interval: `0` outside `[lo, hi]`,
/// an emphasis value inside listed pieces, `1` elsewhere in the interval.
#[derive(Debug, Clone)]
pub struct WeightFn {
    pub lo: f64,
    pub hi: f64,
    /// `(from, to, weight)` emphasis pieces.
    pub emphasis: Vec<(f64, f64, f64)>,
}

impl WeightFn {
    /// The default design weight: 50 on `[0, 0.15]`, 1 elsewhere in the
    /// interval.
    pub fn emphasized(lo: f64, hi: f64) -> Self {
        WeightFn {
            lo,
            hi,
            emphasis: vec![(0.0, 0.15, 50.0)],
        }
    }

    pub fn flat(lo: f64, hi: f64) -> Self {
        WeightFn {
            lo,
            hi,
            emphasis: Vec::new(),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t < self.lo || t > self.hi {
            return 0.0;
        }
        for &(from, to, w) in &self.emphasis {
            if t >= from && t <= to {
                return w;
            }
        }
        1.0
    }

    /// Sorted subdivision points of `[lo, hi]` at the weight jumps.
    fn breakpoints(&self) -> Vec<f64> {
        let mut pts = vec![self.lo, self.hi];
        for &(from, to, _) in &self.emphasis {
            if from > self.lo && from < self.hi {
                pts.push(from);
            }
            if to > self.lo && to < self.hi {
                pts.push(to);
            }
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        pts
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on the
/// Legendre recurrence.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn gl_integrate(f: &impl Fn(f64) -> C64, a: f64, b: f64, nodes: &[f64], weights: &[f64]) -> C64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = C64::new(0.0, 0.0);
    for (&x, &w) in nodes.iter().zip(weights) {
        acc += f(mid + half * x) * w;
    }
    acc * half
}

fn adaptive_integrate(
    f: &impl Fn(f64) -> C64,
    a: f64,
    b: f64,
    tol: f64,
    nodes: &[f64],
    weights: &[f64],
    depth: usize,
) -> C64 {
    let whole = gl_integrate(f, a, b, nodes, weights);
    let mid = 0.5 * (a + b);
    let left = gl_integrate(f, a, mid, nodes, weights);
    let right = gl_integrate(f, mid, b, nodes, weights);
    let refined = left + right;
    if (whole - refined).norm() <= tol || depth >= 30 {
        refined
    } else {
        adaptive_integrate(f, a, mid, 0.5 * tol, nodes, weights, depth + 1)
            + adaptive_integrate(f, mid, b, 0.5 * tol, nodes, weights, depth + 1)
    }
}

const QUAD_TOL: f64 = 1e-10;

/// Grammian of the rational basis `phi_j(t) = s_j / (t - s_j)` under the
/// weighted interval inner product, split at the weight's jump points and
/// integrated adaptively to absolute tolerance `1e-10`.
pub fn grammian(ss: &ShiftSet, weight: &WeightFn) -> Result<DenseMatrix<C64>> {
    if weight.lo >= weight.hi {
        return Err(Error::InvalidArgument(
            "weight interval must satisfy lo < hi".into(),
        ));
    }
    let k = ss.len();
    let (nodes, gl_weights) = gauss_legendre(16);
    let pts = weight.breakpoints();
    let mut gram = DenseMatrix::<C64>::zeros(k, k);
    for i in 0..k {
        for j in 0..=i {
            let si = ss.poles[i];
            let sj = ss.poles[j];
            let f = |t: f64| {
                let phi_i = si / (C64::new(t, 0.0) - si);
                let phi_j = sj / (C64::new(t, 0.0) - sj);
                phi_i * phi_j.conj()
            };
            let mut acc = C64::new(0.0, 0.0);
            for seg in pts.windows(2) {
                let w = weight.eval(0.5 * (seg[0] + seg[1]));
                if w == 0.0 {
                    continue;
                }
                let tol = QUAD_TOL / (pts.len() - 1) as f64 / w;
                acc += adaptive_integrate(&f, seg[0], seg[1], tol, &nodes, &gl_weights, 0) * w;
            }
            gram.set(i, j, acc);
            if j != i {
                gram.set(j, i, acc.conj());
            }
        }
    }
    Ok(gram)
}

/// Solve the bordered optimality system
/// `[[G, e], [e^T, 0]] [a; mu] = [0; 1]` by dense LU with partial pivoting.
pub fn solve_qp(gram: &DenseMatrix<C64>) -> Result<(Vec<C64>, C64)> {
    let k = gram.rows();
    if k == 0 || gram.cols() != k {
        return Err(Error::DimensionMismatch("grammian must be square".into()));
    }
    let mut kkt = DenseMatrix::<C64>::zeros(k + 1, k + 1);
    for j in 0..k {
        for i in 0..k {
            kkt.set(i, j, gram.get(i, j));
        }
        kkt.set(k, j, C64::new(1.0, 0.0));
        kkt.set(j, k, C64::new(1.0, 0.0));
    }
    let mut rhs = vec![C64::new(0.0, 0.0); k + 1];
    rhs[k] = C64::new(1.0, 0.0);
    let sol = kkt
        .lu()
        .map_err(|_| Error::Singular("optimality system is singular".into()))?
        .solve(&rhs)?;
    let alphas = sol[..k].to_vec();
    Ok((alphas, sol[k]))
}

/// A complete combination design: poles, weights, Grammian, interval data.
#[derive(Debug, Clone)]
pub struct ShiftDesign {
    pub shifts: ShiftSet,
    pub alphas: Vec<C64>,
    pub grammian: DenseMatrix<C64>,
    pub multiplier: C64,
    pub weight: WeightFn,
    /// Achieved objective `a^H G a` (real for a Hermitian Grammian).
    pub objective: f64,
}

/// Build the optimal-combination design for a pole set over a weighted
/// interval.
pub fn design_shifts(ss: &ShiftSet, weight: &WeightFn) -> Result<ShiftDesign> {
    let gram = grammian(ss, weight)?;
    let (alphas, multiplier) = solve_qp(&gram)?;
    let objective = quadratic_objective(&gram, &alphas);
    Ok(ShiftDesign {
        shifts: ss.clone(),
        alphas,
        grammian: gram,
        multiplier,
        weight: weight.clone(),
        objective,
    })
}

pub fn quadratic_objective(gram: &DenseMatrix<C64>, alphas: &[C64]) -> f64 {
    let ga = gram.matvec(alphas).expect("conforming design");
    vecops::dot_uc(alphas, &ga).re
}

impl ShiftDesign {
    /// Residual of the optimality system, for verification.
    pub fn kkt_residual(&self) -> f64 {
        let k = self.alphas.len();
        let ga = self.grammian.matvec(&self.alphas).expect("conforming");
        let mut r2 = 0.0;
        for i in 0..k {
            r2 += (ga[i] + self.multiplier).norm_sqr();
        }
        let sum: C64 = self.alphas.iter().sum();
        r2 += (sum - C64::new(1.0, 0.0)).norm_sqr();
        r2.sqrt()
    }

    /// True when the pole set is closed under conjugation and the weights
    /// of conjugate poles are conjugate to `tol`.
    pub fn conjugate_symmetric(&self, tol: f64) -> Option<Vec<(usize, usize)>> {
        let pairs = self.shifts.conjugate_pairs()?;
        for &(i, j) in &pairs {
            if (self.alphas[i].conj() - self.alphas[j]).norm() > tol {
                return None;
            }
        }
        Some(pairs)
    }

    /// Poles, weights, and the objective as CSV.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "pole_re,pole_im,alpha_re,alpha_im")?;
        for (p, a) in self.shifts.poles().iter().zip(&self.alphas) {
            writeln!(w, "{},{},{},{}", p.re, p.im, a.re, a.im)?;
        }
        writeln!(w, "# objective,{:e}", self.objective)?;
        Ok(())
    }
}

/// A factory of shifted solves `(A - s I)^{-1} r` that counts how many
/// solves were performed.
pub trait PoleSolver {
    fn dim(&self) -> usize;
    fn solve(&mut self, pole: C64, rhs: &[C64]) -> Result<Vec<C64>>;
    fn solve_count(&self) -> usize;
}

fn pole_key(pole: C64) -> (u64, u64) {
    (pole.re.to_bits(), pole.im.to_bits())
}

/// Exact dense LU solves, one cached factorization per distinct pole.
pub struct DenseShiftSolver {
    a: DenseMatrix<C64>,
    cache: HashMap<(u64, u64), crate::dense::DenseLu<C64>>,
    count: usize,
}

impl DenseShiftSolver {
    pub fn new<S: crate::scalar::Scalar>(a: &CsrMatrix<S>) -> Self {
        DenseShiftSolver {
            a: a.to_complex().to_dense(),
            cache: HashMap::new(),
            count: 0,
        }
    }
}

impl PoleSolver for DenseShiftSolver {
    fn dim(&self) -> usize {
        self.a.rows()
    }

    fn solve(&mut self, pole: C64, rhs: &[C64]) -> Result<Vec<C64>> {
        let key = pole_key(pole);
        if !self.cache.contains_key(&key) {
            let n = self.a.rows();
            let mut shifted = self.a.clone();
            for i in 0..n {
                let d = shifted.get(i, i) - pole;
                shifted.set(i, i, d);
            }
            self.cache.insert(key, shifted.lu()?);
        }
        self.count += 1;
        self.cache[&key].solve(rhs)
    }

    fn solve_count(&self) -> usize {
        self.count
    }
}

/// Incomplete shifted solves through ILUT factors of `A - s I`.
pub struct IlutShiftSolver {
    a: CsrMatrix<C64>,
    tau: f64,
    lfil: usize,
    cache: HashMap<(u64, u64), IlutFactors<C64>>,
    count: usize,
}

impl IlutShiftSolver {
    pub fn new<S: crate::scalar::Scalar>(a: &CsrMatrix<S>, tau: f64, lfil: usize) -> Self {
        IlutShiftSolver {
            a: a.to_complex(),
            tau,
            lfil,
            cache: HashMap::new(),
            count: 0,
        }
    }
}

impl PoleSolver for IlutShiftSolver {
    fn dim(&self) -> usize {
        self.a.n_rows()
    }

    fn solve(&mut self, pole: C64, rhs: &[C64]) -> Result<Vec<C64>> {
        let key = pole_key(pole);
        if !self.cache.contains_key(&key) {
            let shifted = self.a.add_diagonal(-pole)?;
            self.cache
                .insert(key, factor::ilut(&shifted, self.tau, self.lfil, 0.0)?);
        }
        self.count += 1;
        factor::lu_solve(&self.cache[&key], rhs)
    }

    fn solve_count(&self) -> usize {
        self.count
    }
}

/// Apply the combined preconditioner `sum_j alpha_j (A - s_j I)^{-1}` to a
/// complex vector; one solve per pole.
pub fn apply_combined(
    design: &ShiftDesign,
    solver: &mut dyn PoleSolver,
    r: &[C64],
) -> Result<Vec<C64>> {
    let mut out = vec![C64::new(0.0, 0.0); r.len()];
    for (&pole, &alpha) in design.shifts.poles().iter().zip(&design.alphas) {
        let v = solver.solve(pole, r)?;
        for (o, vi) in out.iter_mut().zip(v) {
            *o += alpha * vi;
        }
    }
    Ok(out)
}

/// Apply the combined preconditioner to a real vector for a real matrix.
///
/// For a conjugate-symmetric design only the upper-half-plane poles are
/// solved (half the solves); conjugate contributions come from conjugating
/// solutions. Falls back to the full complex combination (projected onto
/// its real part) when the design is not conjugate-symmetric.
pub fn apply_combined_real(
    design: &ShiftDesign,
    solver: &mut dyn PoleSolver,
    r: &[f64],
) -> Result<Vec<f64>> {
    let rc: Vec<C64> = r.iter().map(|&x| C64::new(x, 0.0)).collect();
    match design.conjugate_symmetric(1e-10) {
        Some(pairs) => {
            let mut out = vec![0.0; r.len()];
            for (i, _) in pairs {
                let v = solver.solve(design.shifts.poles()[i], &rc)?;
                let alpha = design.alphas[i];
                for (o, vi) in out.iter_mut().zip(v) {
                    *o += 2.0 * (alpha * vi).re;
                }
            }
            Ok(out)
        }
        None => {
            let full = apply_combined(design, solver, &rc)?;
            Ok(full.iter().map(|z| z.re).collect())
        }
    }
}

/// Richardson compounding: one pass over the pole sequence, each step
/// solving with one shifted matrix and updating the residual. With exact
/// solves the final residual is `rho_k(A) r_0` for the product-form
/// rational function of the visited poles.
///
/// Returns the final iterate and the residual-norm history (starting with
/// `||r_0||`).
pub fn richardson_compound(
    a: &CsrMatrix<C64>,
    solver: &mut dyn PoleSolver,
    pole_sequence: &[C64],
    b: &[C64],
    x0: &[C64],
) -> Result<(Vec<C64>, Vec<f64>)> {
    let ax = a.spmv(x0)?;
    let mut x = x0.to_vec();
    let mut r: Vec<C64> = b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
    let mut history = vec![vecops::norm2(&r)];
    for &pole in pole_sequence {
        let delta = solver.solve(pole, &r)?;
        for (xi, di) in x.iter_mut().zip(&delta) {
            *xi += di;
        }
        let adelta = a.spmv(&delta)?;
        for (ri, adi) in r.iter_mut().zip(&adelta) {
            *ri -= adi;
        }
        history.push(vecops::norm2(&r));
    }
    Ok((x, history))
}

/// Two Richardson steps with a conjugate pole pair on real data, folded
/// into one complex solve:
/// `x2 = x0 + Re(v) - (rho / theta) Im(v)` for `v = (A - s I)^{-1} r0`,
/// `s = rho + i theta`.
pub fn conjugate_pair_step(
    solver: &mut dyn PoleSolver,
    sigma: C64,
    r0: &[f64],
    x0: &[f64],
) -> Result<Vec<f64>> {
    if sigma.im == 0.0 {
        return Err(Error::InvalidArgument(
            "conjugate pair step needs a strictly complex pole".into(),
        ));
    }
    let rc: Vec<C64> = r0.iter().map(|&x| C64::new(x, 0.0)).collect();
    let v = solver.solve(sigma, &rc)?;
    let ratio = sigma.re / sigma.im;
    Ok(x0
        .iter()
        .zip(&v)
        .map(|(&x, vi)| x + vi.re - ratio * vi.im)
        .collect())
}

/// Product-form residual function of Richardson compounding.
pub fn rho_product(pole_sequence: &[C64], lambda: C64) -> Result<C64> {
    let mut acc = C64::new(1.0, 0.0);
    for &pole in pole_sequence {
        let denom = lambda - pole;
        if denom.norm() == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "rho evaluated at the pole {pole}"
            )));
        }
        acc *= -pole / denom;
    }
    Ok(acc)
}

/// Combined-form residual function `1 - lambda * sum alpha_j/(lambda - s_j)`.
pub fn rho_combined(design: &ShiftDesign, lambda: C64) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for (&pole, &alpha) in design.shifts.poles().iter().zip(&design.alphas) {
        let denom = lambda - pole;
        if denom.norm() == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "rho evaluated at the pole {pole}"
            )));
        }
        acc += alpha / denom;
    }
    Ok(C64::new(1.0, 0.0) - lambda * acc)
}

/// `(eigenvalue, |1 - rho(eigenvalue)|)` rows for spectrum dumps.
pub fn write_spectrum_csv(
    design: &ShiftDesign,
    eigenvalues: &[f64],
    mut w: impl Write,
) -> Result<()> {
    writeln!(w, "lambda,precond_abs").map_err(Error::Io)?;
    for &ev in eigenvalues {
        let rho = rho_combined(design, C64::new(ev, 0.0))?;
        let precond = (C64::new(1.0, 0.0) - rho).norm();
        writeln!(w, "{ev},{precond:e}").map_err(Error::Io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probgen;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn four_circle_poles_match_the_listed_values() {
        let ss = ShiftSet::circle_poles(4, 0.8).unwrap();
        let h = 0.8 * std::f64::consts::FRAC_1_SQRT_2;
        let expect = [c(h, h), c(-h, h), c(-h, -h), c(h, -h)];
        for (p, e) in ss.poles().iter().zip(&expect) {
            assert!((p - e).norm() <= 1e-15, "{p} vs {e}");
        }
    }

    #[test]
    fn two_poles_on_the_unit_circle_are_conjugate_imaginaries() {
        let ss = ShiftSet::circle_poles(2, 1.0).unwrap();
        assert!((ss.poles()[0] - c(0.0, 1.0)).norm() <= 1e-15);
        assert!((ss.poles()[1] - c(0.0, -1.0)).norm() <= 1e-15);
    }

    #[test]
    fn poles_stay_off_the_real_axis() {
        for k in [2usize, 4, 6, 8, 10] {
            let ss = ShiftSet::circle_poles(k, 0.8).unwrap();
            for p in ss.poles() {
                assert!(p.im.abs() > 0.0);
            }
            assert!(ss.conjugate_pairs().is_some());
        }
        assert!(ShiftSet::circle_poles(3, 1.0).is_err());
        assert!(ShiftSet::from_poles(vec![c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn weight_function_cases() {
        let w = WeightFn::emphasized(-2.0, 2.0);
        assert_eq!(w.eval(0.1), 50.0);
        assert_eq!(w.eval(1.0), 1.0);
        assert_eq!(w.eval(-3.0), 0.0);
        assert_eq!(w.eval(-1.0), 1.0);
    }

    #[test]
    fn single_pole_grammian_is_positive_real() {
        let ss = ShiftSet::circle_poles(2, 0.8).unwrap();
        let one = ShiftSet::from_poles(vec![ss.poles()[0]]).unwrap();
        let g = grammian(&one, &WeightFn::emphasized(-2.0, 2.0)).unwrap();
        let v = g.get(0, 0);
        assert!(v.im.abs() < 1e-14);
        assert!(v.re > 0.0);
    }

    #[test]
    fn grammian_is_hermitian_and_matches_a_riemann_oracle() {
        let ss = ShiftSet::circle_poles(4, 0.8).unwrap();
        let w = WeightFn::emphasized(-2.0, 2.0);
        let g = grammian(&ss, &w).unwrap();
        // hermitian
        for i in 0..4 {
            for j in 0..4 {
                assert!((g.get(i, j) - g.get(j, i).conj()).norm() <= 1e-12);
            }
        }
        // million-point Riemann oracle on a couple of entries
        let riemann = |i: usize, j: usize| -> C64 {
            let n = 1_000_000usize;
            let (lo, hi) = (w.lo, w.hi);
            let h = (hi - lo) / n as f64;
            let mut acc = c(0.0, 0.0);
            for step in 0..n {
                let t = lo + (step as f64 + 0.5) * h;
                let phi_i = ss.poles()[i] / (c(t, 0.0) - ss.poles()[i]);
                let phi_j = ss.poles()[j] / (c(t, 0.0) - ss.poles()[j]);
                acc += phi_i * phi_j.conj() * w.eval(t);
            }
            acc * h
        };
        for (i, j) in [(0usize, 0usize), (0, 1), (2, 3)] {
            let oracle = riemann(i, j);
            let got = g.get(i, j);
            assert!(
                (got - oracle).norm() <= 1e-6 * oracle.norm().max(1.0),
                "entry ({i},{j}): {got} vs {oracle}"
            );
        }
    }

    #[test]
    fn single_variable_qp_is_forced_by_the_constraint() {
        let g = DenseMatrix::from_fn(1, 1, |_, _| c(2.5, 0.0));
        let (alphas, _) = solve_qp(&g).unwrap();
        assert!((alphas[0] - c(1.0, 0.0)).norm() <= 1e-14);
    }

    #[test]
    fn optimal_design_satisfies_the_optimality_system() {
        let ss = ShiftSet::circle_poles(4, 0.8).unwrap();
        let design = design_shifts(&ss, &WeightFn::emphasized(-2.0, 2.0)).unwrap();
        assert!(design.kkt_residual() <= 1e-12);
        let sum: C64 = design.alphas.iter().sum();
        assert!((sum - c(1.0, 0.0)).norm() <= 1e-12);
    }

    #[test]
    fn optimal_weights_are_conjugate_symmetric() {
        let ss = ShiftSet::circle_poles(4, 0.8).unwrap();
        let design = design_shifts(&ss, &WeightFn::emphasized(-2.0, 2.0)).unwrap();
        assert!(design.conjugate_symmetric(1e-10).is_some());
    }

    #[test]
    fn qp_solution_beats_random_feasible_weights() {
        let ss = ShiftSet::circle_poles(4, 0.8).unwrap();
        let design = design_shifts(&ss, &WeightFn::emphasized(-2.0, 2.0)).unwrap();
        let mut rng = StdRng::seed_from_u64(81);
        let k = 4;
        for _ in 0..50 {
            let delta: Vec<C64> = (0..k)
                .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let mean = delta.iter().sum::<C64>() / k as f64;
            let feasible: Vec<C64> = delta
                .iter()
                .map(|&d| c(1.0 / k as f64, 0.0) + d - mean)
                .collect();
            let sum: C64 = feasible.iter().sum();
            assert!((sum - c(1.0, 0.0)).norm() < 1e-12);
            let other = quadratic_objective(&design.grammian, &feasible);
            assert!(design.objective <= other + 1e-12);
        }
    }

    #[test]
    fn combined_preconditioner_on_a_scalar_system() {
        let ss = ShiftSet::circle_poles(4, 0.8).unwrap();
        let design = design_shifts(&ss, &WeightFn::emphasized(-2.0, 2.0)).unwrap();
        let a = CsrMatrix::<C64>::identity(1);
        let mut solver = DenseShiftSolver::new(&a);
        let r = vec![c(1.0, 0.0)];
        let got = apply_combined(&design, &mut solver, &r).unwrap()[0];
        let expect: C64 = design
            .shifts
            .poles()
            .iter()
            .zip(&design.alphas)
            .map(|(&p, &al)| al / (c(1.0, 0.0) - p))
            .sum();
        assert!((got - expect).norm() <= 1e-13);
        // preconditioned value at eigenvalue 1 is 1 - rho(1)
        let rho = rho_combined(&design, c(1.0, 0.0)).unwrap();
        assert!((got * c(1.0, 0.0) - (c(1.0, 0.0) - rho)).norm() <= 1e-13);
    }

    #[test]
    fn single_selected_pole_degenerates_to_one_shifted_solve() {
        let ss = ShiftSet::circle_poles(4, 0.8).unwrap();
        let mut design = design_shifts(&ss, &WeightFn::emphasized(-2.0, 2.0)).unwrap();
        design.alphas = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let a: CsrMatrix<C64> = probgen::uniform_spectrum_diag(6, 0.5, 3.0);
        let mut solver = DenseShiftSolver::new(&a);
        let mut rng = StdRng::seed_from_u64(82);
        let r: Vec<C64> = (0..6).map(|_| c(rng.gen(), rng.gen())).collect();
        let got = apply_combined(&design, &mut solver, &r).unwrap();
        let mut direct = DenseShiftSolver::new(&a);
        let expect = direct.solve(ss.poles()[0], &r).unwrap();
        for (u, v) in got.iter().zip(&expect) {
            assert!((u - v).norm() <= 1e-13);
        }
    }

    #[test]
    fn real_combination_is_real_and_halves_the_solves() {
        let ss = ShiftSet::circle_poles(4, 0.8).unwrap();
        let design = design_shifts(&ss, &WeightFn::emphasized(-2.0, 2.0)).unwrap();
        let a: CsrMatrix<f64> = probgen::shifted_laplacian_2d(6, 5, 1.0);
        let mut rng = StdRng::seed_from_u64(83);
        let r: Vec<f64> = (0..30).map(|_| rng.gen::<f64>() - 0.5).collect();

        // oracle: all four solves, imaginary part must vanish
        let mut full_solver = DenseShiftSolver::new(&a);
        let rc: Vec<C64> = r.iter().map(|&x| c(x, 0.0)).collect();
        let full = apply_combined(&design, &mut full_solver, &rc).unwrap();
        assert_eq!(full_solver.solve_count(), 4);
        let imag = full.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        assert!(imag <= 1e-12, "imaginary residue {imag:e}");

        let mut half_solver = DenseShiftSolver::new(&a);
        let real = apply_combined_real(&design, &mut half_solver, &r).unwrap();
        assert_eq!(half_solver.solve_count(), 2);
        for (u, v) in real.iter().zip(&full) {
            assert!((u - v.re).abs() <= 1e-12);
        }
    }

    #[test]
    fn richardson_residual_follows_the_product_rational_function() {
        let a: CsrMatrix<C64> = probgen::uniform_spectrum_diag(40, 0.08, 16.0);
        let ss = ShiftSet::circle_poles(4, 0.8).unwrap();
        let mut solver = DenseShiftSolver::new(&a);
        let b: Vec<C64> = (0..40).map(|i| c(1.0 + (i % 3) as f64, 0.0)).collect();
        let x0 = vec![c(0.0, 0.0); 40];
        let (_, history) = richardson_compound(&a, &mut solver, ss.poles(), &b, &x0).unwrap();
        assert_eq!(history.len(), 5);
        // diagonal system: the residual transforms entrywise by rho_k
        let mut expect = 0.0;
        for (i, &bi) in b.iter().enumerate() {
            let lambda = a.get(i, i);
            let rho = rho_product(ss.poles(), lambda).unwrap();
            expect += (rho * bi).norm_sqr();
        }
        let expect = expect.sqrt();
        assert!(
            (history[4] - expect).abs() <= 1e-10 * expect.max(1.0),
            "{} vs {expect}",
            history[4]
        );
    }

    #[test]
    fn identity_system_single_pole_step() {
        let a = CsrMatrix::<C64>::identity(3);
        let sigma = c(0.3, 0.7);
        let mut solver = DenseShiftSolver::new(&a);
        let b = vec![c(2.0, 0.0); 3];
        let x0 = vec![c(0.0, 0.0); 3];
        let (_, history) = richardson_compound(&a, &mut solver, &[sigma], &b, &x0).unwrap();
        let factor = (-sigma / (c(1.0, 0.0) - sigma)).norm();
        assert!((history[1] - factor * history[0]).abs() <= 1e-12 * history[0]);
    }

    #[test]
    fn double_imaginary_pair_reproduces_the_published_minimum() {
        // uniform [0.08, 16] spectrum, poles {0.8i, -0.8i} applied twice
        let a: CsrMatrix<C64> = probgen::uniform_spectrum_diag(600, 0.08, 16.0);
        let poles = [c(0.0, 0.8), c(0.0, -0.8), c(0.0, 0.8), c(0.0, -0.8)];
        // preconditioned eigenvalues are 1 - rho_k(lambda) entrywise
        let mut min_ev = f64::INFINITY;
        for i in 0..600 {
            let lambda = a.get(i, i);
            let rho = rho_product(&poles, lambda).unwrap();
            min_ev = min_ev.min((c(1.0, 0.0) - rho).norm());
        }
        assert!(
            (min_ev - 0.0197).abs() <= 5e-4,
            "smallest preconditioned eigenvalue {min_ev}"
        );
        // and the Richardson run realizes the same contraction on the
        // worst-case eigenvector
        let mut solver = DenseShiftSolver::new(&a);
        let mut b = vec![c(0.0, 0.0); 600];
        b[0] = c(1.0, 0.0); // lambda = 0.08 is the extreme mode
        let x0 = vec![c(0.0, 0.0); 600];
        let (_, history) = richardson_compound(&a, &mut solver, &poles, &b, &x0).unwrap();
        let rho0 = rho_product(&poles, c(0.08, 0.0)).unwrap().norm();
        assert!((history[4] - rho0).abs() <= 1e-10);
        assert!((1.0 - rho0 - 0.0197).abs() <= 5e-4);
    }

    #[test]
    fn purely_imaginary_pole_step_keeps_the_real_part() {
        let a: CsrMatrix<f64> = probgen::shifted_laplacian_2d(5, 4, 0.0);
        let mut rng = StdRng::seed_from_u64(84);
        let r0: Vec<f64> = (0..20).map(|_| rng.gen::<f64>() - 0.5).collect();
        let x0: Vec<f64> = (0..20).map(|_| rng.gen::<f64>() - 0.5).collect();
        let sigma = c(0.0, 0.9);
        let mut solver = DenseShiftSolver::new(&a);
        let x2 = conjugate_pair_step(&mut solver, sigma, &r0, &x0).unwrap();
        let mut oracle = DenseShiftSolver::new(&a);
        let rc: Vec<C64> = r0.iter().map(|&x| c(x, 0.0)).collect();
        let v = oracle.solve(sigma, &rc).unwrap();
        for i in 0..20 {
            assert!((x2[i] - (x0[i] + v[i].re)).abs() <= 1e-13);
        }
    }

    #[test]
    fn pair_step_equals_two_richardson_steps_with_one_solve() {
        let mut rng = StdRng::seed_from_u64(85);
        for trial in 0..20 {
            let n = rng.gen_range(5..50);
            let mut triplets = Vec::new();
            for i in 0..n {
                triplets.push((i, i, 4.0 + rng.gen::<f64>()));
                for _ in 0..2 {
                    triplets.push((i, rng.gen_range(0..n), rng.gen::<f64>() - 0.5));
                }
            }
            let a = CsrMatrix::from_triplets(n, n, triplets).unwrap();
            let b: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
            let x0: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
            let sigma = c(rng.gen::<f64>() - 0.5, 0.4 + rng.gen::<f64>());

            let ax0 = a.spmv(&x0).unwrap();
            let r0: Vec<f64> = b.iter().zip(&ax0).map(|(&bi, &ai)| bi - ai).collect();
            let mut pair_solver = DenseShiftSolver::new(&a);
            let x2 = conjugate_pair_step(&mut pair_solver, sigma, &r0, &x0).unwrap();
            assert_eq!(pair_solver.solve_count(), 1, "exactly one complex solve");

            let ac = a.to_complex();
            let mut rich_solver = DenseShiftSolver::new(&a);
            let bc: Vec<C64> = b.iter().map(|&v| c(v, 0.0)).collect();
            let x0c: Vec<C64> = x0.iter().map(|&v| c(v, 0.0)).collect();
            let (x2_ref, _) = richardson_compound(
                &ac,
                &mut rich_solver,
                &[sigma, sigma.conj()],
                &bc,
                &x0c,
            )
            .unwrap();
            assert_eq!(rich_solver.solve_count(), 2, "naive path pays two solves");
            for i in 0..n {
                assert!(
                    (x2[i] - x2_ref[i].re).abs() <= 1e-12 * x2_ref[i].norm().max(1.0),
                    "trial {trial} entry {i}: {} vs {}",
                    x2[i],
                    x2_ref[i].re
                );
                assert!(x2_ref[i].im.abs() <= 1e-12 * x2_ref[i].norm().max(1.0));
            }
        }
    }

    #[test]
    fn zero_residual_is_a_fixed_point() {
        let a: CsrMatrix<f64> = probgen::shifted_laplacian_2d(4, 4, 0.0);
        let mut solver = DenseShiftSolver::new(&a);
        let x0: Vec<f64> = (0..16).map(|i| i as f64).collect();
        let x2 = conjugate_pair_step(&mut solver, c(0.1, 0.5), &vec![0.0; 16], &x0).unwrap();
        for (u, v) in x2.iter().zip(&x0) {
            assert!((u - v).abs() <= 1e-15);
        }
    }

    #[test]
    fn rho_at_zero_is_one_for_any_design() {
        let ss = ShiftSet::circle_poles(6, 1.3).unwrap();
        let design = design_shifts(&ss, &WeightFn::emphasized(-2.0, 2.0)).unwrap();
        let rho = rho_combined(&design, c(0.0, 0.0)).unwrap();
        assert!((rho - c(1.0, 0.0)).norm() <= 1e-14);
    }

    #[test]
    fn product_rho_decays_at_infinity() {
        let ss = ShiftSet::circle_poles(4, 0.8).unwrap();
        let rho = rho_product(ss.poles(), c(1e8, 0.0)).unwrap();
        assert!(rho.norm() <= 1e-6);
    }

    #[test]
    fn rho_rejects_pole_evaluations() {
        let ss = ShiftSet::circle_poles(2, 1.0).unwrap();
        assert!(rho_product(ss.poles(), ss.poles()[0]).is_err());
    }

    #[test]
    fn optimal_design_separates_the_spectrum_better_than_uniform_weights() {
        // eigenvalues of the 30x20 shifted grid, known analytically
        let eigs = probgen::shifted_laplacian_2d_eigenvalues(30, 20, 1.0);
        let ss = ShiftSet::circle_poles(4, 0.8).unwrap();
        let optimal = design_shifts(&ss, &WeightFn::emphasized(-2.0, 2.0)).unwrap();
        let mut uniform = optimal.clone();
        uniform.alphas = vec![c(0.25, 0.0); 4];

        let min_precond = |design: &ShiftDesign| -> f64 {
            eigs.iter()
                .map(|&ev| {
                    let rho = rho_combined(design, c(ev, 0.0)).unwrap();
                    (c(1.0, 0.0) - rho).norm()
                })
                .fold(f64::INFINITY, f64::min)
        };
        let opt_min = min_precond(&optimal);
        let uni_min = min_precond(&uniform);
        assert!(
            opt_min > uni_min,
            "optimal min {opt_min:e} vs uniform min {uni_min:e}"
        );
    }

    #[test]
    fn diagonal_scalar_identity_links_combination_and_rho() {
        let n = 12;
        let a: CsrMatrix<C64> = probgen::uniform_spectrum_diag(n, 0.08, 16.0);
        let ss = ShiftSet::circle_poles(4, 0.8).unwrap();
        let design = design_shifts(&ss, &WeightFn::emphasized(-2.0, 2.0)).unwrap();
        let mut solver = DenseShiftSolver::new(&a);
        for i in 0..n {
            let mut e = vec![c(0.0, 0.0); n];
            e[i] = c(1.0, 0.0);
            let u = apply_combined(&design, &mut solver, &e).unwrap();
            let lambda = a.get(i, i);
            // eigenvalue of I - M^{-1} A on this axis
            let resid = c(1.0, 0.0) - u[i] * lambda;
            let rho = rho_combined(&design, lambda).unwrap();
            assert!((resid - rho).norm() <= 1e-12);
        }
    }

    #[test]
    fn ilut_backed_solver_matches_dense_solves_when_exact() {
        let a: CsrMatrix<f64> = probgen::shifted_laplacian_2d(5, 5, 0.0);
        let sigma = c(0.2, 0.6);
        let mut dense = DenseShiftSolver::new(&a);
        let mut incomplete = IlutShiftSolver::new(&a, 0.0, 25);
        let rhs: Vec<C64> = (0..25).map(|i| c(1.0 + i as f64, -0.5)).collect();
        let xd = dense.solve(sigma, &rhs).unwrap();
        let xi = incomplete.solve(sigma, &rhs).unwrap();
        for (u, v) in xd.iter().zip(&xi) {
            assert!((u - v).norm() <= 1e-9 * v.norm().max(1.0));
        }
    }
}
