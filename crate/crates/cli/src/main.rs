//! Command-line drivers: problem generation, preconditioned solves,
//! parameter sweeps, shift-design dumps, and communication cost reports.

mod config;

use clap::{Args, Parser, Subcommand};
use config::{SolverOpts, SolverOverrides};
use gemslr::krylov;
use gemslr::mm;
use gemslr::mslr::{MslrPreconditioner, TracedPrecond};
use gemslr::probgen::{self, GridSpec};
use gemslr::reorder;
use gemslr::scalar::Scalar;
use gemslr::shifts;
use gemslr::simdist::{self, CommTrace, DistVector};
use gemslr::sparse::CsrMatrix;
use gemslr::vecops;
use num_complex::Complex64;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "gemslr",
    about = "Multilevel Schur-complement low-rank solver toolkit",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a test matrix and write it in Matrix Market format.
    Generate(GenerateArgs),
    /// Set up the preconditioner and solve with FGMRES; emit a CSV row.
    Solve(SolveArgs),
    /// Sweep rank/level grids and emit one CSV row per combination.
    Bench(BenchArgs),
    /// Emit an optimal multi-shift design (poles, weights, spectra).
    DesignShifts(DesignShiftsArgs),
    /// Run traced distributed kernels and report modeled cost.
    CostReport(CostReportArgs),
}

#[derive(Args, Clone)]
struct ProblemArgs {
    /// Read the system matrix from a Matrix Market file.
    #[arg(long, conflicts_with = "problem")]
    matrix: Option<PathBuf>,
    /// Generator name: lap3d, lap2d, or uniform-diag.
    #[arg(long, default_value = "lap3d")]
    problem: String,
    #[arg(long, default_value_t = 16)]
    nx: usize,
    #[arg(long, default_value_t = 16)]
    ny: usize,
    #[arg(long, default_value_t = 16)]
    nz: usize,
    /// Reaction shift subtracted from the stencil diagonal.
    #[arg(long, default_value_t = 0.0)]
    shift: f64,
    /// Size of the uniform-diag generator.
    #[arg(long, default_value_t = 600)]
    n: usize,
    /// Spectrum bounds of the uniform-diag generator.
    #[arg(long, default_value_t = 0.08)]
    lo: f64,
    #[arg(long, default_value_t = 16.0)]
    hi: f64,
    /// Build the problem over complex scalars.
    #[arg(long)]
    complex: bool,
}

impl ProblemArgs {
    fn build<S: Scalar>(&self) -> Result<CsrMatrix<S>, gemslr::Error> {
        if let Some(path) = &self.matrix {
            return mm::mm_read(path);
        }
        let a = match self.problem.as_str() {
            "lap3d" => probgen::laplacian_7pt(&GridSpec {
                nx: self.nx,
                ny: self.ny,
                nz: self.nz,
                shift: self.shift,
            }),
            "lap2d" => probgen::shifted_laplacian_2d(self.nx, self.ny, self.shift),
            "uniform-diag" => probgen::uniform_spectrum_diag(self.n, self.lo, self.hi),
            other => {
                return Err(gemslr::Error::InvalidArgument(format!(
                    "unknown problem {other}; expected lap3d, lap2d, or uniform-diag"
                )))
            }
        };
        Ok(a)
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Output Matrix Market path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// key=value configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: SolverOverrides,
    /// Print the effective configuration as key=value lines and exit.
    #[arg(long)]
    dump_config: bool,
    /// Write the statistics row to this CSV file.
    #[arg(long)]
    csv_out: Option<PathBuf>,
    /// Write the residual history to this CSV file.
    #[arg(long)]
    history_out: Option<PathBuf>,
    /// Dump the multilevel ordering to this text file.
    #[arg(long)]
    ordering_out: Option<PathBuf>,
    /// Write the solve-phase communication trace to this CSV file.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Write the retained interface eigenvalue estimates per level to this
    /// CSV file.
    #[arg(long)]
    eigs_out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: SolverOverrides,
    /// Comma-separated rank values to sweep.
    #[arg(long, default_value = "0,10")]
    k_list: String,
    /// Comma-separated level counts to sweep.
    #[arg(long, default_value = "2,3")]
    lev_list: String,
    #[arg(long)]
    csv_out: Option<PathBuf>,
}

#[derive(Args)]
struct DesignShiftsArgs {
    /// Pole count (even).
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Pole circle radius.
    #[arg(long, default_value_t = 0.8)]
    r: f64,
    /// Design interval bounds.
    #[arg(long, default_value_t = -2.0)]
    lo: f64,
    #[arg(long, default_value_t = 2.0)]
    hi: f64,
    /// Use the flat unit weight instead of the near-origin emphasis.
    #[arg(long)]
    flat_weight: bool,
    /// Poles/weights CSV output.
    #[arg(long)]
    csv_out: Option<PathBuf>,
    /// Preconditioned-spectrum CSV over the analytic 2D grid eigenvalues.
    #[arg(long)]
    spectrum_out: Option<PathBuf>,
    #[arg(long, default_value_t = 30)]
    spectrum_nx: usize,
    #[arg(long, default_value_t = 20)]
    spectrum_ny: usize,
    #[arg(long, default_value_t = 1.0)]
    spectrum_shift: f64,
}

#[derive(Args)]
struct CostReportArgs {
    /// Traced kernel: dot, axpy, or spmv.
    #[arg(long, default_value = "dot")]
    kernel: String,
    /// Vector length (dot/axpy) or tridiagonal size (spmv).
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: SolverOverrides,
    /// Trace counters CSV output.
    #[arg(long)]
    csv_out: Option<PathBuf>,
    /// Human-readable report output.
    #[arg(long)]
    report_out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Generate(args) => run_generate(args),
        Cmd::Solve(args) => run_solve(args),
        Cmd::Bench(args) => run_bench(args),
        Cmd::DesignShifts(args) => run_design_shifts(args),
        Cmd::CostReport(args) => run_cost_report(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

type CliResult = Result<(), Box<dyn std::error::Error>>;

fn load_opts(config: Option<&Path>, overrides: &SolverOverrides) -> Result<SolverOpts, String> {
    let mut opts = match config {
        Some(path) => SolverOpts::load(path)?,
        None => SolverOpts::default(),
    };
    opts.apply_overrides(overrides);
    Ok(opts)
}

fn write_or_print(path: Option<&Path>, content: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run_generate(args: GenerateArgs) -> CliResult {
    if args.problem.complex {
        let a: CsrMatrix<Complex64> = args.problem.build()?;
        mm::mm_write(&a, &args.out)?;
        eprintln!("wrote {} ({} rows, {} nnz)", args.out.display(), a.n_rows(), a.nnz());
    } else {
        let a: CsrMatrix<f64> = args.problem.build()?;
        mm::mm_write(&a, &args.out)?;
        eprintln!("wrote {} ({} rows, {} nnz)", args.out.display(), a.n_rows(), a.nnz());
    }
    Ok(())
}

type SolveOutput<S> = (String, krylov::SolveStats, MslrPreconditioner<S>, CommTrace);

/// One solve: setup, FGMRES on `A x = A 1`, stats row.
fn solve_one<S: Scalar>(
    a: &CsrMatrix<S>,
    opts: &SolverOpts,
) -> Result<SolveOutput<S>, Box<dyn std::error::Error>> {
    let pre = MslrPreconditioner::setup(a, opts.mslr_params())?;
    let ones = vec![S::one(); a.n_rows()];
    let b = a.spmv(&ones)?;
    let pc = TracedPrecond::new(&pre);
    let (x, mut stats) = krylov::fgmres(a, &pc, &b, opts.restart, opts.tol, opts.maxit, None)?;
    stats.setup_seconds = pre.stats().setup_seconds;
    let err: f64 = x
        .iter()
        .map(|&xi| {
            let d = xi - S::one();
            d.abs() * d.abs()
        })
        .sum::<f64>()
        .sqrt()
        / vecops::norm2(&ones);
    eprintln!(
        "n = {}, levels = {}, its = {}, relres = {:.2e}, solution error = {:.2e}",
        a.n_rows(),
        pre.achieved_levels(),
        stats.iterations,
        stats.final_relres,
        err
    );
    let its = if stats.converged {
        stats.iterations.to_string()
    } else {
        "F".to_string()
    };
    let row = format!(
        "{},{},{},{:.4},{:.4},{:.4},{}\n",
        a.n_rows(),
        opts.p,
        opts.k,
        pre.stats().fill,
        stats.setup_seconds,
        stats.iter_seconds,
        its
    );
    let trace = pc.take_trace();
    Ok((row, stats, pre, trace))
}

const STATS_HEADER: &str = "n,n_p,k,fill,p-t,i-t,its\n";

fn retained_eigs_csv<S: Scalar>(pre: &MslrPreconditioner<S>) -> String {
    let mut out = String::from("level,index,eig_re,eig_im\n");
    for level in 0..pre.achieved_levels() {
        for (i, ev) in pre.correction_eigenvalues(level).iter().enumerate() {
            let _ = writeln!(out, "{level},{i},{},{}", ev.re, ev.im);
        }
    }
    out
}

fn run_solve(args: SolveArgs) -> CliResult {
    let opts = load_opts(args.config.as_deref(), &args.overrides)?;
    if args.dump_config {
        print!("{}", opts.to_kv_string());
        return Ok(());
    }

    let (row, stats, ordering_dump, trace, eigs) = if args.problem.complex {
        let a: CsrMatrix<Complex64> = args.problem.build()?;
        let ord = reorder::multilevel_reorder(&a, opts.lev, opts.p)?;
        let (row, stats, pre, trace) = solve_one(&a, &opts)?;
        (row, stats, ord, trace, retained_eigs_csv(&pre))
    } else {
        let a: CsrMatrix<f64> = args.problem.build()?;
        let ord = reorder::multilevel_reorder(&a, opts.lev, opts.p)?;
        let (row, stats, pre, trace) = solve_one(&a, &opts)?;
        (row, stats, ord, trace, retained_eigs_csv(&pre))
    };

    write_or_print(
        args.csv_out.as_deref(),
        &format!("{STATS_HEADER}{row}"),
    )?;
    if let Some(path) = &args.history_out {
        let mut buf = Vec::new();
        stats.write_history_csv(&mut buf)?;
        std::fs::write(path, buf)?;
    }
    if let Some(path) = &args.ordering_out {
        let mut buf = Vec::new();
        ordering_dump.write_text(&mut buf)?;
        std::fs::write(path, buf)?;
    }
    if let Some(path) = &args.trace_out {
        let mut buf = Vec::new();
        trace.write_csv(&mut buf)?;
        std::fs::write(path, buf)?;
    }
    if let Some(path) = &args.eigs_out {
        std::fs::write(path, eigs)?;
    }
    Ok(())
}

fn parse_list(text: &str) -> Result<Vec<usize>, String> {
    text.split(',')
        .map(|t| t.trim().parse().map_err(|e| format!("bad list entry {t}: {e}")))
        .collect()
}

fn run_bench(args: BenchArgs) -> CliResult {
    let base = load_opts(args.config.as_deref(), &args.overrides)?;
    let ks = parse_list(&args.k_list)?;
    let levs = parse_list(&args.lev_list)?;
    let mut out = format!("{},lev\n", STATS_HEADER.trim_end());
    for &lev in &levs {
        for &k in &ks {
            let mut opts = base.clone();
            opts.lev = lev;
            opts.k = k;
            let row = if args.problem.complex {
                let a: CsrMatrix<Complex64> = args.problem.build()?;
                solve_one(&a, &opts)?.0
            } else {
                let a: CsrMatrix<f64> = args.problem.build()?;
                solve_one(&a, &opts)?.0
            };
            let _ = writeln!(out, "{},{lev}", row.trim_end());
        }
    }
    write_or_print(args.csv_out.as_deref(), &out)?;
    Ok(())
}

fn run_design_shifts(args: DesignShiftsArgs) -> CliResult {
    let ss = shifts::ShiftSet::circle_poles(args.k, args.r)?;
    let weight = if args.flat_weight {
        shifts::WeightFn::flat(args.lo, args.hi)
    } else {
        shifts::WeightFn::emphasized(args.lo, args.hi)
    };
    let design = shifts::design_shifts(&ss, &weight)?;
    eprintln!(
        "designed {} poles at radius {}, objective {:.6e}, KKT residual {:.2e}",
        args.k,
        args.r,
        design.objective,
        design.kkt_residual()
    );
    let mut buf = Vec::new();
    design.write_csv(&mut buf)?;
    write_or_print(args.csv_out.as_deref(), &String::from_utf8(buf)?)?;

    if let Some(path) = &args.spectrum_out {
        let eigs = probgen::shifted_laplacian_2d_eigenvalues(
            args.spectrum_nx,
            args.spectrum_ny,
            args.spectrum_shift,
        );
        let mut buf = Vec::new();
        shifts::write_spectrum_csv(&design, &eigs, &mut buf)?;
        std::fs::write(path, buf)?;
    }
    Ok(())
}

fn run_cost_report(args: CostReportArgs) -> CliResult {
    let opts = load_opts(args.config.as_deref(), &args.overrides)?;
    let params = opts.cost_params();
    let mut trace = CommTrace::new();
    match args.kernel.as_str() {
        "dot" => {
            let x = DistVector::from_serial(&vec![1.0f64; args.n], params.p)?;
            simdist::dist_dot(&x, &x, &mut trace)?;
        }
        "axpy" => {
            let x = DistVector::from_serial(&vec![1.0f64; args.n], params.p)?;
            simdist::dist_axpy(2.0, &x, &x, &mut trace)?;
        }
        "spmv" => {
            let mut triplets = Vec::new();
            for i in 0..args.n {
                triplets.push((i, i, 2.0));
                if i > 0 {
                    triplets.push((i, i - 1, -1.0));
                }
                if i + 1 < args.n {
                    triplets.push((i, i + 1, -1.0));
                }
            }
            let a = CsrMatrix::from_triplets(args.n, args.n, triplets)?;
            let sys = simdist::partition_rows(&a, params.p)?;
            let x = DistVector::from_serial(&vec![1.0f64; args.n], params.p)?;
            simdist::dist_spmv(&sys, &x, &mut trace)?;
        }
        other => return Err(format!("unknown kernel {other}").into()),
    }
    let report = simdist::model_cost(&trace, &params);

    let mut csv = Vec::new();
    trace.write_csv(&mut csv)?;
    report.write_csv(&mut csv)?;
    write_or_print(args.csv_out.as_deref(), &String::from_utf8(csv)?)?;

    let text = format!(
        "kernel {} on n = {} over p = {} ranks\n\n{}\n\n{}\n",
        args.kernel, args.n, params.p, trace, report
    );
    if let Some(path) = &args.report_out {
        std::fs::write(path, &text)?;
    } else {
        eprintln!("{text}");
    }
    Ok(())
}
