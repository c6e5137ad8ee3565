//! Flat key=value configuration shared by the solver subcommands.
//!
//! Every solver flag has a config-file key of the same name; flags given on
//! the command line override file values.

use gemslr::mslr::MslrParams;
use gemslr::simdist::CostParams;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOpts {
    pub lev: usize,
    pub p: usize,
    pub k: usize,
    pub tau: f64,
    pub lfil: usize,
    pub max_cycles: usize,
    pub root_iters: usize,
    pub shift_factor: f64,
    pub last_level_blocks: usize,
    pub restart: usize,
    pub tol: f64,
    pub maxit: usize,
    pub ts: f64,
    pub tw: f64,
    pub tc: f64,
}

impl Default for SolverOpts {
    fn default() -> Self {
        let m = MslrParams::default();
        let c = CostParams::default();
        SolverOpts {
            lev: m.levels,
            p: m.parts,
            k: m.rank,
            tau: m.tau,
            lfil: m.lfil,
            max_cycles: m.max_cycles,
            root_iters: m.root_inner_iters,
            shift_factor: m.shift_factor,
            last_level_blocks: m.last_level_blocks,
            restart: 50,
            tol: 1e-6,
            maxit: 1000,
            ts: c.t_s,
            tw: c.t_w,
            tc: c.t_c,
        }
    }
}

/// Flag-level overrides; `None` keeps the config/default value.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct SolverOverrides {
    /// Level count.
    #[arg(long)]
    pub lev: Option<usize>,
    /// Parts per level.
    #[arg(long)]
    pub p: Option<usize>,
    /// Correction rank per level.
    #[arg(long)]
    pub k: Option<usize>,
    /// ILUT drop tolerance.
    #[arg(long)]
    pub tau: Option<f64>,
    /// ILUT fill cap per row per factor.
    #[arg(long)]
    pub lfil: Option<usize>,
    /// Thick-restart cycle cap.
    #[arg(long)]
    pub max_cycles: Option<usize>,
    /// Inner GMRES steps at the root level (0 = single-pass).
    #[arg(long)]
    pub root_iters: Option<usize>,
    /// Imaginary diagonal shift factor for ILUT.
    #[arg(long)]
    pub shift_factor: Option<f64>,
    /// Retained last-level blocks (0 = same as p).
    #[arg(long)]
    pub last_level_blocks: Option<usize>,
    /// FGMRES restart length.
    #[arg(long)]
    pub restart: Option<usize>,
    /// FGMRES relative-residual tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// FGMRES iteration cap.
    #[arg(long)]
    pub maxit: Option<usize>,
    /// Message startup latency, seconds.
    #[arg(long)]
    pub ts: Option<f64>,
    /// Per-word transfer time, seconds.
    #[arg(long)]
    pub tw: Option<f64>,
    /// Per-flop compute time, seconds.
    #[arg(long)]
    pub tc: Option<f64>,
}

impl SolverOpts {
    pub fn mslr_params(&self) -> MslrParams {
        MslrParams {
            levels: self.lev,
            parts: self.p,
            rank: self.k,
            tau: self.tau,
            lfil: self.lfil,
            max_cycles: self.max_cycles,
            root_inner_iters: self.root_iters,
            shift_factor: self.shift_factor,
            last_level_blocks: self.last_level_blocks,
        }
    }

    pub fn cost_params(&self) -> CostParams {
        CostParams {
            t_s: self.ts,
            t_w: self.tw,
            t_c: self.tc,
            p: self.p,
        }
    }

    pub fn apply_overrides(&mut self, o: &SolverOverrides) {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = o.$field { self.$field = v; })*
            };
        }
        take!(
            lev,
            p,
            k,
            tau,
            lfil,
            max_cycles,
            root_iters,
            shift_factor,
            last_level_blocks,
            restart,
            tol,
            maxit,
            ts,
            tw,
            tc
        );
    }

    pub fn to_kv_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "lev={}", self.lev);
        let _ = writeln!(s, "p={}", self.p);
        let _ = writeln!(s, "k={}", self.k);
        let _ = writeln!(s, "tau={}", self.tau);
        let _ = writeln!(s, "lfil={}", self.lfil);
        let _ = writeln!(s, "max-cycles={}", self.max_cycles);
        let _ = writeln!(s, "root-iters={}", self.root_iters);
        let _ = writeln!(s, "shift-factor={}", self.shift_factor);
        let _ = writeln!(s, "last-level-blocks={}", self.last_level_blocks);
        let _ = writeln!(s, "restart={}", self.restart);
        let _ = writeln!(s, "tol={}", self.tol);
        let _ = writeln!(s, "maxit={}", self.maxit);
        let _ = writeln!(s, "ts={}", self.ts);
        let _ = writeln!(s, "tw={}", self.tw);
        let _ = writeln!(s, "tc={}", self.tc);
        s
    }

    pub fn from_kv_str(text: &str) -> Result<Self, String> {
        let mut opts = SolverOpts::default();
        for (lineno, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let (key, value) = t
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key=value", lineno + 1))?;
            let key = key.trim();
            let value = value.trim();
            let bad = |e: String| format!("line {}: bad value for {key}: {e}", lineno + 1);
            macro_rules! parse {
                ($field:ident) => {
                    opts.$field = value.parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?
                };
                ($field:ident, f64) => {
                    opts.$field = value.parse().map_err(|e: std::num::ParseFloatError| bad(e.to_string()))?
                };
            }
            match key {
                "lev" => parse!(lev),
                "p" => parse!(p),
                "k" => parse!(k),
                "tau" => parse!(tau, f64),
                "lfil" => parse!(lfil),
                "max-cycles" => parse!(max_cycles),
                "root-iters" => parse!(root_iters),
                "shift-factor" => parse!(shift_factor, f64),
                "last-level-blocks" => parse!(last_level_blocks),
                "restart" => parse!(restart),
                "tol" => parse!(tol, f64),
                "maxit" => parse!(maxit),
                "ts" => parse!(ts, f64),
                "tw" => parse!(tw, f64),
                "tc" => parse!(tc, f64),
                other => return Err(format!("line {}: unknown key {other}", lineno + 1)),
            }
        }
        Ok(opts)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text =
            std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_kv_str(&text)
    }
}
