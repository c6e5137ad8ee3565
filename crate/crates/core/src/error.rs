//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("invalid matrix structure: {0}")]
    InvalidStructure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// ILUT elimination met a zero pivot after dropping. There is no
    /// pivoting; a complex diagonal shift is the documented remedy.
    #[error("zero pivot in row {row}")]
    ZeroPivot { row: usize },

    #[error("zero pivot in row {row} of block {block} at level {level}")]
    BlockZeroPivot {
        level: usize,
        block: usize,
        row: usize,
    },

    #[error("matrix market parse error at line {line}: {msg}")]
    MmParse { line: usize, msg: String },

    #[error("entry ({row}, {col}) at line {line} is outside a {n_rows}x{n_cols} matrix")]
    MmIndexOutOfRange {
        line: usize,
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },

    #[error("a complex value cannot be represented by the requested real scalar type")]
    ComplexIntoReal,

    #[error("a complex diagonal shift requires complex scalars")]
    ComplexShiftOnReal,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("empty graph")]
    EmptyGraph,

    #[error("Schur QR iteration failed to converge after {sweeps} sweeps")]
    SchurNoConvergence { sweeps: usize },

    #[error("correction is singular: |1 - eigenvalue| = {magnitude:.3e} among selected Schur values")]
    SingularCorrection { magnitude: f64 },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("zero start vector")]
    ZeroStartVector,
}
