//! A sparse iterative-solver toolkit built around a generalized multilevel
//! Schur-complement low-rank (GeMSLR) preconditioner.
//!
//! The crate provides:
//!
//! * generic real/complex CSR and small dense kernels plus Matrix Market I/O
//!   ([`sparse`], [`dense`], [`mm`]),
//! * a simulated multi-rank execution layer with an instrumented
//!   communication trace and an alpha-beta style cost model ([`simdist`]),
//! * p-way vertex-separator reordering and RCM ([`reorder`]),
//! * ILUT factorization with dual dropping, optional complex diagonal
//!   shifts, and a block-Jacobi wrapper ([`factor`]),
//! * Arnoldi/Schur machinery for low-rank Schur-complement corrections
//!   ([`lowrank`]) and the multilevel preconditioner itself ([`mslr`]),
//! * flexible GMRES and right-preconditioned GMRES ([`krylov`]),
//! * a design suite for multi-pole complex-shift preconditioners
//!   ([`shifts`]), and
//! * deterministic test-problem generators ([`probgen`]).

pub mod dense;
pub mod error;
pub mod factor;
pub mod krylov;
pub mod lowrank;
pub mod mm;
pub mod mslr;
pub mod op;
pub mod probgen;
pub mod reorder;
pub mod scalar;
pub mod shifts;
pub mod simdist;
pub mod sparse;
pub mod vecops;

pub use dense::DenseMatrix;
pub use error::{Error, Result};
pub use scalar::Scalar;
pub use sparse::CsrMatrix;
