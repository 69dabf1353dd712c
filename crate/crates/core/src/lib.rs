//! Numerical laboratory for uncertainty relations of random unitary ensembles
//! on bipartite Hilbert spaces, and the protocols built on top of them.
//!
//! The crate is organized around a small set of concrete questions:
//!
//! - How far are the measurement marginals `p^A` of `U_k|psi>` from uniform,
//!   measured in fidelity / Hellinger / total variation / entropy terms?
//!   ([`uncertainty`])
//! - How well does the Fawzi-Hayden-Sen style encoding lock classical
//!   information, and how do adversarial measurements unlock it?
//!   ([`locking`])
//! - What do the exact moment computations behind the parameter lower bounds
//!   evaluate to? ([`bounds`])
//! - How close to Euclidean is the induced embedding into the mixed-norm
//!   matrix space `l1^n(l2^m)`? ([`embedding`])
//!
//! Everything is driven by seeded, reproducible randomness ([`randomness`])
//! over dense complex linear algebra ([`linalg`]).

pub mod bounds;
pub mod divergences;
pub mod embedding;
pub mod linalg;
pub mod locking;
pub mod measurement;
pub mod randomness;
pub mod stats;
pub mod uncertainty;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite entry encountered in {0}")]
    NonFinite(&'static str),

    #[error("columns span the full space; no nullspace vector (min singular value {0:.3e})")]
    NoNullspace(f64),

    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("index out of range: {context} index {index}, size {size}")]
    IndexOutOfRange {
        context: &'static str,
        index: usize,
        size: usize,
    },

    #[error("degenerate measurement outcome: total probability {0:.3e}")]
    DegenerateOutcome(f64),

    #[error("parameters outside the valid domain: {0}")]
    Domain(String),

    #[error("numerical kernel failed: {0}")]
    NumericalFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
