//! Exact construction of projectively equivariant quantization maps on a
//! coordinate chart.
//!
//! Given a torsion-free connection with polynomial Christoffel symbols and a
//! symmetric-tensor-density symbol, the crate builds the associated normal
//! projective Cartan data, runs invariant differentiation and divergence
//! iterates on the trivialized bundle `chart x G1`, and assembles the
//! quantization operator together with its coefficient table. Every step is
//! carried out in rational arithmetic: all identities checked by the test
//! suites hold exactly, never up to a tolerance.
//!
//! The main entry points are [`quantization::quantize`] and the verification
//! suites in [`verify`]. The `cartanq` binary exposes the same functionality
//! on job files; `examples/` contains one runnable program per capability.

pub mod affine;
pub mod algebra;
pub mod calculus;
pub mod exact;
pub mod fiber;
pub mod geometry;
pub mod job;
pub mod parse;
pub mod quantization;
pub mod verify;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The coefficient matrix of a linear system is rank deficient.
    #[error("singular linear system: {0}")]
    SingularSystem(String),
    /// Projective normalization degenerates below dimension two.
    #[error("chart dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    /// A value expected to be constant along the fiber depends on the fiber
    /// coordinates.
    #[error("not fiber-constant: {0}")]
    NotFiberConstant(String),
    /// Divergence applied to a section of tensor degree zero.
    #[error("divergence needs contravariant degree >= 1")]
    DegreeZero,
    /// Pairing of sections whose tensor degrees disagree.
    #[error("degree mismatch in pairing: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    /// A commutator identity that pins the sign conventions failed.
    #[error("commutator identity violated: {0}")]
    ConventionViolation(String),
    /// The shift weight is critical for the requested order.
    #[error("critical shift for order {k}: offending (k,l) pairs {pairs:?}")]
    CriticalDelta {
        /// Requested operator order.
        k: usize,
        /// Pairs `(k, l)` whose obstruction value vanishes.
        pairs: Vec<(usize, usize)>,
    },
    /// No equivariant quantization exists for the given weights.
    #[error("no equivariant quantization exists: {0}")]
    NoExistence(String),
    /// Expression syntax error, with byte position into the source string.
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax {
        /// Byte offset of the offending token.
        pos: usize,
        /// Human-readable description.
        msg: String,
    },
    /// Unknown variable in an expression.
    #[error("unknown variable `{name}` at byte {pos}")]
    UnknownVariable {
        /// The variable as written.
        name: String,
        /// Byte offset of the token.
        pos: usize,
    },
    /// Malformed job file.
    #[error("invalid job: {0}")]
    InvalidJob(String),
    /// An internal invariant was violated; indicates a bug, not bad input.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
