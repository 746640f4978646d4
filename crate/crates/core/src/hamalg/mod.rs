//! Sparse Hamiltonian algebra in the `I(0)^a J^b z^k z̄^k'` representation.

mod bracket;
pub(crate) mod dd;
mod field;
mod hamiltonian;
mod lie;
mod monomial;
mod norm;
mod text;

use thiserror::Error;

pub use bracket::{poisson_bracket, poisson_bracket_truncated};
pub use field::GradientField;
pub use hamiltonian::{Form, Hamiltonian, Meta, RawTerm};
pub use lie::{lie_terms, lie_transform, LieOptions, LieOutput};
pub use monomial::{Monomial, TermClass, Var};
pub use norm::{norm, norm_plus, term_log_weight, NormContext};
pub use text::{parse_hamiltonian, write_hamiltonian};

/// Coefficients below this magnitude are dropped.
pub const COEFF_FLOOR: f64 = 1e-300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HamError {
    #[error("term {term} has momentum {momentum}, expected 0")]
    MomentumViolation { term: String, momentum: i64 },
    #[error("degree {degree} exceeds D_max = {d_max}")]
    DegreeOverflow { degree: u32, d_max: u32 },
    #[error("representation error: {0}")]
    RepresentationError(String),
    #[error("Lie series does not contract at bracket {bracket} (ratio {ratio:.3e})")]
    NoContraction { bracket: usize, ratio: f64 },
    #[error("Hamiltonians carry different metadata")]
    MetadataMismatch,
    #[error("mode {n} outside |n| <= {n_max}")]
    ModeOutOfRange { n: i32, n_max: u32 },
    #[error("invalid norm context: {0}")]
    InvalidContext(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
