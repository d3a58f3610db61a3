use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("factorization is singular ({zero_pivots} zero pivots)")]
    Singular { zero_pivots: usize },
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("variable index {index} out of range (n_var = {n_var})")]
    VariableOutOfRange { index: usize, n_var: usize },
    #[error("block {block} declares duplicate pattern entry ({row}, {col})")]
    DuplicatePattern {
        block: usize,
        row: usize,
        col: usize,
    },
    #[error("block {block} declares an invalid pattern entry ({row}, {col})")]
    InvalidPattern {
        block: usize,
        row: usize,
        col: usize,
    },
    #[error("block {block} emitted entry ({row}, {col}) outside its declared pattern")]
    PatternViolation {
        block: usize,
        row: usize,
        col: usize,
    },
    #[error("oracle of {source_name} produced a non-finite value")]
    NonFiniteOracle { source_name: String },
    #[error("invalid problem specification: {0}")]
    InvalidSpec(String),
}
