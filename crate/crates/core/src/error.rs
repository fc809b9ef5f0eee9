use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report. Variants carry the measured
/// quantity that tripped the check so diagnostics can name it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: ||A - A^H||_F = {defect:.3e}")]
    NotHermitian { defect: f64 },
    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:.3e} below tolerance")]
    NotPsd { eigenvalue: f64 },
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("dimension {dim} exceeds the cap of {cap}")]
    DimensionOverflow { dim: u128, cap: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
    #[error("invalid POVM: {0}")]
    InvalidPovm(String),
    #[error("need at least {needed} states, got {got}")]
    TooFewStates { needed: usize, got: usize },
    #[error("ensemble is empty")]
    EmptyEnsemble,
    #[error("count mismatch: {states} states but {elements} POVM elements")]
    CountMismatch { states: usize, elements: usize },
    #[error("rank {rank} outside 1..={dim}")]
    BadRank { rank: usize, dim: usize },
    #[error("bad priors: {0}")]
    BadPriors(String),
    #[error("fidelity {0} outside (0, 1)")]
    BadFidelity(f64),
    #[error("epsilon {0} outside (0, 1)")]
    BadEpsilon(f64),
    #[error("eta {0} outside (0, 1]")]
    BadEta(f64),
    #[error("lambda {lambda} outside [1/d, 1] for d = {dim}")]
    BadLambda { lambda: f64, dim: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("Cayley table is not a Latin square: {0}")]
    NotLatinSquare(String),
    #[error("Cayley table has no identity element")]
    NoIdentity,
    #[error("Cayley table is not associative: ({a}*{b})*{c} != {a}*({b}*{c})")]
    NotAssociative { a: usize, b: usize, c: usize },
    #[error("group of order {order} exceeds the enumeration cap of {cap}")]
    GroupTooLarge { order: usize, cap: usize },
    #[error("subgroup does not belong to the group: {0}")]
    SubgroupMismatch(String),
    #[error("subgroup list is empty")]
    EmptyList,
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
}
