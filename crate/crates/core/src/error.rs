use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {max_dev:e})")]
    NotHermitian { max_dev: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("matrix is not positive semidefinite (eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    BadIndex { index: usize, n_qubits: usize },

    #[error("invalid partition: {0}")]
    BadPartition(String),

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("bad parameter: {0}")]
    BadParameter(String),

    #[error("wrong dimension: expected {expected}, got {got}")]
    WrongDimension { expected: usize, got: usize },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("parse error at {location}: {msg}")]
    Parse { location: String, msg: String },

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("global {0} of a mixed state needs the roof optimizer, which is disabled")]
    UnsupportedGlobalMeasure(&'static str),

    #[error("unsupported measure for this operation: {0}")]
    UnsupportedMeasure(&'static str),

    #[error("rank {rank} exceeds the roof optimizer limit of 8")]
    RankTooHigh { rank: usize },

    #[error("hypothesis not met: need at least two entangled pairs, found {entangled}")]
    HypothesisNotMet { entangled: usize },

    #[error("no sign change found on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("global value {0:e} is too small for g(alpha)")]
    DegenerateGlobal(f64),
}
