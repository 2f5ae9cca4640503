use thiserror::Error;

/// Errors produced by the synthesis library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("CNOT control and target are both qubit {0}")]
    ControlIsTarget(usize),

    #[error("invalid qubit count {0}")]
    InvalidQubitCount(usize),

    #[error("dimension mismatch: {left} vs {right} qubits")]
    DimensionMismatch { left: usize, right: usize },

    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("amplitude count {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("zero vector cannot be normalized")]
    ZeroVector,

    #[error("malformed amplitude {token:?} on line {line}")]
    MalformedNumber { token: String, line: usize },

    #[error("rotation angle {0} is not finite")]
    NonFiniteAngle(f64),

    #[error("genome length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("population has zero total fitness")]
    DegeneratePopulation,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no shots recorded")]
    EmptyCounts,

    #[error("unsupported gate `{0}`")]
    UnsupportedGate(String),

    #[error("QASM parse error on line {line}: {message}")]
    Qasm { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
