use thiserror::Error;

#[derive(Debug, Error)]
pub enum QpcpError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    IndexOutOfRange { index: usize, num_qubits: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("{requested} qubits exceeds the cap of {cap} (set QPCP_MAX_QUBITS to raise it)")]
    DimensionCap { requested: usize, cap: usize },
    #[error("structural violation: {0}")]
    Structural(String),
    #[error("malformed path: {0}")]
    MalformedPath(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("proof registers overlap on qubit {0}")]
    RegisterOverlap(usize),
    #[error("malformed witness: {0}")]
    MalformedWitness(String),
    #[error("covering set is empty")]
    EmptyCoveringSet,
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, QpcpError>;
