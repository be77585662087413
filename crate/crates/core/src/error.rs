use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("amplitude vector length {len} is not a power of two")]
    BadLength { len: usize },

    #[error("state is not normalized: squared norm {norm_sq}")]
    NotNormalized { norm_sq: f64 },

    #[error("non-finite amplitude at index {index}")]
    NonFinite { index: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("qubit label {label} out of range 1..={n_qubits}")]
    QubitOutOfRange { label: usize, n_qubits: usize },

    #[error("duplicate qubit label {label}")]
    DuplicateQubit { label: usize },

    #[error("empty qubit subset")]
    EmptySubset,

    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NonUnitary { deviation: f64 },

    #[error("permutation is not a bijection on 1..={n}")]
    NotBijection { n: usize },

    #[error("invalid density matrix: {reason}")]
    InvalidDensity { reason: String },

    #[error("invalid measurement basis: {reason}")]
    InvalidBasis { reason: String },

    #[error("probability leak {leak:e} outside the listed outcomes")]
    ProbabilityLeak { leak: f64 },

    #[error("outcome {outcome} has vanishing probability {probability:e}")]
    DegenerateState { outcome: usize, probability: f64 },

    #[error("outcome index {outcome} out of range (basis has {count} outcomes)")]
    OutcomeOutOfRange { outcome: usize, count: usize },

    #[error("random draw {draw} outside [0, 1)")]
    BadDraw { draw: f64 },

    #[error(
        "circuit preparation disagrees with the literal state: fidelity {fidelity}, max amplitude diff {max_diff:e}"
    )]
    ConstructionMismatch { fidelity: f64, max_diff: f64 },

    #[error("oracle failure: {0}")]
    OracleFailure(String),

    #[error("conversion map is not unitary (deviation {deviation:e})")]
    NonUnitaryConversion { deviation: f64 },

    #[error("codeword Gram matrix deviates from identity by {deviation:e}")]
    GramFailure { deviation: f64 },

    #[error("state matches no codeword (best overlap {best_overlap})")]
    Undecodable { best_overlap: f64 },

    #[error("message {message} out of range 0..=31")]
    MessageOutOfRange { message: u32 },

    #[error("weights not normalized: sum of squares {sum_sq}")]
    UnnormalizedWeights { sum_sq: f64 },

    #[error("generalized index labels are not four distinct {n}-bit strings")]
    BadGeneralizedIndex { n: usize },

    #[error("ownership invalid: {0}")]
    Ownership(String),

    #[error("party {party} does not own qubits {qubits:?}")]
    LocalityViolation { party: String, qubits: Vec<usize> },

    #[error("unknown party {0}")]
    UnknownParty(String),

    #[error("classical message invalid: {0}")]
    Message(String),

    #[error("parse error: {0}")]
    Parse(String),
}
