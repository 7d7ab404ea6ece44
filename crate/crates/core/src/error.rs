use thiserror::Error;

use crate::locc::PartyId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("amplitude vector length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("state norm {norm} deviates from 1 beyond tolerance")]
    Unnormalized { norm: f64 },

    #[error("zero vector is not a valid state")]
    ZeroVector,

    #[error("matrix is not unitary (residual {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("matrix entry count {entries} does not match dimension {dim}")]
    BadMatrixShape { dim: usize, entries: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("wire {wire} out of range for {num_qubits}-qubit register")]
    WireOutOfRange { wire: usize, num_qubits: usize },

    #[error("wire {0} listed more than once")]
    RepeatedWire(usize),

    #[error("outcome {outcome} has probability {probability:e}, cannot be forced")]
    ImpossibleOutcome { outcome: u8, probability: f64 },

    #[error("invalid bipartition: {0}")]
    InvalidBipartition(String),

    #[error("block_qubits {0} outside supported range [1, 3]")]
    BlockQubitsOutOfRange(usize),

    #[error("state must have at least {required} qubits, has {actual}")]
    TooFewQubits { required: usize, actual: usize },

    #[error("{party} does not own wire {wire}")]
    OwnershipViolation { party: PartyId, wire: String },

    #[error("unknown wire {0}")]
    UnknownWire(String),

    #[error("invalid resource request: {0}")]
    InvalidResource(String),

    #[error("invalid classical message: {0}")]
    InvalidMessage(String),

    #[error("{party} received tag {tag:?} before it was sent")]
    CausalityFault { party: PartyId, tag: String },

    #[error("{party} has no local bit {tag:?}")]
    MissingBit { party: PartyId, tag: String },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("deadlock: blocked parties {}", fmt_blocked(.blocked))]
    Deadlock { blocked: Vec<(PartyId, String)> },

    #[error("transcript audit failed at event {index}: {reason}")]
    AuditFailure { index: usize, reason: String },

    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

fn fmt_blocked(blocked: &[(PartyId, String)]) -> String {
    blocked
        .iter()
        .map(|(p, tag)| format!("{p} awaiting {tag:?}"))
        .collect::<Vec<_>>()
        .join(", ")
}
