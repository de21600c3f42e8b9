use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// No trivalent graph exists with the requested genus and leaf count,
    /// or a weight signature cannot be normalized.
    #[error("infeasible signature: {0}")]
    InfeasibleSignature(String),

    #[error("unknown graph name `{0}`")]
    UnknownName(String),

    #[error("graph invariant violated: {0}")]
    InvariantViolation(String),

    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    /// Strictness of the inequalities is only known to characterize
    /// interiority for some specs; everything else is refused.
    #[error("interiority is not characterized for this spec: {0}")]
    UnsupportedRegime(String),

    #[error("enumeration budget of {limit} nodes exceeded")]
    BudgetExceeded { limit: u64 },

    #[error("level {level} does not divide 4; omega is only a cone element")]
    LevelMismatch { level: u32 },

    #[error("h* extraction failed: {0}")]
    ExtractionFailed(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("no witness found: {0}")]
    WitnessNotFound(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Two routes that must agree did not.
    #[error("integrity failure: {0}")]
    Integrity(String),
}
