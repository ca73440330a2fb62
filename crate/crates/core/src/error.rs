use thiserror::Error;

/// Every way a solve can go wrong.
///
/// Violations of declared constraints are reported rather than panicked on so
/// that verification runs can aggregate them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("answer {answer} at step {step} exceeds declared bound {bound}")]
    BoundViolation { step: u64, answer: u64, bound: u64 },
    #[error("strategy did not finish within {cap} steps")]
    NonTermination { cap: u64 },
    #[error("no continuation for produced instance: {0}")]
    CompositionGap(String),
    #[error("merged parts have overlapping supports")]
    SupportOverlap,
    #[error("{count} codewords exceed the enumeration budget of {cap}")]
    BudgetExceeded { count: u128, cap: u128 },
    #[error("simple strategy declared bound {bound} at step {step}")]
    SimplicityViolation { step: u64, bound: u64 },
    #[error("shape mismatch: {0}")]
    ShapeError(String),
    #[error("answer {answer} does not match predicted residue {value} mod 2^{bits}")]
    PredictabilityViolation { answer: u64, value: u64, bits: u32 },
    #[error("schedule violation: {0}")]
    ScheduleViolation(String),
    #[error("weight {weight:.3} exceeds limit {limit:.3}")]
    WeightViolation { weight: f64, limit: f64 },
    #[error("oracle answers are inconsistent: {0}")]
    InconsistentOracle(String),
    #[error("unreachable solver state: {0}")]
    ImpossibleState(String),
    #[error("protocol misuse: {0}")]
    Protocol(String),
    #[error("query has {size} elements, cap is {cap}")]
    QuerySizeCap { size: usize, cap: usize },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
}

pub type Result<T, E = SolveError> = std::result::Result<T, E>;
