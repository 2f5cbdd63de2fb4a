use thiserror::Error;

/// Errors shared across the solver, verifier, and mechanism layers.
#[derive(Debug, Error)]
pub enum FairexError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected} entries, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid benefit function: {0}")]
    InvalidBenefit(String),

    #[error("infeasible total profile at sorted rank {rank}: {reason}")]
    InfeasibleTotalProfile { rank: usize, reason: String },

    #[error("agent {agent}: report is not a monotone nonnegative level vector ({reason})")]
    NonMonotoneReport { agent: u32, reason: String },

    #[error("enumeration guard exceeded: {needed} candidate points > limit {limit}")]
    GuardExceeded { needed: u128, limit: u128 },

    #[error("operation requires a complete-graph instance; use the graph solver instead")]
    NotCompleteGraph,

    #[error("operation requires {expected} mode, instance is {got} ({hint})")]
    WrongMode {
        expected: &'static str,
        got: &'static str,
        hint: &'static str,
    },

    #[error("grid step must be positive, got {0}")]
    BadGridStep(String),

    #[error("unknown example `{0}`")]
    UnknownExample(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, FairexError>;
