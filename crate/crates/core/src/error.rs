use thiserror::Error;

use crate::model::{PriorityKind, Violation};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} index {index} out of bounds for n = {n}")]
    IndexOutOfBounds {
        what: &'static str,
        index: usize,
        n: usize,
    },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid valuations: {}", format_violations(.0))]
    InvalidValuations(Vec<Violation>),

    #[error("invalid matching: {0}")]
    InvalidMatching(String),

    #[error("agent {} does not find object {} acceptable", .agent + 1, .object + 1)]
    UnacceptablePair { agent: usize, object: usize },

    #[error("signatures are undefined for Pareto-only matchings")]
    SignatureUndefined,

    #[error("rank {rank} outside 1..={n}")]
    RankOutOfRange { rank: usize, n: usize },

    #[error("value part {0} outside [0, 1]")]
    ValueOutOfRange(f64),

    #[error("threshold {0} outside [0, 1]")]
    ThresholdOutOfRange(f64),

    #[error("thresholds must be strictly descending and lie in (0, 1)")]
    InvalidThresholds,

    #[error("query budget violated: {0}")]
    BudgetViolation(String),

    #[error("epsilon must be positive, got {0}")]
    InvalidEpsilon(f64),

    #[error("{algorithm} does not support {kind}")]
    UnsupportedKind {
        algorithm: &'static str,
        kind: PriorityKind,
    },

    #[error("{what} requires n >= {min}, got {n}")]
    InstanceTooSmall { what: &'static str, n: usize, min: usize },

    #[error("{what} limited to n <= {max}, got {n}")]
    InstanceTooLarge { what: &'static str, n: usize, max: usize },

    #[error("matching is not in the {0} class")]
    ClassViolation(PriorityKind),

    #[error("configuration error: {0}")]
    Config(String),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}
