//! Welfare-aware one-sided matching with threshold-query elicitation.
//!
//! Agents report weak orders over objects; cardinal values stay hidden
//! behind a threshold-query oracle. The crate provides exact solvers for
//! Pareto optimal, rank-maximal, max-cardinality rank-maximal and fair
//! matchings, query-efficient approximation algorithms, a brute-force
//! oracle for small instances and lower-bound instance generators.

pub mod adversary;
pub mod algorithms;
pub mod elicitation;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod model;
pub mod oracle;

pub use error::{Error, Result};
pub use model::{
    rank, signature, validate, welfare, Instance, Matching, PriorityKind, Signature,
    ValuationKind, ValuationProfile, WeakOrder,
};
