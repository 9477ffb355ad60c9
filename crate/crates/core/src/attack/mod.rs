//! Leakage-abuse attack against the SecureBoost adversary view: reconstruct
//! per-feature sample orderings by matching decrypted bucket sums against
//! the active party's known gradients, then guess raw values under a prior.

pub mod accuracy;
pub mod matcher;
pub mod order;
pub mod prior;

pub use accuracy::guess_accuracy;
pub use matcher::{match_bucket, MatchResult, DEFAULT_MATCH_BUDGET};
pub use order::{infer_partial_order,FeatureOrder, PartialOrder};
pub use prior::{assign_values, random_baseline, Histogram, PriorKnowledge};
