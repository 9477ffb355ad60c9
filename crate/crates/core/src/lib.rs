//! Desk-scale simulator of vertical federated gradient-boosted-tree training
//! with interchangeable split-finding protocols.
//!
//! The crate provides:
//!
//! - [`boosting`]: a plaintext GBDT engine over vertically partitioned data,
//!   the correctness oracle every protocol must match bit for bit;
//! - [`crypto`]: Paillier encryption, a fixed-point ring codec,
//!   authenticated sealing, and one-time-pad masking;
//! - [`federation`]: parties, simulated enclaves, and byte-accounted
//!   channels;
//! - [`protocols`]: SecureBoost, N-TEE, and 1-TEE split finding behind one
//!   strategy interface, plus the adversary view SecureBoost leaks;
//! - [`attack`]: reconstruction of passive parties' per-feature sample
//!   orderings from that view, with value guessing under two priors.

pub mod attack;
pub mod boosting;
pub mod crypto;
pub mod error;
pub mod federation;
pub mod protocols;
pub mod seeding;

pub use error::{Error, Result};
