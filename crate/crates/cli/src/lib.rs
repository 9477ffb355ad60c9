//! Experiment harness for the vertical federated boosting simulator:
//! dataset ingestion and generation, run orchestration with timing and byte
//! accounting, attack evaluation, and report emission.

pub mod accounting;
pub mod config;
pub mod csv_io;
pub mod experiment;
pub mod report;
pub mod synth;
