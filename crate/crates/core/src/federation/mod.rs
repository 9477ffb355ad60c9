//! Party topology, byte-accounted channels, simulated enclaves, and
//! federated inference.

pub mod channel;
pub mod enclave;
pub mod party;
pub mod predict;
pub mod topology;

pub use channel::{Message, MessageKind, MessageRecord, Phase, Router};
pub use enclave::Enclave;
pub use party::{KeyStore, PartyState, Role, SplitRecord, SplitRecordTable};
pub use predict::federated_predict;
pub use topology::{ProtocolKind, SetupConfig, Simulation};
