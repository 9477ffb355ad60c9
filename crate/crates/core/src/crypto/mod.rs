//! Cryptographic toolbox: fixed-point ring codec, Paillier encryption,
//! authenticated sealing, and one-time-pad masking.

pub mod fixed;
pub mod pads;
pub mod paillier;
pub mod seal;

pub use fixed::Fx;
pub use pads::{gen_pads, mask, PadKind, PadVector};
pub use seal::{SealedBlob, Sealer, SymKey};
