//! Authenticated symmetric sealing with AES-128-GCM.
//!
//! Nonces are never reused under a key: each holder of a shared key seals
//! with a per-holder tag in the nonce prefix and a monotonically increasing
//! counter, the one serialized resource in this module.

use std::sync::atomic::{AtomicU64, Ordering};

use aes_gcm::aead::{Aead, KeyInit, Payload};
use aes_gcm::{Aes128Gcm, Key, Nonce};

use crate::error::{Error, Result};

pub const KEY_BYTES: usize = 16;
pub const NONCE_BYTES: usize = 12;
pub const TAG_BYTES: usize = 16;
/// Serialized size overhead of a sealed blob over its plaintext.
pub const SEAL_OVERHEAD: usize = NONCE_BYTES + TAG_BYTES;

/// Raw 128-bit key material, distributable between parties.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct SymKey(pub [u8; KEY_BYTES]);

impl std::fmt::Debug for SymKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("SymKey(..)")
    }
}

/// A sealing handle bound to one holder. `holder_tag` occupies the nonce
/// prefix so that multiple holders of the same key cannot collide.
pub struct Sealer {
    key: SymKey,
    cipher: Aes128Gcm,
    holder_tag: u32,
    counter: AtomicU64,
}

impl std::fmt::Debug for Sealer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("Sealer(..)")
    }
}

/// nonce || ciphertext || tag, exactly as serialized on the wire.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SealedBlob {
    pub nonce: [u8; NONCE_BYTES],
    pub ciphertext: Vec<u8>,
}

impl Sealer {
    pub fn new(key: SymKey, holder_tag: u32) -> Self {
        let cipher = Aes128Gcm::new(Key::<Aes128Gcm>::from_slice(&key.0));
        Sealer {
            key,
            cipher,
            holder_tag,
            counter: AtomicU64::new(0),
        }
    }

    pub fn key(&self) -> SymKey {
        self.key
    }

    pub fn seal(&self, plaintext: &[u8]) -> Result<SealedBlob> {
        let count = self.counter.fetch_add(1, Ordering::Relaxed);
        let mut nonce = [0u8; NONCE_BYTES];
        nonce[..4].copy_from_slice(&self.holder_tag.to_le_bytes());
        nonce[4..].copy_from_slice(&count.to_le_bytes());
        let ciphertext = self
            .cipher
            .encrypt(Nonce::from_slice(&nonce), Payload::from(plaintext))
            .map_err(|_| Error::Integrity)?;
        Ok(SealedBlob { nonce, ciphertext })
    }

    pub fn open(&self, blob: &SealedBlob) -> Result<Vec<u8>> {
        self.cipher
            .decrypt(Nonce::from_slice(&blob.nonce), Payload::from(blob.ciphertext.as_slice()))
            .map_err(|_| Error::Integrity)
    }
}

impl SealedBlob {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(NONCE_BYTES + self.ciphertext.len());
        out.extend_from_slice(&self.nonce);
        out.extend_from_slice(&self.ciphertext);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < SEAL_OVERHEAD {
            return Err(Error::Integrity);
        }
        let mut nonce = [0u8; NONCE_BYTES];
        nonce.copy_from_slice(&bytes[..NONCE_BYTES]);
        Ok(SealedBlob {
            nonce,
            ciphertext: bytes[NONCE_BYTES..].to_vec(),
        })
    }

    pub fn serialized_len(&self) -> usize {
        NONCE_BYTES + self.ciphertext.len()
    }
}
