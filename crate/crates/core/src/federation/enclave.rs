//! Simulated trusted execution environment.
//!
//! An enclave is an in-process logical component: the host can load code
//! identity, attest it, and exchange opaque blobs, but never reads the keys
//! or plaintext held inside. Hardware isolation, sealing to disk, and real
//! attestation are out of scope; the trust boundary is exercised by auditing
//! host-visible transcripts.

use crate::crypto::{SealedBlob, Sealer, SymKey};
use crate::error::{Error, Result};

#[derive(Debug)]
pub struct Enclave {
    code_identity: String,
    sealer: Option<Sealer>,
    pad_seed: Option<u64>,
    /// Maximum plaintext bytes held at once; larger inputs are paged through
    /// sequentially as separate sealed chunks.
    memory_budget: Option<usize>,
}

impl Enclave {
    pub fn new(code_identity: impl Into<String>, memory_budget: Option<usize>) -> Self {
        Enclave {
            code_identity: code_identity.into(),
            sealer: None,
            pad_seed: None,
            memory_budget,
        }
    }

    /// Attestation stub: code-identity equality.
    pub fn attest(&self, expected: &str) -> bool {
        self.code_identity == expected
    }

    pub fn code_identity(&self) -> &str {
        &self.code_identity
    }

    pub fn memory_budget(&self) -> Option<usize> {
        self.memory_budget
    }

    /// Install the shared symmetric key. `holder_tag` must be unique per
    /// key holder so sealed nonces never collide.
    pub fn provision_key(&mut self, key: SymKey, holder_tag: u32) {
        self.sealer = Some(Sealer::new(key, holder_tag));
    }

    pub fn provision_pad_seed(&mut self, seed: u64) {
        self.pad_seed = Some(seed);
    }

    pub fn has_sym_key(&self) -> bool {
        self.sealer.is_some()
    }

    pub fn pad_seed(&self) -> Option<u64> {
        self.pad_seed
    }

    /// Seal a plaintext produced inside the enclave, split into chunks that
    /// respect the memory budget.
    pub fn seal_chunked(&self, plaintext: &[u8]) -> Result<Vec<SealedBlob>> {
        let sealer = self.sealer()?;
        let chunk = self.memory_budget.unwrap_or(usize::MAX).max(1);
        if plaintext.is_empty() {
            return Ok(vec![sealer.seal(plaintext)?]);
        }
        plaintext.chunks(chunk).map(|c| sealer.seal(c)).collect()
    }

    /// Open chunked input sequentially, reassembling the plaintext.
    pub fn open_chunked(&self, blobs: &[SealedBlob]) -> Result<Vec<u8>> {
        let sealer = self.sealer()?;
        let mut out = Vec::new();
        for blob in blobs {
            out.extend_from_slice(&sealer.open(blob)?);
        }
        Ok(out)
    }

    pub fn seal(&self, plaintext: &[u8]) -> Result<SealedBlob> {
        self.sealer()?.seal(plaintext)
    }

    pub fn open(&self, blob: &SealedBlob) -> Result<Vec<u8>> {
        self.sealer()?.open(blob)
    }

    pub(crate) fn sealer(&self) -> Result<&Sealer> {
        self.sealer
            .as_ref()
            .ok_or_else(|| Error::Config("enclave has no symmetric key provisioned".into()))
    }

}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn attestation_is_identity_equality() {
        let e = Enclave::new("split-finder-v1", None);
        assert!(e.attest("split-finder-v1"));
        assert!(!e.attest("split-finder-v2"));
    }

    #[test]
    fn sealing_requires_provisioned_key() {
        let e = Enclave::new("id", None);
        assert!(e.seal(b"x").is_err());
    }

    #[test]
    fn chunked_sealing_respects_budget_and_round_trips() {
        let mut e = Enclave::new("id", Some(10));
        e.provision_key(SymKey([7u8; 16]), 3);
        let payload: Vec<u8> = (0..64u8).collect();
        let blobs = e.seal_chunked(&payload).unwrap();
        assert_eq!(blobs.len(), 7); // ceil(64 / 10)
        assert_eq!(e.open_chunked(&blobs).unwrap(), payload);
    }

    #[test]
    fn unbudgeted_enclave_seals_one_blob() {
        let mut e = Enclave::new("id", None);
        e.provision_key(SymKey([7u8; 16]), 0);
        assert_eq!(e.seal_chunked(&[1, 2, 3]).unwrap().len(), 1);
    }
}
