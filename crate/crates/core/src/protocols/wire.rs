//! Wire formats for protocol payloads.
//!
//! Layouts are fixed and little-endian so transcript byte counts are exact,
//! deterministic functions of the run configuration:
//!
//! - enc gradients:    node u32 | count u32 | ids 8c | G cts | H cts
//!   (ciphertexts at the key's fixed width, key_bits/4 bytes each)
//! - bucket sums:      node u32 | n_features u32 | per feature:
//!                     k u32 | l u32 | G cts l | H cts l
//! - sealed gradients: node u32 | n_blobs u32 | per blob: len u32 | blob
//!   (blob plaintext: count u32 | ids 8c | g 8c | h 8c)
//! - sealed score:     node u32 | blob (plaintext: score f64)
//! - masked gradients: node u32 | count u32 | ids 8c | g' 8c | h' 8c
//! - sealed buckets:   node u32 | blob (plaintext: n_features u32 |
//!                     per feature: k u32 | l u32 |
//!                     per bucket: g' u64 | h' u64 | cnt u32 | ids 8cnt)
//! - winner notify:    node u32 | k u32 | v u32   (n-tee: node u32 only)
//! - partition result: node u32 | record u32 | count u32 | ids 8c
//! - route query:      record u32 | row u32 ; answer: direction u8

use crate::crypto::paillier::{Ciphertext, PaillierPublic};
use crate::crypto::{Fx, SealedBlob};
use crate::error::{Error, Result};

pub struct Reader<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Reader { buf, at: 0 }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.at + n > self.buf.len() {
            return Err(Error::Protocol("truncated payload".into()));
        }
        let out = &self.buf[self.at..self.at + n];
        self.at += n;
        Ok(out)
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn done(&self) -> Result<()> {
        if self.at != self.buf.len() {
            return Err(Error::Protocol("trailing bytes in payload".into()));
        }
        Ok(())
    }
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

// ------------------------------------------------------------------
// SecureBoost

pub struct EncGradients {
    pub node: u32,
    pub ids: Vec<u64>,
    pub g: Vec<Ciphertext>,
    pub h: Vec<Ciphertext>,
}

impl EncGradients {
    pub fn encode(&self, pk: &PaillierPublic) -> Vec<u8> {
        let ct = pk.ciphertext_bytes();
        let mut out = Vec::with_capacity(8 + self.ids.len() * (8 + 2 * ct));
        put_u32(&mut out, self.node);
        put_u32(&mut out, self.ids.len() as u32);
        for &id in &self.ids {
            put_u64(&mut out, id);
        }
        for c in self.g.iter().chain(&self.h) {
            out.extend_from_slice(&c.to_bytes(pk));
        }
        out
    }

    pub fn decode(pk: &PaillierPublic, payload: &[u8]) -> Result<Self> {
        let mut r = Reader::new(payload);
        let node = r.u32()?;
        let count = r.u32()? as usize;
        let mut ids = Vec::with_capacity(count);
        for _ in 0..count {
            ids.push(r.u64()?);
        }
        let ct = pk.ciphertext_bytes();
        let read_cts = |r: &mut Reader| -> Result<Vec<Ciphertext>> {
            (0..count).map(|_| Ciphertext::from_bytes(pk, r.take(ct)?)).collect()
        };
        let g = read_cts(&mut r)?;
        let h = read_cts(&mut r)?;
        r.done()?;
        Ok(EncGradients { node, ids, g, h })
    }
}

pub struct BucketSums {
    pub node: u32,
    /// (feature, G ciphertexts, H ciphertexts), one ciphertext per bucket.
    pub features: Vec<(u32, Vec<Ciphertext>, Vec<Ciphertext>)>,
}

impl BucketSums {
    pub fn encode(&self, pk: &PaillierPublic) -> Vec<u8> {
        let mut out = Vec::new();
        put_u32(&mut out, self.node);
        put_u32(&mut out, self.features.len() as u32);
        for (k, g, h) in &self.features {
            put_u32(&mut out, *k);
            put_u32(&mut out, g.len() as u32);
            for c in g.iter().chain(h) {
                out.extend_from_slice(&c.to_bytes(pk));
            }
        }
        out
    }

    pub fn decode(pk: &PaillierPublic, payload: &[u8]) -> Result<Self> {
        let mut r = Reader::new(payload);
        let node = r.u32()?;
        let n_features = r.u32()? as usize;
        let ct = pk.ciphertext_bytes();
        let mut features = Vec::with_capacity(n_features);
        for _ in 0..n_features {
            let k = r.u32()?;
            let l = r.u32()? as usize;
            let read = |r: &mut Reader| -> Result<Vec<Ciphertext>> {
                (0..l).map(|_| Ciphertext::from_bytes(pk, r.take(ct)?)).collect()
            };
            let g = read(&mut r)?;
            let h = read(&mut r)?;
            features.push((k, g, h));
        }
        r.done()?;
        Ok(BucketSums { node, features })
    }
}

// ------------------------------------------------------------------
// N-TEE

/// Plaintext carried inside sealed gradient blobs: the values only. Sample
/// ids travel in the clear (the owning host needs them to partition) and
/// associate with values by position.
pub fn encode_plain_gradient_values(g: &[Fx], h: &[Fx]) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 + g.len() * 16);
    put_u32(&mut out, g.len() as u32);
    for fx in g.iter().chain(h) {
        put_u64(&mut out, fx.0);
    }
    out
}

pub fn decode_plain_gradient_values(plain: &[u8]) -> Result<(Vec<Fx>, Vec<Fx>)> {
    let mut r = Reader::new(plain);
    let count = r.u32()? as usize;
    let fxs = |r: &mut Reader| -> Result<Vec<Fx>> {
        (0..count).map(|_| Ok(Fx(r.u64()?))).collect()
    };
    let g = fxs(&mut r)?;
    let h = fxs(&mut r)?;
    r.done()?;
    Ok((g, h))
}

pub struct SealedGradients {
    pub node: u32,
    pub ids: Vec<u64>,
    pub blobs: Vec<SealedBlob>,
}

impl SealedGradients {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        put_u32(&mut out, self.node);
        put_u32(&mut out, self.ids.len() as u32);
        for &id in &self.ids {
            put_u64(&mut out, id);
        }
        put_u32(&mut out, self.blobs.len() as u32);
        for blob in &self.blobs {
            let bytes = blob.to_bytes();
            put_u32(&mut out, bytes.len() as u32);
            out.extend_from_slice(&bytes);
        }
        out
    }

    pub fn decode(payload: &[u8]) -> Result<Self> {
        let mut r = Reader::new(payload);
        let node = r.u32()?;
        let count = r.u32()? as usize;
        let mut ids = Vec::with_capacity(count);
        for _ in 0..count {
            ids.push(r.u64()?);
        }
        let n = r.u32()? as usize;
        let mut blobs = Vec::with_capacity(n);
        for _ in 0..n {
            let len = r.u32()? as usize;
            blobs.push(SealedBlob::from_bytes(r.take(len)?)?);
        }
        r.done()?;
        Ok(SealedGradients { node, ids, blobs })
    }
}

pub struct SealedScore {
    pub node: u32,
    pub blob: SealedBlob,
}

impl SealedScore {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        put_u32(&mut out, self.node);
        out.extend_from_slice(&self.blob.to_bytes());
        out
    }

    pub fn decode(payload: &[u8]) -> Result<Self> {
        let mut r = Reader::new(payload);
        let node = r.u32()?;
        let rest = r.take(payload.len() - 4)?;
        Ok(SealedScore { node, blob: SealedBlob::from_bytes(rest)? })
    }
}

// ------------------------------------------------------------------
// 1-TEE

pub struct MaskedGradients {
    pub node: u32,
    pub ids: Vec<u64>,
    pub g: Vec<u64>,
    pub h: Vec<u64>,
}

impl MaskedGradients {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + self.ids.len() * 24);
        put_u32(&mut out, self.node);
        put_u32(&mut out, self.ids.len() as u32);
        for &id in &self.ids {
            put_u64(&mut out, id);
        }
        for &v in self.g.iter().chain(&self.h) {
            put_u64(&mut out, v);
        }
        out
    }

    pub fn decode(payload: &[u8]) -> Result<Self> {
        let mut r = Reader::new(payload);
        let node = r.u32()?;
        let count = r.u32()? as usize;
        let mut ids = Vec::with_capacity(count);
        for _ in 0..count {
            ids.push(r.u64()?);
        }
        let vals = |r: &mut Reader| -> Result<Vec<u64>> { (0..count).map(|_| r.u64()).collect() };
        let g = vals(&mut r)?;
        let h = vals(&mut r)?;
        r.done()?;
        Ok(MaskedGradients { node, ids, g, h })
    }
}

/// One feature's masked bucket sums with the contributing sample ids.
pub struct MaskedFeatureBuckets {
    pub feature: u32,
    /// (masked g sum, masked h sum, member ids) per bucket.
    pub buckets: Vec<(u64, u64, Vec<u64>)>,
}

/// Plaintext carried inside a sealed-buckets blob.
pub fn encode_plain_buckets(features: &[MaskedFeatureBuckets]) -> Vec<u8> {
    let mut out = Vec::new();
    put_u32(&mut out, features.len() as u32);
    for f in features {
        put_u32(&mut out, f.feature);
        put_u32(&mut out, f.buckets.len() as u32);
        for (g, h, ids) in &f.buckets {
            put_u64(&mut out, *g);
            put_u64(&mut out, *h);
            put_u32(&mut out, ids.len() as u32);
            for &id in ids {
                put_u64(&mut out, id);
            }
        }
    }
    out
}

pub fn decode_plain_buckets(plain: &[u8]) -> Result<Vec<MaskedFeatureBuckets>> {
    let mut r = Reader::new(plain);
    let n_features = r.u32()? as usize;
    let mut features = Vec::with_capacity(n_features);
    for _ in 0..n_features {
        let feature = r.u32()?;
        let l = r.u32()? as usize;
        let mut buckets = Vec::with_capacity(l);
        for _ in 0..l {
            let g = r.u64()?;
            let h = r.u64()?;
            let cnt = r.u32()? as usize;
            let mut ids = Vec::with_capacity(cnt);
            for _ in 0..cnt {
                ids.push(r.u64()?);
            }
            buckets.push((g, h, ids));
        }
        features.push(MaskedFeatureBuckets { feature, buckets });
    }
    r.done()?;
    Ok(features)
}

pub struct SealedBuckets {
    pub node: u32,
    pub blob: SealedBlob,
}

impl SealedBuckets {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        put_u32(&mut out, self.node);
        out.extend_from_slice(&self.blob.to_bytes());
        out
    }

    pub fn decode(payload: &[u8]) -> Result<Self> {
        let mut r = Reader::new(payload);
        let node = r.u32()?;
        let rest = r.take(payload.len() - 4)?;
        Ok(SealedBuckets { node, blob: SealedBlob::from_bytes(rest)? })
    }
}

// ------------------------------------------------------------------
// Decisions and routing

pub struct WinnerNotify {
    pub node: u32,
    pub feature: u32,
    pub threshold: u32,
}

impl WinnerNotify {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12);
        put_u32(&mut out, self.node);
        put_u32(&mut out, self.feature);
        put_u32(&mut out, self.threshold);
        out
    }

    pub fn decode(payload: &[u8]) -> Result<Self> {
        let mut r = Reader::new(payload);
        let out = WinnerNotify { node: r.u32()?, feature: r.u32()?, threshold: r.u32()? };
        r.done()?;
        Ok(out)
    }
}

/// N-TEE winner announcement: the indices stay inside the winning enclave.
pub struct WinnerAnnounce {
    pub node: u32,
}

impl WinnerAnnounce {
    pub fn encode(&self) -> Vec<u8> {
        self.node.to_le_bytes().to_vec()
    }

    pub fn decode(payload: &[u8]) -> Result<Self> {
        let mut r = Reader::new(payload);
        let out = WinnerAnnounce { node: r.u32()? };
        r.done()?;
        Ok(out)
    }
}

pub struct PartitionResult {
    pub node: u32,
    pub record: u32,
    pub left_ids: Vec<u64>,
}

impl PartitionResult {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + self.left_ids.len() * 8);
        put_u32(&mut out, self.node);
        put_u32(&mut out, self.record);
        put_u32(&mut out, self.left_ids.len() as u32);
        for &id in &self.left_ids {
            put_u64(&mut out, id);
        }
        out
    }

    pub fn decode(payload: &[u8]) -> Result<Self> {
        let mut r = Reader::new(payload);
        let node = r.u32()?;
        let record = r.u32()?;
        let count = r.u32()? as usize;
        let mut left_ids = Vec::with_capacity(count);
        for _ in 0..count {
            left_ids.push(r.u64()?);
        }
        r.done()?;
        Ok(PartitionResult { node, record, left_ids })
    }
}

pub struct RouteQuery {
    pub record: u32,
    pub row: u32,
}

impl RouteQuery {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8);
        put_u32(&mut out, self.record);
        put_u32(&mut out, self.row);
        out
    }

    pub fn decode(payload: &[u8]) -> Result<Self> {
        let mut r = Reader::new(payload);
        let out = RouteQuery { record: r.u32()?, row: r.u32()? };
        r.done()?;
        Ok(out)
    }
}

pub fn encode_route_answer(left: bool) -> Vec<u8> {
    vec![left as u8]
}

pub fn decode_route_answer(payload: &[u8]) -> Result<bool> {
    match payload {
        [0] => Ok(false),
        [1] => Ok(true),
        _ => Err(Error::Protocol("malformed route answer".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masked_gradients_round_trip() {
        let msg = MaskedGradients {
            node: 3,
            ids: vec![10, 11, 12],
            g: vec![1, u64::MAX, 5],
            h: vec![9, 8, 7],
        };
        let bytes = msg.encode();
        assert_eq!(bytes.len(), 8 + 3 * 24);
        let back = MaskedGradients::decode(&bytes).unwrap();
        assert_eq!(back.ids, msg.ids);
        assert_eq!(back.g, msg.g);
        assert_eq!(back.h, msg.h);
    }

    #[test]
    fn plain_buckets_round_trip() {
        let features = vec![MaskedFeatureBuckets {
            feature: 2,
            buckets: vec![(5, 6, vec![1, 2]), (7, 8, vec![])],
        }];
        let plain = encode_plain_buckets(&features);
        assert_eq!(plain.len(), 4 + 8 + 2 * 20 + 2 * 8);
        let back = decode_plain_buckets(&plain).unwrap();
        assert_eq!(back[0].feature, 2);
        assert_eq!(back[0].buckets[0].2, vec![1, 2]);
        assert!(back[0].buckets[1].2.is_empty());
    }

    #[test]
    fn partition_result_round_trip() {
        let msg = PartitionResult { node: 1, record: 2, left_ids: vec![4, 5] };
        let bytes = msg.encode();
        assert_eq!(bytes.len(), 12 + 16);
        let back = PartitionResult::decode(&bytes).unwrap();
        assert_eq!(back.left_ids, vec![4, 5]);
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let msg = WinnerNotify { node: 1, feature: 2, threshold: 3 };
        let bytes = msg.encode();
        assert!(WinnerNotify::decode(&bytes[..8]).is_err());
    }
}
