//! One-time-pad masking over `Z_{2^64}`.
//!
//! Pads are drawn uniformly over the full ring, which hides a single use
//! information-theoretically. Masked sums unmask exactly because ring
//! addition is associative and commutative.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::crypto::fixed::Fx;
use crate::error::{Error, Result};

/// Per-sample pad pairs for one boosting round, reproducible from
/// `(seed, round)`. Rows must be the round's instance set in ascending order.
#[derive(Debug, Clone)]
pub struct PadVector {
    rows: Vec<u32>,
    g: Vec<u64>,
    h: Vec<u64>,
}

/// Derive the pad generator state for a round.
pub fn pad_rng(seed: u64, round: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed ^ round.wrapping_mul(0xd1b5_4a32_d192_ed03))
}

pub fn gen_pads(seed: u64, round: u64, rows: &[u32]) -> PadVector {
    let mut rng = pad_rng(seed, round);
    let mut g = Vec::with_capacity(rows.len());
    let mut h = Vec::with_capacity(rows.len());
    for _ in rows {
        g.push(rng.next_u64());
        h.push(rng.next_u64());
    }
    PadVector {
        rows: rows.to_vec(),
        g,
        h,
    }
}

pub fn mask(value: Fx, pad: u64) -> u64 {
    value.0.wrapping_add(pad)
}

impl PadVector {
    pub fn rows(&self) -> &[u32] {
        &self.rows
    }

    pub fn pad_pair(&self, row: u32) -> Result<(u64, u64)> {
        let pos = self.position(row)?;
        Ok((self.g[pos], self.h[pos]))
    }

    /// Remove the pads of `rows_subset` from a masked ring sum. Exact: no
    /// tolerance is involved.
    pub fn unmask_sum(&self, masked_sum: u64, rows_subset: &[u32], which: PadKind) -> Result<Fx> {
        let pads = match which {
            PadKind::Gradient => &self.g,
            PadKind::Hessian => &self.h,
        };
        let mut acc = masked_sum;
        for &row in rows_subset {
            let pos = self.position(row)?;
            acc = acc.wrapping_sub(pads[pos]);
        }
        Ok(Fx(acc))
    }

    fn position(&self, row: u32) -> Result<usize> {
        self.rows
            .binary_search(&row)
            .map_err(|_| Error::UnknownSample(row as u64))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PadKind {
    Gradient,
    Hessian,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn empty_subset_unmasks_to_input() {
        let pads = gen_pads(1, 0, &[0, 1, 2]);
        assert_eq!(pads.unmask_sum(0, &[], PadKind::Gradient).unwrap(), Fx(0));
    }

    #[test]
    fn single_sample_round_trip() {
        let pads = gen_pads(2, 0, &[5]);
        let v = Fx::encode(-0.375).unwrap();
        let (gp, _) = pads.pad_pair(5).unwrap();
        let masked = mask(v, gp);
        assert_eq!(pads.unmask_sum(masked, &[5], PadKind::Gradient).unwrap(), v);
    }

    #[test]
    fn random_subsets_unmask_bit_exactly() {
        let rows: Vec<u32> = (0..100).collect();
        let pads = gen_pads(3, 7, &rows);
        let mut rng = pad_rng(99, 0);
        let values: Vec<Fx> = (0..100)
            .map(|_| Fx::encode(rng.gen_range(-1.0..1.0)).unwrap())
            .collect();
        for _ in 0..1000 {
            let subset: Vec<u32> = rows
                .iter()
                .copied()
                .filter(|_| rng.gen_bool(0.5))
                .collect();
            let mut masked_sum = 0u64;
            let mut plain_sum = Fx::ZERO;
            for &row in &subset {
                let (gp, _) = pads.pad_pair(row).unwrap();
                masked_sum = masked_sum.wrapping_add(mask(values[row as usize], gp));
                plain_sum += values[row as usize];
            }
            let unmasked = pads.unmask_sum(masked_sum, &subset, PadKind::Gradient).unwrap();
            assert_eq!(unmasked, plain_sum);
        }
    }

    #[test]
    fn unknown_row_is_rejected() {
        let pads = gen_pads(4, 0, &[1, 2]);
        assert!(matches!(
            pads.unmask_sum(0, &[3], PadKind::Gradient),
            Err(Error::UnknownSample(3))
        ));
    }

    #[test]
    fn pads_are_reproducible_from_seed_and_round() {
        let a = gen_pads(5, 2, &[0, 1]);
        let b = gen_pads(5, 2, &[0, 1]);
        let c = gen_pads(5, 3, &[0, 1]);
        assert_eq!(a.g, b.g);
        assert_ne!(a.g, c.g);
    }
}
