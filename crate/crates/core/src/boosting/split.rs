//! Split scoring and the canonical candidate scan.
//!
//! All split-finding protocols and the plaintext oracle funnel through
//! [`best_local_split`] and [`fold_party_best`], so a decision differs across
//! protocols only if their bucket sums differ -- which the fixed-point
//! pipeline rules out. The scan accumulates left sums in the ring, decodes
//! exactly once per candidate, and replaces the incumbent only on a strictly
//! greater score, scanning (party, feature, threshold) ascending.

use crate::boosting::dataset::{PartyId, VerticalDataset};
use crate::boosting::gradients::FxGradients;
use crate::boosting::thresholds::{bucket_aggregate, PartyThresholds};
use crate::crypto::Fx;
use crate::error::{Error, Result};

/// score = g_l^2/(h_l+lambda) + g_r^2/(h_r+lambda) + g^2/(h+lambda),
/// with g_r = g - g_l and h_r = h - h_l.
pub fn split_score(g_l: f64, h_l: f64, g: f64, h: f64, lambda: f64) -> Result<f64> {
    let g_r = g - g_l;
    let h_r = h - h_l;
    let (d_l, d_r, d_p) = (h_l + lambda, h_r + lambda, h + lambda);
    if d_l == 0.0 || d_r == 0.0 || d_p == 0.0 {
        return Err(Error::DivisionByZero);
    }
    Ok(g_l * g_l / d_l + g_r * g_r / d_r + g * g / d_p)
}

/// w = -eta * g / (h + lambda).
pub fn leaf_weight(g: f64, h: f64, lambda: f64, eta: f64) -> Result<f64> {
    let d = h + lambda;
    if d == 0.0 {
        return Err(Error::DivisionByZero);
    }
    Ok(-eta * g / d)
}

/// A candidate split local to one party.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub feature: usize,
    pub threshold: usize,
    pub score: f64,
}

/// The winning candidate across parties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalBest {
    pub party: PartyId,
    pub feature: usize,
    pub threshold: usize,
    pub score: f64,
}

/// Scan one party's bucket sums for its best candidate.
///
/// Threshold index l-1 (everything left, right side empty) is not a
/// candidate; a single-threshold feature is therefore unsplittable and a
/// node where every feature collapses yields `None`.
pub fn best_local_split(
    feature_buckets: &[Vec<(Fx, Fx)>],
    totals: (Fx, Fx),
    lambda: f64,
) -> Result<Option<Candidate>> {
    let g = totals.0.decode();
    let h = totals.1.decode();
    let mut best: Option<Candidate> = None;
    for (feature, buckets) in feature_buckets.iter().enumerate() {
        let mut g_l = Fx::ZERO;
        let mut h_l = Fx::ZERO;
        for (v, &(bg, bh)) in buckets.iter().enumerate() {
            g_l += bg;
            h_l += bh;
            if v + 1 >= buckets.len() {
                break;
            }
            let score = split_score(g_l.decode(), h_l.decode(), g, h, lambda)?;
            if best.is_none_or(|b| score > b.score) {
                best = Some(Candidate { feature, threshold: v, score });
            }
        }
    }
    Ok(best)
}

/// Fold per-party bests, parties visited in ascending id order, replacing
/// only on a strictly greater score.
pub fn fold_party_best(
    acc: &mut Option<GlobalBest>,
    party: PartyId,
    candidate: Option<Candidate>,
) {
    if let Some(c) = candidate {
        if acc.is_none_or(|b| c.score > b.score) {
            *acc = Some(GlobalBest {
                party,
                feature: c.feature,
                threshold: c.threshold,
                score: c.score,
            });
        }
    }
}

/// Plaintext per-feature bucket sums for one party's whole feature set.
pub fn bucket_stats_for_party(
    features: &crate::boosting::dataset::PartyFeatures,
    thresholds: &PartyThresholds,
    rows: &[u32],
    grads: &FxGradients,
) -> Result<Vec<Vec<(Fx, Fx)>>> {
    features
        .columns
        .iter()
        .zip(thresholds)
        .map(|(column, th)| Ok(bucket_aggregate(rows, column, th, &grads.g, &grads.h)?.sums))
        .collect()
}

/// Plaintext reference split finder: enumerate every (party, feature,
/// threshold) candidate over the node's rows.
pub fn find_best_split_oracle(
    dataset: &VerticalDataset,
    thresholds: &[PartyThresholds],
    grads: &FxGradients,
    rows: &[u32],
    lambda: f64,
) -> Result<Option<GlobalBest>> {
    let totals = grads.node_totals(rows);
    let mut best = None;
    for (party, features) in dataset.parties().iter().enumerate() {
        let buckets = bucket_stats_for_party(features, &thresholds[party], rows, grads)?;
        let local = best_local_split(&buckets, totals, lambda)?;
        fold_party_best(&mut best, party, local);
    }
    Ok(best)
}
