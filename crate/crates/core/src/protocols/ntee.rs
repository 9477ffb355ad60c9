//! N-TEE split finding: enclaves at every party.
//!
//! The active enclave seals fixed-point gradients to each passive enclave;
//! each passive enclave finds its best local split and seals back only the
//! score. The active enclave compares scores (its own party competes as
//! party 0) and announces the winning party; the winner's enclave releases
//! the feature and threshold to its host, which partitions. Per node only
//! one sealed score crosses the wire per passive party, independent of
//! feature and threshold counts.

use std::collections::HashMap;
use std::time::Instant;

use crate::boosting::dataset::{PartyId, ACTIVE_PARTY};
use crate::boosting::split::{best_local_split, bucket_stats_for_party, Candidate};
use crate::boosting::gradients::FxGradients;
use crate::crypto::Fx;
use crate::error::{Error, Result};
use crate::federation::channel::{Message, MessageKind, Phase};
use crate::federation::enclave::Enclave;
use crate::federation::topology::{ProtocolKind, Simulation};

use super::timing::{PhaseTimer, TimePhase};
use super::wire;
use super::{
    active_local_candidate, gather, ids_to_rows, partition_and_record, rows_to_ids, LevelNode,
    RoundCtx, SplitDecision, SplitProtocol,
};

pub struct NTeeProtocol {
    /// Sealed gradient broadcasts drained per node when the level arrives.
    inbox: HashMap<(PartyId, usize), wire::SealedGradients>,
    /// Winning candidates retained inside each passive enclave.
    enclave_best: HashMap<(PartyId, usize), Option<Candidate>>,
    /// Node instance sets known to passive hosts for partitioning.
    host_rows: HashMap<(PartyId, usize), Vec<u32>>,
}

impl NTeeProtocol {
    pub fn new() -> Self {
        NTeeProtocol {
            inbox: HashMap::new(),
            enclave_best: HashMap::new(),
            host_rows: HashMap::new(),
        }
    }
}

impl Default for NTeeProtocol {
    fn default() -> Self {
        Self::new()
    }
}

/// Enclave-resident aggregation: open the sealed gradients, rebuild the
/// per-row fixed-point vectors, scan this party's features for its best
/// candidate. Nothing but the sealed score leaves this function's outputs.
fn enclave_local_best(
    enclave: &Enclave,
    party: &crate::boosting::dataset::PartyFeatures,
    thresholds: &crate::boosting::thresholds::PartyThresholds,
    rows: &[u32],
    blobs: &[crate::crypto::SealedBlob],
    n_total_rows: usize,
    lambda: f64,
) -> Result<Option<Candidate>> {
    let plain = enclave.open_chunked(blobs)?;
    let (g_vals, h_vals) = wire::decode_plain_gradient_values(&plain)?;
    if g_vals.len() != rows.len() {
        return Err(Error::Protocol("sealed gradients do not match instance set".into()));
    }
    let mut grads = FxGradients { g: vec![Fx::ZERO; n_total_rows], h: vec![Fx::ZERO; n_total_rows] };
    let mut totals = (Fx::ZERO, Fx::ZERO);
    for (i, &row) in rows.iter().enumerate() {
        grads.g[row as usize] = g_vals[i];
        grads.h[row as usize] = h_vals[i];
        totals.0 += g_vals[i];
        totals.1 += h_vals[i];
    }
    let buckets = bucket_stats_for_party(party, thresholds, rows, &grads)?;
    best_local_split(&buckets, totals, lambda)
}

impl SplitProtocol for NTeeProtocol {
    fn kind(&self) -> ProtocolKind {
        ProtocolKind::NTee
    }

    fn begin_round(
        &mut self,
        _sim: &mut Simulation,
        _ctx: &RoundCtx<'_>,
        _rows: &[u32],
        _timer: &mut PhaseTimer,
    ) -> Result<()> {
        self.inbox.clear();
        self.enclave_best.clear();
        self.host_rows.clear();
        Ok(())
    }

    fn begin_level(
        &mut self,
        sim: &mut Simulation,
        ctx: &RoundCtx<'_>,
        nodes: &[LevelNode],
        timer: &mut PhaseTimer,
    ) -> Result<()> {
        let t0 = Instant::now();
        for node in nodes {
            let ids = rows_to_ids(sim, &node.rows);
            let g_vals = gather(&ctx.grads.g, &node.rows);
            let h_vals = gather(&ctx.grads.h, &node.rows);
            let plain = wire::encode_plain_gradient_values(&g_vals, &h_vals);
            let blobs = sim.parties[ACTIVE_PARTY].enclave()?.seal_chunked(&plain)?;
            let payload = wire::SealedGradients { node: node.node as u32, ids, blobs }.encode();
            for p in sim.passive_ids() {
                sim.router.send(Message {
                    round: ctx.round as u32,
                    phase: Phase::Gradients,
                    kind: MessageKind::SealedGradients,
                    sender: ACTIVE_PARTY,
                    receiver: p,
                    payload: payload.clone(),
                });
            }
        }
        timer.add(TimePhase::GradientEncrypt, t0.elapsed());

        let t0 = Instant::now();
        for p in sim.passive_ids().collect::<Vec<_>>() {
            for node in nodes {
                let msg = sim.router.recv(ACTIVE_PARTY, p)?;
                let sealed = wire::SealedGradients::decode(&msg.payload)?;
                if sealed.node != node.node as u32 {
                    return Err(Error::Protocol("sealed gradients out of order".into()));
                }
                self.inbox.insert((p, node.node), sealed);
            }
        }
        timer.add(TimePhase::Aggregate, t0.elapsed());
        Ok(())
    }

    fn find_split(
        &mut self,
        sim: &mut Simulation,
        ctx: &RoundCtx<'_>,
        node: &LevelNode,
        timer: &mut PhaseTimer,
    ) -> Result<Option<SplitDecision>> {
        let lambda = ctx.params.lambda;
        let n_total = sim.dataset.n_samples();

        // Passive enclaves scan their features and seal back one score each.
        let t0 = Instant::now();
        for p in sim.passive_ids().collect::<Vec<_>>() {
            let sealed = self
                .inbox
                .remove(&(p, node.node))
                .ok_or_else(|| Error::Protocol("no sealed gradients for this node".into()))?;
            let rows = ids_to_rows(sim, &sealed.ids)?;
            self.host_rows.insert((p, node.node), rows.clone());

            let best = enclave_local_best(
                sim.parties[p].enclave()?,
                sim.dataset.party(p),
                &sim.thresholds[p],
                &rows,
                &sealed.blobs,
                n_total,
                lambda,
            )?;
            self.enclave_best.insert((p, node.node), best);
            let score = best.map_or(f64::NEG_INFINITY, |c| c.score);
            let blob = sim.parties[p].enclave()?.seal(&score.to_le_bytes())?;
            sim.router.send(Message {
                round: ctx.round as u32,
                phase: Phase::Splits,
                kind: MessageKind::SealedScore,
                sender: p,
                receiver: ACTIVE_PARTY,
                payload: wire::SealedScore { node: node.node as u32, blob }.encode(),
            });
        }
        timer.add(TimePhase::Aggregate, t0.elapsed());

        // Active enclave compares sealed scores with the local party-0 best.
        let t0 = Instant::now();
        let totals = ctx.grads.node_totals(&node.rows);
        let own = active_local_candidate(sim, &node.rows, ctx.grads, totals, lambda)?;
        let mut best: Option<(PartyId, f64)> = own.map(|c| (ACTIVE_PARTY, c.score));
        for p in sim.passive_ids().collect::<Vec<_>>() {
            let msg = sim.router.recv(p, ACTIVE_PARTY)?;
            let sealed = wire::SealedScore::decode(&msg.payload)?;
            let plain = sim.parties[ACTIVE_PARTY].enclave()?.open(&sealed.blob)?;
            let score = f64::from_le_bytes(
                plain.as_slice().try_into().map_err(|_| Error::Protocol("bad score blob".into()))?,
            );
            if score.is_finite() && best.is_none_or(|(_, s)| score > s) {
                best = Some((p, score));
            }
        }
        timer.add(TimePhase::Decide, t0.elapsed());

        let Some((winner, score)) = best else { return Ok(None) };

        let t0 = Instant::now();
        let (candidate, record, left_rows) = if winner == ACTIVE_PARTY {
            let c = own.expect("active winner always has a candidate");
            let (record, left) = partition_and_record(sim, ACTIVE_PARTY, c.feature, c.threshold, &node.rows)?;
            (c, record, left)
        } else {
            sim.router.send(Message {
                round: ctx.round as u32,
                phase: Phase::Decision,
                kind: MessageKind::WinnerNotify,
                sender: ACTIVE_PARTY,
                receiver: winner,
                payload: wire::WinnerAnnounce { node: node.node as u32 }.encode(),
            });
            // Winning party's side: the announcement tells its enclave to
            // release the candidate to the host.
            let msg = sim.router.recv(ACTIVE_PARTY, winner)?;
            let announce = wire::WinnerAnnounce::decode(&msg.payload)?;
            let c = self
                .enclave_best
                .get(&(winner, announce.node as usize))
                .copied()
                .flatten()
                .ok_or_else(|| Error::Protocol("winner announced without a candidate".into()))?;
            let rows = self
                .host_rows
                .get(&(winner, announce.node as usize))
                .cloned()
                .ok_or_else(|| Error::Protocol("winner announced for unknown node".into()))?;
            let (record, left) = partition_and_record(sim, winner, c.feature, c.threshold, &rows)?;
            let payload = wire::PartitionResult {
                node: node.node as u32,
                record,
                left_ids: rows_to_ids(sim, &left),
            }
            .encode();
            sim.router.send(Message {
                round: ctx.round as u32,
                phase: Phase::Decision,
                kind: MessageKind::PartitionResult,
                sender: winner,
                receiver: ACTIVE_PARTY,
                payload,
            });
            let msg = sim.router.recv(winner, ACTIVE_PARTY)?;
            let result = wire::PartitionResult::decode(&msg.payload)?;
            let left = ids_to_rows(sim, &result.left_ids)?;
            (c, result.record, left)
        };
        timer.add(TimePhase::Partition, t0.elapsed());

        Ok(Some(SplitDecision {
            party: winner,
            record,
            feature: candidate.feature,
            threshold_index: candidate.threshold,
            score,
            left_rows,
        }))
    }
}
