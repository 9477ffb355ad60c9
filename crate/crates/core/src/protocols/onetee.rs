//! 1-TEE split finding: a single enclave at the active party.
//!
//! The active host masks fixed-point gradients with fresh one-time pads and
//! broadcasts them; passive parties aggregate masked bucket sums plus the
//! contributing sample ids per bucket, seal everything to the active
//! enclave, and the enclave unmasks, scans, and returns only the winning
//! (party, feature, threshold) indices to the host.

use std::collections::HashMap;
use std::time::Instant;

use crate::boosting::dataset::{PartyId, VerticalDataset, ACTIVE_PARTY};
use crate::boosting::split::{best_local_split, fold_party_best, Candidate, GlobalBest};
use crate::crypto::pads::{gen_pads, mask, PadKind, PadVector};
use crate::crypto::Fx;
use crate::error::{Error, Result};
use crate::federation::channel::{Message, MessageKind, Phase};
use crate::federation::enclave::Enclave;
use crate::federation::topology::{ProtocolKind, Simulation};

use super::timing::{PhaseTimer, TimePhase};
use super::wire;
use super::{
    active_local_candidate, ids_to_rows, partition_and_record, rows_to_ids, LevelNode, RoundCtx,
    SplitDecision, SplitProtocol,
};

pub struct OneTeeProtocol {
    pads: Option<PadVector>,
    round_rows: Vec<u32>,
    last_round: Option<usize>,
    /// Masked broadcasts drained per node when the level arrives.
    inbox: HashMap<(PartyId, usize), wire::MaskedGradients>,
    passive_rows: HashMap<(PartyId, usize), Vec<u32>>,
}

impl OneTeeProtocol {
    pub fn new() -> Self {
        OneTeeProtocol {
            pads: None,
            round_rows: Vec::new(),
            last_round: None,
            inbox: HashMap::new(),
            passive_rows: HashMap::new(),
        }
    }

    fn pads(&self) -> Result<&PadVector> {
        self.pads.as_ref().ok_or_else(|| Error::Config("round not started: no pads".into()))
    }
}

impl Default for OneTeeProtocol {
    fn default() -> Self {
        Self::new()
    }
}

/// Enclave-resident decision: open each party's sealed buckets, re-derive
/// the round pads from the provisioned seed, unmask exact ring sums, and
/// scan for the global best together with the active party's own candidate.
#[allow(clippy::too_many_arguments)]
fn enclave_decide(
    enclave: &Enclave,
    dataset: &VerticalDataset,
    round: u64,
    round_rows: &[u32],
    sealed: &[(PartyId, crate::crypto::SealedBlob)],
    own_candidate: Option<Candidate>,
    totals: (Fx, Fx),
    lambda: f64,
) -> Result<Option<GlobalBest>> {
    let pad_seed = enclave
        .pad_seed()
        .ok_or_else(|| Error::Config("enclave has no pad seed provisioned".into()))?;
    let pads = gen_pads(pad_seed, round, round_rows);

    let mut best = None;
    fold_party_best(&mut best, ACTIVE_PARTY, own_candidate);
    for (party, blob) in sealed {
        let plain = enclave.open(blob)?;
        let features = wire::decode_plain_buckets(&plain)?;
        let mut party_buckets = Vec::with_capacity(features.len());
        for f in &features {
            let mut buckets = Vec::with_capacity(f.buckets.len());
            for (masked_g, masked_h, ids) in &f.buckets {
                let rows: Vec<u32> = ids
                    .iter()
                    .map(|&id| dataset.row_of(id))
                    .collect::<Result<_>>()?;
                let g = pads.unmask_sum(*masked_g, &rows, PadKind::Gradient)?;
                let h = pads.unmask_sum(*masked_h, &rows, PadKind::Hessian)?;
                buckets.push((g, h));
            }
            party_buckets.push(buckets);
        }
        fold_party_best(&mut best, *party, best_local_split(&party_buckets, totals, lambda)?);
    }
    Ok(best)
}

impl SplitProtocol for OneTeeProtocol {
    fn kind(&self) -> ProtocolKind {
        ProtocolKind::OneTee
    }

    fn begin_round(
        &mut self,
        sim: &mut Simulation,
        ctx: &RoundCtx<'_>,
        rows: &[u32],
        timer: &mut PhaseTimer,
    ) -> Result<()> {
        if self.last_round == Some(ctx.round) {
            return Err(Error::Config("one-time pads must not be reused across rounds".into()));
        }
        let t0 = Instant::now();
        self.pads = Some(gen_pads(sim.pad_seed, ctx.round as u64, rows));
        self.round_rows = rows.to_vec();
        self.last_round = Some(ctx.round);
        self.inbox.clear();
        self.passive_rows.clear();
        timer.add(TimePhase::GradientEncrypt, t0.elapsed());
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
        let pads = self.pads()?;
        for node in nodes {
            let ids = rows_to_ids(sim, &node.rows);
            let mut g = Vec::with_capacity(node.rows.len());
            let mut h = Vec::with_capacity(node.rows.len());
            for &row in &node.rows {
                let (pg, ph) = pads.pad_pair(row)?;
                g.push(mask(ctx.grads.g[row as usize], pg));
                h.push(mask(ctx.grads.h[row as usize], ph));
            }
            let payload = wire::MaskedGradients { node: node.node as u32, ids, g, h }.encode();
            for p in sim.passive_ids() {
                sim.router.send(Message {
                    round: ctx.round as u32,
                    phase: Phase::Gradients,
                    kind: MessageKind::MaskedGradients,
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
                let masked = wire::MaskedGradients::decode(&msg.payload)?;
                if masked.node != node.node as u32 {
                    return Err(Error::Protocol("masked gradients out of order".into()));
                }
                self.inbox.insert((p, node.node), masked);
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
        // Passive parties aggregate masked sums per bucket and seal them,
        // together with the contributing ids, to the active enclave.
        let t0 = Instant::now();
        for p in sim.passive_ids().collect::<Vec<_>>() {
            let masked = self
                .inbox
                .remove(&(p, node.node))
                .ok_or_else(|| Error::Protocol("no masked gradients for this node".into()))?;
            let rows = ids_to_rows(sim, &masked.ids)?;
            self.passive_rows.insert((p, node.node), rows.clone());

            let mut features = Vec::new();
            for (k, column) in sim.dataset.party(p).columns.iter().enumerate() {
                let members =
                    crate::boosting::thresholds::bucket_members(&rows, column, &sim.thresholds[p][k])?;
                let buckets = members
                    .iter()
                    .map(|bucket| {
                        let mut gs = 0u64;
                        let mut hs = 0u64;
                        let mut ids = Vec::with_capacity(bucket.len());
                        for &row in bucket {
                            let idx = rows
                                .binary_search(&row)
                                .map_err(|_| Error::UnknownSample(row as u64))?;
                            gs = gs.wrapping_add(masked.g[idx]);
                            hs = hs.wrapping_add(masked.h[idx]);
                            ids.push(sim.dataset.id_of(row));
                        }
                        Ok((gs, hs, ids))
                    })
                    .collect::<Result<Vec<_>>>()?;
                features.push(wire::MaskedFeatureBuckets { feature: k as u32, buckets });
            }
            let plain = wire::encode_plain_buckets(&features);
            let sealer = sim.parties[p]
                .keys
                .sym
                .as_ref()
                .ok_or_else(|| Error::Config(format!("passive party {p} has no symmetric key")))?;
            let blob = sealer.seal(&plain)?;
            let payload = wire::SealedBuckets { node: node.node as u32, blob }.encode();
            sim.router.send(Message {
                round: ctx.round as u32,
                phase: Phase::Splits,
                kind: MessageKind::SealedBuckets,
                sender: p,
                receiver: ACTIVE_PARTY,
                payload,
            });
        }
        timer.add(TimePhase::Aggregate, t0.elapsed());

        // Active host forwards the sealed blobs into its enclave, which
        // unmasks and decides.
        let t0 = Instant::now();
        let totals = ctx.grads.node_totals(&node.rows);
        let lambda = ctx.params.lambda;
        let own = active_local_candidate(sim, &node.rows, ctx.grads, totals, lambda)?;
        let mut sealed = Vec::new();
        for p in sim.passive_ids().collect::<Vec<_>>() {
            let msg = sim.router.recv(p, ACTIVE_PARTY)?;
            let buckets = wire::SealedBuckets::decode(&msg.payload)?;
            sealed.push((p, buckets.blob));
        }
        let best = enclave_decide(
            sim.parties[ACTIVE_PARTY].enclave()?,
            &sim.dataset,
            ctx.round as u64,
            &self.round_rows,
            &sealed,
            own,
            totals,
            lambda,
        )?;
        timer.add(TimePhase::Decide, t0.elapsed());

        let Some(best) = best else { return Ok(None) };

        let t0 = Instant::now();
        let (record, left_rows) = if best.party == ACTIVE_PARTY {
            partition_and_record(sim, ACTIVE_PARTY, best.feature, best.threshold, &node.rows)?
        } else {
            let p = best.party;
            sim.router.send(Message {
                round: ctx.round as u32,
                phase: Phase::Decision,
                kind: MessageKind::WinnerNotify,
                sender: ACTIVE_PARTY,
                receiver: p,
                payload: wire::WinnerNotify {
                    node: node.node as u32,
                    feature: best.feature as u32,
                    threshold: best.threshold as u32,
                }
                .encode(),
            });
            let msg = sim.router.recv(ACTIVE_PARTY, p)?;
            let notify = wire::WinnerNotify::decode(&msg.payload)?;
            let rows = self
                .passive_rows
                .get(&(p, notify.node as usize))
                .cloned()
                .ok_or_else(|| Error::Protocol("winner notified for unknown node".into()))?;
            let (record, left) = partition_and_record(
                sim,
                p,
                notify.feature as usize,
                notify.threshold as usize,
                &rows,
            )?;
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
                sender: p,
                receiver: ACTIVE_PARTY,
                payload,
            });
            let msg = sim.router.recv(p, ACTIVE_PARTY)?;
            let result = wire::PartitionResult::decode(&msg.payload)?;
            (result.record, ids_to_rows(sim, &result.left_ids)?)
        };
        timer.add(TimePhase::Partition, t0.elapsed());

        Ok(Some(SplitDecision {
            party: best.party,
            record,
            feature: best.feature,
            threshold_index: best.threshold,
            score: best.score,
            left_rows,
        }))
    }
}
