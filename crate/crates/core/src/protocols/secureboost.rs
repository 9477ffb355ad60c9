//! SecureBoost split finding over Paillier.
//!
//! Per level the active party broadcasts encrypted per-sample gradients for
//! each sibling node; passive parties fold per-bucket homomorphic sums for
//! every local feature and return them; the active party decrypts every
//! bucket of every feature, scans for the global best, notifies the winner,
//! and receives the partition. Everything the active party decrypts is
//! recorded in the adversary view.

use std::collections::HashMap;
use std::time::Instant;

use crate::boosting::dataset::{PartyId, ACTIVE_PARTY};
use crate::boosting::split::{best_local_split, fold_party_best};
use crate::boosting::thresholds::bucket_members;
use crate::crypto::paillier::{
    add as ct_add, decrypt_ring_batch, encrypt_ring_batch_with_secret, encrypt_zero, Ciphertext,
};
use crate::crypto::Fx;
use crate::error::{Error, Result};
use crate::federation::channel::{Message, MessageKind, Phase};
use crate::federation::topology::{ProtocolKind, Simulation};
use crate::seeding;

use super::timing::{PhaseTimer, TimePhase};
use super::view::{ViewFeature, ViewNode};
use super::wire;
use super::{
    active_local_candidate, gather, ids_to_rows, partition_and_record, rows_to_ids, LevelNode,
    RoundCtx, SplitDecision, SplitProtocol,
};

pub struct SecureBoostProtocol {
    /// Per-node gradient broadcasts as decoded by each passive party when
    /// the level's messages arrive.
    inbox: HashMap<(PartyId, usize), wire::EncGradients>,
    /// Node instance sets as learned by each passive party this round.
    passive_rows: HashMap<(PartyId, usize), Vec<u32>>,
    /// Deterministic counter for randomizers of empty-bucket encryptions.
    zero_ctr: u64,
}

impl SecureBoostProtocol {
    pub fn new() -> Self {
        SecureBoostProtocol {
            inbox: HashMap::new(),
            passive_rows: HashMap::new(),
            zero_ctr: 0,
        }
    }
}

impl Default for SecureBoostProtocol {
    fn default() -> Self {
        Self::new()
    }
}

impl SplitProtocol for SecureBoostProtocol {
    fn kind(&self) -> ProtocolKind {
        ProtocolKind::SecureBoost
    }

    fn begin_round(
        &mut self,
        _sim: &mut Simulation,
        _ctx: &RoundCtx<'_>,
        _rows: &[u32],
        _timer: &mut PhaseTimer,
    ) -> Result<()> {
        self.inbox.clear();
        self.passive_rows.clear();
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
        let pk = sim.paillier_public()?.clone();
        let sk = sim.parties[ACTIVE_PARTY]
            .keys
            .paillier_sk
            .clone()
            .ok_or_else(|| Error::Config("active party has no paillier secret key".into()))?;
        for node in nodes {
            let ids = rows_to_ids(sim, &node.rows);
            let g_vals = gather(&ctx.grads.g, &node.rows);
            let h_vals = gather(&ctx.grads.h, &node.rows);
            let tag = ((ctx.round as u64) << 32) | node.node as u64;
            let g = encrypt_ring_batch_with_secret(
                &pk, &sk, &g_vals,
                seeding::derive(sim.setup.seed, "sb-enc-g", tag),
            )?;
            let h = encrypt_ring_batch_with_secret(
                &pk, &sk, &h_vals,
                seeding::derive(sim.setup.seed, "sb-enc-h", tag),
            )?;
            let payload = wire::EncGradients { node: node.node as u32, ids, g, h }.encode(&pk);
            for p in sim.passive_ids() {
                sim.router.send(Message {
                    round: ctx.round as u32,
                    phase: Phase::Gradients,
                    kind: MessageKind::EncGradients,
                    sender: ACTIVE_PARTY,
                    receiver: p,
                    payload: payload.clone(),
                });
            }
        }
        timer.add(TimePhase::GradientEncrypt, t0.elapsed());

        // Passive side: drain the level's broadcasts on arrival.
        let t0 = Instant::now();
        for p in sim.passive_ids().collect::<Vec<_>>() {
            for node in nodes {
                let msg = sim.router.recv(ACTIVE_PARTY, p)?;
                let grads = wire::EncGradients::decode(&pk, &msg.payload)?;
                if grads.node != node.node as u32 {
                    return Err(Error::Protocol("gradient broadcast out of order".into()));
                }
                self.inbox.insert((p, node.node), grads);
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
        let pk = sim.paillier_public()?.clone();

        // Each passive party folds homomorphic bucket sums per local feature.
        let t0 = Instant::now();
        for p in sim.passive_ids().collect::<Vec<_>>() {
            let grads = self
                .inbox
                .remove(&(p, node.node))
                .ok_or_else(|| Error::Protocol("no gradient broadcast for this node".into()))?;
            let rows = ids_to_rows(sim, &grads.ids)?;
            self.passive_rows.insert((p, node.node), rows.clone());

            let mut features = Vec::new();
            for (k, column) in sim.dataset.party(p).columns.iter().enumerate() {
                let members = bucket_members(&rows, column, &sim.thresholds[p][k])?;
                let mut g_cts = Vec::with_capacity(members.len());
                let mut h_cts = Vec::with_capacity(members.len());
                for bucket in &members {
                    g_cts.push(self.fold_bucket(&pk, sim, &rows, &grads.g, bucket)?);
                    h_cts.push(self.fold_bucket(&pk, sim, &rows, &grads.h, bucket)?);
                }
                features.push((k as u32, g_cts, h_cts));
            }
            let payload = wire::BucketSums { node: node.node as u32, features }.encode(&pk);
            sim.router.send(Message {
                round: ctx.round as u32,
                phase: Phase::Splits,
                kind: MessageKind::BucketSums,
                sender: p,
                receiver: ACTIVE_PARTY,
                payload,
            });
        }
        timer.add(TimePhase::Aggregate, t0.elapsed());

        // Active party decrypts every bucket, records the leak, scans.
        let t0 = Instant::now();
        let totals = ctx.grads.node_totals(&node.rows);
        let lambda = ctx.params.lambda;
        let mut best = None;
        fold_party_best(
            &mut best,
            ACTIVE_PARTY,
            active_local_candidate(sim, &node.rows, ctx.grads, totals, lambda)?,
        );

        let sk = sim.parties[ACTIVE_PARTY]
            .keys
            .paillier_sk
            .clone()
            .ok_or_else(|| Error::Config("active party has no paillier secret key".into()))?;
        let mut view_features = Vec::new();
        for p in sim.passive_ids().collect::<Vec<_>>() {
            let msg = sim.router.recv(p, ACTIVE_PARTY)?;
            let sums = wire::BucketSums::decode(&pk, &msg.payload)?;
            let mut party_buckets = Vec::with_capacity(sums.features.len());
            for (k, g_cts, h_cts) in &sums.features {
                let g = decrypt_ring_batch(&pk, &sk, g_cts)?;
                let h = decrypt_ring_batch(&pk, &sk, h_cts)?;
                let buckets: Vec<(Fx, Fx)> = g.into_iter().zip(h).collect();
                view_features.push(ViewFeature { party: p, feature: *k as usize, buckets: buckets.clone() });
                party_buckets.push(buckets);
            }
            fold_party_best(&mut best, p, best_local_split(&party_buckets, totals, lambda)?);
        }
        let ids = rows_to_ids(sim, &node.rows);
        let gradients = node.rows.iter().map(|&r| (ctx.grads.g[r as usize], ctx.grads.h[r as usize])).collect();
        sim.view.nodes.push(ViewNode {
            round: ctx.round as u32,
            node: node.node as u32,
            rows: node.rows.clone(),
            ids,
            gradients,
            features: view_features,
        });
        timer.add(TimePhase::Decide, t0.elapsed());

        let Some(best) = best else { return Ok(None) };

        // Winner stores the split privately and returns the partition.
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
            // Owning party side.
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
            // Back at the active party.
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

impl SecureBoostProtocol {
    /// Homomorphic fold of one bucket's ciphertexts; empty buckets produce a
    /// fresh encryption of zero.
    fn fold_bucket(
        &mut self,
        pk: &crate::crypto::paillier::PaillierPublic,
        sim: &Simulation,
        rows: &[u32],
        cts: &[Ciphertext],
        bucket: &[u32],
    ) -> Result<Ciphertext> {
        let mut acc: Option<Ciphertext> = None;
        for &row in bucket {
            let idx = rows.binary_search(&row).map_err(|_| Error::UnknownSample(row as u64))?;
            acc = Some(match acc {
                None => cts[idx].clone(),
                Some(a) => ct_add(pk, &a, &cts[idx])?,
            });
        }
        match acc {
            Some(ct) => Ok(ct),
            None => {
                self.zero_ctr += 1;
                let mut rng = seeding::rng(sim.setup.seed, "sb-enc-zero", self.zero_ctr);
                encrypt_zero(pk, &mut rng)
            }
        }
    }
}
