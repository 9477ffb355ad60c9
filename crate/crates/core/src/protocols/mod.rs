//! Split-finding protocols behind one strategy interface.
//!
//! Four implementations produce identical decisions from identical inputs:
//! a plaintext oracle, SecureBoost over Paillier, N-TEE (enclaves
//! everywhere), and 1-TEE (enclave at the active party only). They differ in
//! what crosses the wire and what the active party gets to decrypt.

pub mod ntee;
pub mod onetee;
pub mod plaintext;
pub mod secureboost;
pub mod timing;
pub mod view;
pub mod wire;

use crate::boosting::dataset::{Hyperparams, PartyId, ACTIVE_PARTY};
use crate::boosting::gradients::FxGradients;
use crate::boosting::split::{best_local_split, bucket_stats_for_party, Candidate};
use crate::boosting::tree::{NodeId, RecordId};
use crate::crypto::Fx;
use crate::error::Result;
use crate::federation::party::SplitRecord;
use crate::federation::topology::{ProtocolKind, Simulation};
use timing::PhaseTimer;

pub use view::{AdversaryView, ViewFeature, ViewNode};

/// A node waiting for a split at the current tree level.
#[derive(Debug, Clone)]
pub struct LevelNode {
    pub node: NodeId,
    /// Instance rows, ascending.
    pub rows: Vec<u32>,
}

/// The outcome of one split-finding round for one node.
#[derive(Debug, Clone)]
pub struct SplitDecision {
    pub party: PartyId,
    pub record: RecordId,
    pub feature: usize,
    pub threshold_index: usize,
    pub score: f64,
    /// Rows descending to the left child, ascending order.
    pub left_rows: Vec<u32>,
}

/// Shared per-round inputs handed to a protocol by the trainer.
pub struct RoundCtx<'a> {
    pub round: usize,
    pub params: &'a Hyperparams,
    pub grads: &'a FxGradients,
}

pub trait SplitProtocol {
    fn kind(&self) -> ProtocolKind;

    /// Called once per boosting round with the round's instance set.
    fn begin_round(
        &mut self,
        _sim: &mut Simulation,
        _ctx: &RoundCtx<'_>,
        _rows: &[u32],
        _timer: &mut PhaseTimer,
    ) -> Result<()> {
        Ok(())
    }

    /// Called once per tree level before its nodes are split; gradient
    /// material for all sibling nodes is distributed here.
    fn begin_level(
        &mut self,
        _sim: &mut Simulation,
        _ctx: &RoundCtx<'_>,
        _nodes: &[LevelNode],
        _timer: &mut PhaseTimer,
    ) -> Result<()> {
        Ok(())
    }

    fn find_split(
        &mut self,
        sim: &mut Simulation,
        ctx: &RoundCtx<'_>,
        node: &LevelNode,
        timer: &mut PhaseTimer,
    ) -> Result<Option<SplitDecision>>;
}

/// Instantiate the protocol named by the simulation mode.
pub fn make_protocol(kind: ProtocolKind) -> Box<dyn SplitProtocol> {
    match kind {
        ProtocolKind::Plaintext => Box::new(plaintext::PlaintextProtocol),
        ProtocolKind::SecureBoost => Box::new(secureboost::SecureBoostProtocol::new()),
        ProtocolKind::NTee => Box::new(ntee::NTeeProtocol::new()),
        ProtocolKind::OneTee => Box::new(onetee::OneTeeProtocol::new()),
    }
}

pub(crate) fn rows_to_ids(sim: &Simulation, rows: &[u32]) -> Vec<u64> {
    rows.iter().map(|&r| sim.dataset.id_of(r)).collect()
}

pub(crate) fn ids_to_rows(sim: &Simulation, ids: &[u64]) -> Result<Vec<u32>> {
    ids.iter().map(|&id| sim.dataset.row_of(id)).collect()
}

pub(crate) fn gather(vals: &[Fx], rows: &[u32]) -> Vec<Fx> {
    rows.iter().map(|&r| vals[r as usize]).collect()
}

/// The active party's own best candidate, computed in plaintext over its
/// local features. Party 0 competes in every protocol's scan.
pub(crate) fn active_local_candidate(
    sim: &Simulation,
    rows: &[u32],
    grads: &FxGradients,
    totals: (Fx, Fx),
    lambda: f64,
) -> Result<Option<Candidate>> {
    let buckets = bucket_stats_for_party(
        sim.dataset.party(ACTIVE_PARTY),
        &sim.thresholds[ACTIVE_PARTY],
        rows,
        grads,
    )?;
    best_local_split(&buckets, totals, lambda)
}

/// At the owning party: store the winning (feature, threshold) under a fresh
/// record id and partition the node's rows by bucket index.
pub(crate) fn partition_and_record(
    sim: &mut Simulation,
    party: PartyId,
    feature: usize,
    threshold_index: usize,
    rows: &[u32],
) -> Result<(RecordId, Vec<u32>)> {
    let threshold_value = sim.thresholds[party][feature].values()[threshold_index];
    let record = sim.parties[party].records.add(SplitRecord {
        feature,
        threshold_index,
        threshold_value,
    });
    let (left, _right) = partition_node(sim, party, record, rows)?;
    Ok((record, left))
}

/// Partition an instance set at the owning party by a stored record:
/// rows whose bucket index is at most the recorded threshold go left.
pub fn partition_node(
    sim: &Simulation,
    party: PartyId,
    record: RecordId,
    rows: &[u32],
) -> Result<(Vec<u32>, Vec<u32>)> {
    let rec = sim.parties[party].records.get(record)?;
    let column = &sim.dataset.party(party).columns[rec.feature];
    let thresholds = &sim.thresholds[party][rec.feature];
    let mut left = Vec::new();
    let mut right = Vec::new();
    for &row in rows {
        if thresholds.bucket_of(column[row as usize])? <= rec.threshold_index {
            left.push(row);
        } else {
            right.push(row);
        }
    }
    Ok((left, right))
}
