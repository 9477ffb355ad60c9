//! Closed-form communication accounting.
//!
//! Reconstructs the per-node run structure by replaying the trained model
//! over the seeded subsamples, then evaluates explicit byte formulas per
//! protocol. The formulas are written out independently of the wire
//! serializers so that a measured-equals-expected check actually verifies
//! the transcripts.

use std::collections::BTreeMap;

use fedboost::boosting::dataset::{Hyperparams, VerticalDataset, ACTIVE_PARTY};
use fedboost::boosting::trainer::subsample_rows;
use fedboost::boosting::tree::{ResolvedModel, ResolvedNode};
use fedboost::error::Result;
use fedboost::federation::topology::ProtocolKind;

/// Expected bytes per protocol phase.
#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ExpectedBytes {
    pub setup: u64,
    pub gradients: u64,
    pub splits: u64,
    pub decision: u64,
    pub inference: u64,
}

impl ExpectedBytes {
    pub fn split_finding(&self) -> u64 {
        self.gradients + self.splits + self.decision
    }

    pub fn total(&self) -> u64 {
        self.setup + self.split_finding() + self.inference
    }
}

/// One node that attempted a split: its instance count and, when a split
/// was found, the winning party and the left-child size.
#[derive(Debug, Clone)]
pub struct NodeTrace {
    pub n_rows: u64,
    pub winner: Option<(usize, u64)>,
}

#[derive(Debug, Clone, Default)]
pub struct TreeTrace {
    pub nodes: Vec<NodeTrace>,
    /// Tree edges owned by passive parties crossed while routing
    /// out-of-subsample rows during the logit update.
    pub oob_passive_edges: u64,
}

#[derive(Debug, Clone, Default)]
pub struct RunTrace {
    pub trees: Vec<TreeTrace>,
}

/// Replay the run structure from the resolved model: per tree, re-derive the
/// subsample, partition instance sets down the tree, and count which nodes
/// attempted splits.
pub fn replay_trace(
    dataset: &VerticalDataset,
    model: &ResolvedModel,
    params: &Hyperparams,
) -> Result<RunTrace> {
    let n = dataset.n_samples();
    let mut trace = RunTrace::default();
    for (round, tree) in model.trees.iter().enumerate() {
        let rows = subsample_rows(n, params.subsample, params.seed, round);
        let mut tt = TreeTrace::default();

        let mut frontier: Vec<(usize, Vec<u32>)> = vec![(0, rows.clone())];
        for _depth in 0..params.max_depth {
            let mut next = Vec::new();
            for (node, node_rows) in frontier {
                if node_rows.len() < 2 {
                    continue;
                }
                match &tree.nodes[node] {
                    ResolvedNode::Leaf { .. } => {
                        // Attempted a split, found none.
                        tt.nodes.push(NodeTrace { n_rows: node_rows.len() as u64, winner: None });
                    }
                    ResolvedNode::Internal { split, left, right } => {
                        let column = &dataset.party(split.party).columns[split.feature];
                        let (l, r): (Vec<u32>, Vec<u32>) = node_rows
                            .iter()
                            .partition(|&&row| column[row as usize] <= split.threshold_value);
                        tt.nodes.push(NodeTrace {
                            n_rows: node_rows.len() as u64,
                            winner: Some((split.party, l.len() as u64)),
                        });
                        next.push((*left, l));
                        next.push((*right, r));
                    }
                }
            }
            frontier = next;
            if frontier.is_empty() {
                break;
            }
        }

        // Out-of-subsample rows are routed through the owning parties.
        let in_sample: std::collections::HashSet<u32> = rows.iter().copied().collect();
        for row in 0..n as u32 {
            if in_sample.contains(&row) {
                continue;
            }
            let mut at = 0usize;
            loop {
                match &tree.nodes[at] {
                    ResolvedNode::Leaf { .. } => break,
                    ResolvedNode::Internal { split, left, right } => {
                        if split.party != ACTIVE_PARTY {
                            tt.oob_passive_edges += 1;
                        }
                        let x = dataset.party(split.party).columns[split.feature][row as usize];
                        at = if x <= split.threshold_value { *left } else { *right };
                    }
                }
            }
        }
        trace.trees.push(tt);
    }
    Ok(trace)
}

/// Evaluate the byte formulas for one protocol.
///
/// Constants mirror the documented wire layouts:
/// - Paillier ciphertexts are key_bits/4 bytes, the public key key_bits/8;
/// - sealed blobs cost 28 bytes over their plaintext (12 nonce + 16 tag);
/// - a route query is 8 bytes, its answer 1 byte.
pub fn expected_bytes(
    kind: ProtocolKind,
    trace: &RunTrace,
    thresholds_per_party: &[Vec<usize>],
    paillier_bits: u64,
    enclave_budget: Option<usize>,
) -> ExpectedBytes {
    let n_passive = (thresholds_per_party.len() - 1) as u64;
    let ct = paillier_bits / 4;
    let mut out = ExpectedBytes::default();
    if kind == ProtocolKind::Plaintext {
        return out;
    }

    out.setup = match kind {
        ProtocolKind::SecureBoost => n_passive * (paillier_bits / 8),
        _ => n_passive * 16,
    };

    for tree in &trace.trees {
        for node in &tree.nodes {
            let c = node.n_rows;
            match kind {
                ProtocolKind::SecureBoost => {
                    // node u32 + count u32 + ids 8c + G,H ciphertexts.
                    out.gradients += n_passive * (8 + 8 * c + 2 * ct * c);
                    // Per passive party: node u32 + n_features u32, then per
                    // feature k u32 + l u32 + 2l ciphertexts.
                    for thresholds in &thresholds_per_party[1..] {
                        out.splits += 8;
                        for &l in thresholds {
                            out.splits += 8 + 2 * ct * l as u64;
                        }
                    }
                    if let Some((party, n_left)) = node.winner {
                        if party != ACTIVE_PARTY {
                            // winner notify (node, k, v) + partition result
                            // (node, record, count, ids).
                            out.decision += 12 + 12 + 8 * n_left;
                        }
                    }
                }
                ProtocolKind::NTee => {
                    // Sealed plaintext: count u32 + g 8c + h 8c, chunked by
                    // the enclave budget; message: node u32 + count u32 +
                    // ids 8c + n_blobs u32 + per blob len u32 + sealed bytes.
                    let plain = 4 + 16 * c;
                    let chunks = match enclave_budget {
                        Some(b) => plain.div_ceil(b as u64).max(1),
                        None => 1,
                    };
                    out.gradients += n_passive * (12 + 8 * c + chunks * (4 + 28) + plain);
                    // One sealed 8-byte score per party: node u32 + 12 + 8 + 16.
                    out.splits += n_passive * 40;
                    if let Some((party, n_left)) = node.winner {
                        if party != ACTIVE_PARTY {
                            // winner announce (node only) + partition result.
                            out.decision += 4 + 12 + 8 * n_left;
                        }
                    }
                }
                ProtocolKind::OneTee => {
                    // node u32 + count u32 + ids 8c + masked g 8c + h 8c.
                    out.gradients += n_passive * (8 + 24 * c);
                    // Per passive party, sealed: n_features u32, then per
                    // feature k u32 + l u32 + per bucket (g8 + h8 + cnt u32)
                    // + 8 bytes per member id (each row lands in exactly one
                    // bucket per feature); message adds node u32 + 28.
                    for thresholds in &thresholds_per_party[1..] {
                        out.splits += 4 + 28 + 4;
                        for &l in thresholds {
                            out.splits += 8 + 20 * l as u64 + 8 * c;
                        }
                    }
                    if let Some((party, n_left)) = node.winner {
                        if party != ACTIVE_PARTY {
                            out.decision += 12 + 12 + 8 * n_left;
                        }
                    }
                }
                ProtocolKind::Plaintext => unreachable!(),
            }
        }
        out.inference += 9 * tree.oob_passive_edges;
    }
    out
}

/// Convenience: phase-keyed map for reports.
pub fn as_phase_map(e: &ExpectedBytes) -> BTreeMap<String, u64> {
    BTreeMap::from([
        ("setup".into(), e.setup),
        ("gradients".into(), e.gradients),
        ("splits".into(), e.splits),
        ("decision".into(), e.decision),
        ("inference".into(), e.inference),
    ])
}
