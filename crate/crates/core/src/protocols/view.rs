//! The adversary view: everything the honest-but-curious active party
//! decrypts while running the SecureBoost split finding. TEE-backed runs
//! leave it empty, which is the attack's negative control.

use serde::{Deserialize, Serialize};

use crate::crypto::Fx;

/// Decrypted per-bucket gradient sums for one (party, feature).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewFeature {
    pub party: usize,
    pub feature: usize,
    /// (sum g, sum h) per bucket, ascending bucket index.
    pub buckets: Vec<(Fx, Fx)>,
}

/// One split-finding round's leakage at one tree node, together with the
/// active party's own knowledge of the gradients it encrypted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewNode {
    pub round: u32,
    pub node: u32,
    /// Row positions of the node's instance set, ascending.
    pub rows: Vec<u32>,
    /// Opaque sample ids aligned with `rows`.
    pub ids: Vec<u64>,
    /// Fixed-point (g, h) per row, aligned with `rows`.
    pub gradients: Vec<(Fx, Fx)>,
    pub features: Vec<ViewFeature>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversaryView {
    pub nodes: Vec<ViewNode>,
}

impl AdversaryView {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The root-node view of the last recorded round: the richest single
    /// leak, covering the round's whole instance set.
    pub fn latest_root(&self) -> Option<&ViewNode> {
        self.nodes.iter().filter(|n| n.node == 0).next_back()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn latest_root_picks_last_round() {
        let mk = |round, node| ViewNode {
            round,
            node,
            rows: vec![],
            ids: vec![],
            gradients: vec![],
            features: vec![],
        };
        let view = AdversaryView { nodes: vec![mk(0, 0), mk(0, 1), mk(1, 0)] };
        assert_eq!(view.latest_root().unwrap().round, 1);
    }
}
