//! Regression trees and the boosted model.
//!
//! Trained trees reference splits by `(owner party, record id)`; the owning
//! party privately stores the feature and threshold behind the record. The
//! resolved form joins both views and exists for local testing and model
//! comparison.

use serde::{Deserialize, Serialize};

use crate::boosting::dataset::PartyId;

pub type NodeId = usize;
pub type RecordId = u32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Internal {
        owner: PartyId,
        record: RecordId,
        left: NodeId,
        right: NodeId,
    },
    Leaf {
        weight: f64,
    },
}

/// One regression tree; the root is node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<TreeNode>,
}

impl RegressionTree {
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], at: NodeId) -> usize {
            match nodes[at] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Internal { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, TreeNode::Leaf { .. })).count()
    }
}

/// The federated model: tree skeletons plus scalar metadata. Leaf weights
/// already carry the learning rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedModel {
    pub trees: Vec<RegressionTree>,
    pub base_score: f64,
    pub learning_rate: f64,
}

/// A split with its private parameters joined in: testing-only view.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvedSplit {
    pub party: PartyId,
    pub feature: usize,
    pub threshold_index: usize,
    pub threshold_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ResolvedNode {
    Internal {
        split: ResolvedSplit,
        left: NodeId,
        right: NodeId,
    },
    Leaf {
        weight: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedTree {
    pub nodes: Vec<ResolvedNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedModel {
    pub trees: Vec<ResolvedTree>,
    pub base_score: f64,
}

impl ResolvedModel {
    /// Traverse with full knowledge of every party's thresholds.
    /// `sample[p][k]` is party p's feature k for the sample.
    pub fn predict(&self, sample: &[&[f64]]) -> f64 {
        let mut logit = self.base_score;
        for tree in &self.trees {
            let mut at = 0usize;
            loop {
                match &tree.nodes[at] {
                    ResolvedNode::Leaf { weight } => {
                        logit += weight;
                        break;
                    }
                    ResolvedNode::Internal { split, left, right } => {
                        let x = sample[split.party][split.feature];
                        at = if x <= split.threshold_value { *left } else { *right };
                    }
                }
            }
        }
        logit
    }

    /// Canonical byte form of the split sequence and leaf weights, used for
    /// model identity checks.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&self.base_score.to_bits().to_le_bytes());
        out.extend_from_slice(&(self.trees.len() as u32).to_le_bytes());
        for tree in &self.trees {
            out.extend_from_slice(&(tree.nodes.len() as u32).to_le_bytes());
            for node in &tree.nodes {
                match node {
                    ResolvedNode::Internal { split, left, right } => {
                        out.push(0);
                        out.extend_from_slice(&(split.party as u32).to_le_bytes());
                        out.extend_from_slice(&(split.feature as u32).to_le_bytes());
                        out.extend_from_slice(&(split.threshold_index as u32).to_le_bytes());
                        out.extend_from_slice(&split.threshold_value.to_bits().to_le_bytes());
                        out.extend_from_slice(&(*left as u32).to_le_bytes());
                        out.extend_from_slice(&(*right as u32).to_le_bytes());
                    }
                    ResolvedNode::Leaf { weight } => {
                        out.push(1);
                        out.extend_from_slice(&weight.to_bits().to_le_bytes());
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_zero_model_sums_leaves() {
        let model = ResolvedModel {
            trees: vec![
                ResolvedTree { nodes: vec![ResolvedNode::Leaf { weight: 0.25 }] },
                ResolvedTree { nodes: vec![ResolvedNode::Leaf { weight: -0.1 }] },
            ],
            base_score: 0.5,
        };
        assert_eq!(model.predict(&[&[]]), 0.5 + 0.25 - 0.1);
    }

    #[test]
    fn traversal_follows_threshold_rule() {
        let model = ResolvedModel {
            trees: vec![ResolvedTree {
                nodes: vec![
                    ResolvedNode::Internal {
                        split: ResolvedSplit {
                            party: 0,
                            feature: 0,
                            threshold_index: 0,
                            threshold_value: 10.0,
                        },
                        left: 1,
                        right: 2,
                    },
                    ResolvedNode::Leaf { weight: -1.0 },
                    ResolvedNode::Leaf { weight: 1.0 },
                ],
            }],
            base_score: 0.0,
        };
        assert_eq!(model.predict(&[&[10.0]]), -1.0); // boundary goes left
        assert_eq!(model.predict(&[&[10.5]]), 1.0);
    }

    #[test]
    fn canonical_bytes_distinguish_models() {
        let leaf = |w| ResolvedTree { nodes: vec![ResolvedNode::Leaf { weight: w }] };
        let a = ResolvedModel { trees: vec![leaf(0.1)], base_score: 0.0 };
        let b = ResolvedModel { trees: vec![leaf(0.2)], base_score: 0.0 };
        assert_ne!(a.canonical_bytes(), b.canonical_bytes());
        assert_eq!(a.canonical_bytes(), a.canonical_bytes());
    }
}
