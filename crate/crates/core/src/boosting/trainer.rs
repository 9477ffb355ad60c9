//! The boosting loop: seeded subsampling, breadth-first tree growth through
//! a split-finding protocol, and logit updates.

use std::time::Instant;

use rand::seq::SliceRandom;

use crate::boosting::dataset::Hyperparams;
use crate::boosting::gradients::{compute_gradients, FxGradients};
use crate::boosting::split::leaf_weight;
use crate::boosting::tree::{
    BoostedModel, RegressionTree, ResolvedModel, ResolvedNode, ResolvedSplit, ResolvedTree,
    TreeNode,
};
use crate::error::{Error, Result};
use crate::federation::predict::route_to_leaf;
use crate::federation::topology::{ProtocolKind, Simulation};
use crate::protocols::timing::{PhaseTimer, TimePhase};
use crate::protocols::{LevelNode, RoundCtx, SplitProtocol};
use crate::seeding;

pub struct TrainOutput {
    pub model: BoostedModel,
    /// Testing-only joined view of the model with every party's thresholds.
    pub resolved: ResolvedModel,
    pub final_logits: Vec<f64>,
    pub timer: PhaseTimer,
}

/// Fixed-fraction subsample for one round: seeded shuffle, truncate, sort.
pub fn subsample_rows(n: usize, fraction: f64, seed: u64, round: usize) -> Vec<u32> {
    let mut rows: Vec<u32> = (0..n as u32).collect();
    if fraction >= 1.0 {
        return rows;
    }
    let mut rng = seeding::rng(seed, "subsample", round as u64);
    rows.shuffle(&mut rng);
    let keep = ((n as f64 * fraction) as usize).max(1);
    rows.truncate(keep);
    rows.sort_unstable();
    rows
}

struct Pending {
    node: usize,
    rows: Vec<u32>,
}

/// Ascending set difference of two ascending row lists.
fn rows_minus(all: &[u32], remove: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(all.len() - remove.len().min(all.len()));
    let mut it = remove.iter().peekable();
    for &row in all {
        match it.peek() {
            Some(&&r) if r == row => {
                it.next();
            }
            _ => out.push(row),
        }
    }
    out
}

/// Train a boosted model with the given split-finding protocol. The model,
/// split sequence, and leaf weights are a deterministic function of
/// (dataset, params) and do not depend on which protocol runs them.
pub fn train(
    sim: &mut Simulation,
    params: &Hyperparams,
    strategy: &mut dyn SplitProtocol,
) -> Result<TrainOutput> {
    params.validate()?;
    if strategy.kind() != sim.mode {
        return Err(Error::Config(format!(
            "strategy {} does not match topology mode {}",
            strategy.kind().name(),
            sim.mode.name()
        )));
    }
    let n = sim.dataset.n_samples();
    let labels = sim.dataset.labels().to_vec();
    let mut logits = vec![0.0f64; n]; // base score: zero logit
    let mut timer = PhaseTimer::new();
    let mut trees = Vec::with_capacity(params.n_trees);
    let mut resolved_trees = Vec::with_capacity(params.n_trees);

    for round in 0..params.n_trees {
        let rows = subsample_rows(n, params.subsample, params.seed, round);

        let t0 = Instant::now();
        let pairs = compute_gradients(&logits, &labels)?;
        let grads = FxGradients::encode(&pairs)?;
        timer.add(TimePhase::GradientEncrypt, t0.elapsed());

        let ctx = RoundCtx { round, params, grads: &grads };
        strategy.begin_round(sim, &ctx, &rows, &mut timer)?;

        let mut nodes: Vec<Option<TreeNode>> = vec![None];
        let mut leaf_rows: Vec<(usize, Vec<u32>)> = Vec::new();
        let mut frontier = vec![Pending { node: 0, rows }];

        for _depth in 0..params.max_depth {
            let (splittable, leaves): (Vec<Pending>, Vec<Pending>) =
                frontier.into_iter().partition(|p| p.rows.len() >= 2);
            for leaf in leaves {
                leaf_rows.push((leaf.node, leaf.rows));
            }
            if splittable.is_empty() {
                frontier = Vec::new();
                break;
            }
            let level_nodes: Vec<LevelNode> = splittable
                .iter()
                .map(|p| LevelNode { node: p.node, rows: p.rows.clone() })
                .collect();
            strategy.begin_level(sim, &ctx, &level_nodes, &mut timer)?;

            let mut next = Vec::new();
            for pending in splittable {
                let level_node = LevelNode { node: pending.node, rows: pending.rows.clone() };
                match strategy.find_split(sim, &ctx, &level_node, &mut timer)? {
                    Some(decision) => {
                        let left_id = nodes.len();
                        nodes.push(None);
                        let right_id = nodes.len();
                        nodes.push(None);
                        let right_rows = rows_minus(&pending.rows, &decision.left_rows);
                        nodes[pending.node] = Some(TreeNode::Internal {
                            owner: decision.party,
                            record: decision.record,
                            left: left_id,
                            right: right_id,
                        });
                        next.push(Pending { node: left_id, rows: decision.left_rows });
                        next.push(Pending { node: right_id, rows: right_rows });
                    }
                    None => leaf_rows.push((pending.node, pending.rows)),
                }
            }
            frontier = next;
        }
        for pending in frontier {
            leaf_rows.push((pending.node, pending.rows));
        }

        // Leaf weights from exact fixed-point node totals.
        let t0 = Instant::now();
        let mut assignment: Vec<Option<f64>> = vec![None; n];
        for (node, rows) in &leaf_rows {
            let (gs, hs) = grads.node_totals(rows);
            let w = leaf_weight(gs.decode(), hs.decode(), params.lambda, params.learning_rate)?;
            nodes[*node] = Some(TreeNode::Leaf { weight: w });
            for &row in rows {
                assignment[row as usize] = Some(w);
            }
        }
        let tree = RegressionTree {
            nodes: nodes
                .into_iter()
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::Protocol("tree construction left an open node".into()))?,
        };

        // Update logits: subsampled rows use their recorded leaf; the rest
        // are routed through the owning parties.
        let use_messages = sim.mode != ProtocolKind::Plaintext;
        for row in 0..n as u32 {
            let w = match assignment[row as usize] {
                Some(w) => w,
                None => route_to_leaf(sim, &tree, row, round as u32, use_messages)?,
            };
            logits[row as usize] += w;
        }
        timer.add(TimePhase::Partition, t0.elapsed());

        resolved_trees.push(resolve_tree(sim, &tree)?);
        trees.push(tree);
    }

    Ok(TrainOutput {
        model: BoostedModel {
            trees,
            base_score: 0.0,
            learning_rate: params.learning_rate,
        },
        resolved: ResolvedModel { trees: resolved_trees, base_score: 0.0 },
        final_logits: logits,
        timer,
    })
}

/// Join a tree with the owning parties' record tables (testing only).
pub fn resolve_tree(sim: &Simulation, tree: &RegressionTree) -> Result<ResolvedTree> {
    let nodes = tree
        .nodes
        .iter()
        .map(|node| {
            Ok(match *node {
                TreeNode::Leaf { weight } => ResolvedNode::Leaf { weight },
                TreeNode::Internal { owner, record, left, right } => {
                    let rec = sim.parties[owner].records.get(record)?;
                    ResolvedNode::Internal {
                        split: ResolvedSplit {
                            party: owner,
                            feature: rec.feature,
                            threshold_index: rec.threshold_index,
                            threshold_value: rec.threshold_value,
                        },
                        left,
                        right,
                    }
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResolvedTree { nodes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsample_is_seeded_and_sorted() {
        let a = subsample_rows(100, 0.8, 7, 0);
        let b = subsample_rows(100, 0.8, 7, 0);
        let c = subsample_rows(100, 0.8, 7, 1);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 80);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn full_fraction_keeps_everything() {
        assert_eq!(subsample_rows(5, 1.0, 0, 3), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn tiny_sets_keep_at_least_one() {
        assert_eq!(subsample_rows(1, 0.5, 0, 0).len(), 1);
    }

    #[test]
    fn rows_minus_subtracts_sorted_lists() {
        assert_eq!(rows_minus(&[1, 2, 3, 5, 8], &[2, 5]), vec![1, 3, 8]);
        assert_eq!(rows_minus(&[1, 2], &[]), vec![1, 2]);
        assert_eq!(rows_minus(&[1, 2], &[1, 2]), Vec::<u32>::new());
    }
}
