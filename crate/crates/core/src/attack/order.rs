//! Partial-order reconstruction from the adversary view.
//!
//! For each (party, feature) the buckets are processed in ascending index
//! order; each bucket's decrypted sums are matched against the remaining
//! candidates and the matched samples removed. The resulting groups are
//! ordered by bucket index: samples in earlier groups have smaller feature
//! values, samples within a group are mutually unordered. Buckets whose
//! match exceeds the search budget leave their samples in an `unmatched`
//! pool, the coarsest group: no order information at all.

use crate::error::{Error, Result};
use crate::protocols::view::ViewNode;

use super::matcher::{match_bucket, MatchResult, DEFAULT_MATCH_BUDGET};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialOrder {
    /// Ordered groups of rows, ascending bucket index; empty buckets are
    /// dropped. Disjoint, and together with `unmatched` they cover the
    /// node's instance set.
    pub groups: Vec<Vec<u32>>,
    /// Rows whose bucket could not be matched within budget.
    pub unmatched: Vec<u32>,
}

impl PartialOrder {
    pub fn covered(&self) -> usize {
        self.groups.iter().map(Vec::len).sum::<usize>() + self.unmatched.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureOrder {
    pub party: usize,
    pub feature: usize,
    pub order: PartialOrder,
}

/// Reconstruct per-feature partial orders from one view node.
pub fn infer_partial_order(view: &ViewNode) -> Result<Vec<FeatureOrder>> {
    infer_partial_order_budgeted(view, DEFAULT_MATCH_BUDGET)
}

pub fn infer_partial_order_budgeted(view: &ViewNode, budget: u64) -> Result<Vec<FeatureOrder>> {
    if view.features.is_empty() {
        return Err(Error::NothingToAttack);
    }
    let mut out = Vec::with_capacity(view.features.len());
    for feature in &view.features {
        // Candidate pool: (row, g, h), ascending row id, shrinking as
        // buckets are matched.
        let mut pool: Vec<(u32, crate::crypto::Fx, crate::crypto::Fx)> = view
            .rows
            .iter()
            .zip(&view.gradients)
            .map(|(&row, &(g, h))| (row, g, h))
            .collect();
        let mut groups = Vec::new();
        for &target in &feature.buckets {
            match match_bucket(target, &pool, budget) {
                MatchResult::Matched(positions) => {
                    if positions.is_empty() {
                        continue;
                    }
                    let mut group = Vec::with_capacity(positions.len());
                    // Remove back to front so positions stay valid.
                    for &pos in positions.iter().rev() {
                        group.push(pool.remove(pos).0);
                    }
                    group.reverse();
                    groups.push(group);
                }
                MatchResult::Unmatched => {}
            }
        }
        // Whatever matching never consumed (unmatched buckets, or rows
        // displaced by an ambiguous subset) carries no order information.
        let unmatched = pool.iter().map(|&(row, _, _)| row).collect();
        out.push(FeatureOrder {
            party: feature.party,
            feature: feature.feature,
            order: PartialOrder { groups, unmatched },
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::Fx;
    use crate::protocols::view::ViewFeature;

    fn fx(v: f64) -> Fx {
        Fx::encode(v).unwrap()
    }

    fn view_of(rows: Vec<u32>, grads: Vec<(f64, f64)>, buckets: Vec<(f64, f64)>) -> ViewNode {
        ViewNode {
            round: 0,
            node: 0,
            ids: rows.iter().map(|&r| r as u64).collect(),
            rows,
            gradients: grads.into_iter().map(|(g, h)| (fx(g), fx(h))).collect(),
            features: vec![ViewFeature {
                party: 1,
                feature: 0,
                buckets: buckets.into_iter().map(|(g, h)| (fx(g), fx(h))).collect(),
            }],
        }
    }

    #[test]
    fn worked_example_recovers_x3_x1_x2() {
        // Feature values {x1=20, x2=30, x3=15}, gradients {-1, 0.6, 0.2}:
        // value-ordered buckets are x3, x1, x2.
        let view = view_of(
            vec![0, 1, 2], // x1, x2, x3
            vec![(-1.0, 0.1), (0.6, 0.2), (0.2, 0.15)],
            vec![(0.2, 0.15), (-1.0, 0.1), (0.6, 0.2)],
        );
        let orders = infer_partial_order(&view).unwrap();
        assert_eq!(orders[0].order.groups, vec![vec![2], vec![0], vec![1]]);
        assert!(orders[0].order.unmatched.is_empty());
    }

    #[test]
    fn single_bucket_learns_nothing() {
        let view = view_of(
            vec![0, 1],
            vec![(0.5, 0.25), (-0.5, 0.25)],
            vec![(0.0, 0.5)], // everything in one bucket
        );
        let orders = infer_partial_order(&view).unwrap();
        assert_eq!(orders[0].order.groups, vec![vec![0, 1]]);
    }

    #[test]
    fn empty_view_is_nothing_to_attack() {
        let view = ViewNode {
            round: 0,
            node: 0,
            rows: vec![],
            ids: vec![],
            gradients: vec![],
            features: vec![],
        };
        assert!(matches!(infer_partial_order(&view), Err(Error::NothingToAttack)));
    }

    #[test]
    fn distinct_gradients_recover_the_exact_sort_order() {
        // 100 crafted, matching-unambiguous gradients: h_i = (1000 + i) * 2^-20
        // so no multi-element subset can imitate a singleton. Buckets are the
        // true value order; the inferred groups must equal it.
        let n = 100u32;
        let perm: Vec<u32> = (0..n).map(|i| (i * 37) % n).collect(); // value rank per row
        let mut by_rank = vec![0u32; n as usize];
        for (row, &rank) in perm.iter().enumerate() {
            by_rank[rank as usize] = row as u32;
        }
        let grads: Vec<(Fx, Fx)> = (0..n)
            .map(|row| (Fx(((row as i64 - 50) * 3000) as u64), Fx(1000 + row as u64)))
            .collect();
        let buckets: Vec<(Fx, Fx)> = by_rank.iter().map(|&row| grads[row as usize]).collect();
        let view = ViewNode {
            round: 0,
            node: 0,
            rows: (0..n).collect(),
            ids: (0..n as u64).collect(),
            gradients: grads,
            features: vec![ViewFeature { party: 1, feature: 0, buckets }],
        };
        let orders = infer_partial_order(&view).unwrap();
        let recovered: Vec<u32> = orders[0].order.groups.iter().flatten().copied().collect();
        assert_eq!(recovered, by_rank);
        assert!(orders[0].order.unmatched.is_empty());
    }
}
