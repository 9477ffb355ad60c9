//! Subset matching of decrypted bucket sums against known gradients.
//!
//! The active party knows every (g_i, h_i) it encrypted; a bucket's
//! decrypted (sum g, sum h) pair is matched by backtracking over the
//! remaining candidates. Search proceeds by subset size (singletons first,
//! then pairs, and so on), each size pass a depth-first scan in ascending-id
//! order with the first match returned. Sums are fixed-point exact, so
//! matching uses exact ring equality; hessians of the supported loss are
//! nonnegative, which gives the search a monotone bound.

use crate::crypto::Fx;

/// Search node budget per bucket; exceeding it degrades gracefully to an
/// unmatched marker instead of stalling on adversarial subset-sum instances.
pub const DEFAULT_MATCH_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatchResult {
    /// Candidate positions (indices into the pool) forming the bucket.
    Matched(Vec<usize>),
    /// Budget exhausted without an exact match.
    Unmatched,
}

/// Find a subset of `pool` whose ring sums equal `target`: smallest subset
/// first, lexicographically earliest (by ascending position) within a size.
/// The empty subset matches a zero target.
pub fn match_bucket(target: (Fx, Fx), pool: &[(u32, Fx, Fx)], budget: u64) -> MatchResult {
    if target == (Fx::ZERO, Fx::ZERO) {
        return MatchResult::Matched(Vec::new());
    }
    let h_target = target.1 .0;
    let min_h = pool.iter().map(|&(_, _, h)| h.0).min().unwrap_or(0);
    // With nonnegative hessians, a subset of size s needs s * min_h <= h_t.
    let max_size = if min_h == 0 {
        pool.len()
    } else {
        pool.len().min((h_target / min_h) as usize)
    };
    let mut visited = 0u64;
    let mut picked = Vec::new();
    for size in 1..=max_size {
        picked.clear();
        match dfs(target, h_target, pool, 0, (Fx::ZERO, Fx::ZERO), size, &mut picked, &mut visited, budget) {
            Dfs::Found => return MatchResult::Matched(picked),
            Dfs::OverBudget => return MatchResult::Unmatched,
            Dfs::Exhausted => {}
        }
    }
    MatchResult::Unmatched
}

enum Dfs {
    Found,
    Exhausted,
    OverBudget,
}

/// Depth-first over combinations of exactly `remaining` more elements,
/// positions ascending.
#[allow(clippy::too_many_arguments)]
fn dfs(
    target: (Fx, Fx),
    h_target: u64,
    pool: &[(u32, Fx, Fx)],
    start: usize,
    partial: (Fx, Fx),
    remaining: usize,
    picked: &mut Vec<usize>,
    visited: &mut u64,
    budget: u64,
) -> Dfs {
    let last = remaining == 1;
    // Not enough elements left to reach the requested size.
    if pool.len().saturating_sub(start) < remaining {
        return Dfs::Exhausted;
    }
    for pos in start..pool.len() {
        *visited += 1;
        if *visited > budget {
            return Dfs::OverBudget;
        }
        let (_, g, h) = pool[pos];
        // Nonnegative hessians: overshooting h can never be repaired.
        if partial.1 .0.wrapping_add(h.0) > h_target {
            continue;
        }
        let next = (partial.0 + g, partial.1 + h);
        if last {
            if next == target {
                picked.push(pos);
                return Dfs::Found;
            }
            continue;
        }
        picked.push(pos);
        match dfs(target, h_target, pool, pos + 1, next, remaining - 1, picked, visited, budget) {
            Dfs::Found => return Dfs::Found,
            Dfs::OverBudget => return Dfs::OverBudget,
            Dfs::Exhausted => {
                picked.pop();
            }
        }
    }
    Dfs::Exhausted
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fx(v: f64) -> Fx {
        Fx::encode(v).unwrap()
    }

    fn pool(vals: &[(u32, f64, f64)]) -> Vec<(u32, Fx, Fx)> {
        vals.iter().map(|&(id, g, h)| (id, fx(g), fx(h))).collect()
    }

    #[test]
    fn singleton_bucket_from_worked_example() {
        // g = {-1, 0.6, 0.2}: the 0.2 bucket matches sample x3 alone.
        let p = pool(&[(1, -1.0, 0.1), (2, 0.6, 0.2), (3, 0.2, 0.15)]);
        let m = match_bucket((fx(0.2), fx(0.15)), &p, DEFAULT_MATCH_BUDGET);
        assert_eq!(m, MatchResult::Matched(vec![2]));
    }

    #[test]
    fn pair_bucket_from_worked_example() {
        // After removing x3, the -0.4 sum is the other two samples.
        let p = pool(&[(1, -1.0, 0.1), (2, 0.6, 0.2)]);
        let target = (fx(-1.0) + fx(0.6), fx(0.1) + fx(0.2));
        assert!((target.0.decode() + 0.4).abs() < 1e-5);
        let m = match_bucket(target, &p, DEFAULT_MATCH_BUDGET);
        assert_eq!(m, MatchResult::Matched(vec![0, 1]));
    }

    #[test]
    fn zero_target_is_the_empty_subset() {
        let p = pool(&[(1, 0.5, 0.25)]);
        assert_eq!(
            match_bucket((Fx::ZERO, Fx::ZERO), &p, DEFAULT_MATCH_BUDGET),
            MatchResult::Matched(vec![])
        );
    }

    #[test]
    fn smaller_subsets_win_over_larger() {
        // Both {2} and {0, 1} sum to the target; the singleton is preferred.
        // Dyadic values keep the sums exact.
        let p = pool(&[(1, 0.125, 0.125), (2, 0.125, 0.125), (3, 0.25, 0.25)]);
        let target = (fx(0.25), fx(0.25));
        let m = match_bucket(target, &p, DEFAULT_MATCH_BUDGET);
        assert_eq!(m, MatchResult::Matched(vec![2]));
    }

    #[test]
    fn budget_exhaustion_reports_unmatched() {
        // No subset sums to the target; a tiny budget gives up quickly.
        let p = pool(&[(1, 0.1, 0.01), (2, 0.1, 0.01), (3, 0.1, 0.01)]);
        assert_eq!(match_bucket((fx(0.9), fx(0.5)), &p, 2), MatchResult::Unmatched);
    }

    #[test]
    fn impossible_target_exhausts_without_match() {
        let p = pool(&[(1, 0.25, 0.1), (2, -0.25, 0.1)]);
        assert_eq!(
            match_bucket((fx(0.5), fx(0.05)), &p, DEFAULT_MATCH_BUDGET),
            MatchResult::Unmatched
        );
    }

    #[test]
    fn negative_gradients_match_exactly_in_ring() {
        // Targets are ring sums of the encodings, exactly as a protocol run
        // would produce them.
        let p = pool(&[(1, -0.75, 0.1), (2, 0.25, 0.1)]);
        let target = (fx(-0.75) + fx(0.25), fx(0.1) + fx(0.1));
        let m = match_bucket(target, &p, DEFAULT_MATCH_BUDGET);
        assert_eq!(m, MatchResult::Matched(vec![0, 1]));
    }

    #[test]
    fn large_pool_of_ties_resolves_singletons_fast() {
        // 5000 candidates, two distinct (g, h) classes; every singleton
        // bucket must resolve well under budget.
        let p: Vec<(u32, Fx, Fx)> = (0..5000)
            .map(|i| {
                if i % 2 == 0 {
                    (i, fx(0.5), fx(0.25))
                } else {
                    (i, fx(-0.5), fx(0.25))
                }
            })
            .collect();
        let m = match_bucket((fx(-0.5), fx(0.25)), &p, DEFAULT_MATCH_BUDGET);
        assert_eq!(m, MatchResult::Matched(vec![1]));
    }
}
