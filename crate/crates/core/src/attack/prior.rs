//! Prior knowledge models and value guessing.
//!
//! Two priors from the evaluation setting: min-max only, and an approximate
//! distribution as a 10-bin histogram (bin width 10% of the value range).
//! Guessing either draws randomly from the prior or assigns values by the
//! inferred ranks.

use rand::Rng;

use crate::error::{Error, Result};
use crate::seeding;

use super::order::PartialOrder;

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// bins + 1 edges, equal width over the observed range.
    pub edges: Vec<f64>,
    /// Probability mass per bin, sums to 1.
    pub probs: Vec<f64>,
}

impl Histogram {
    /// Build from a disjoint reference sample with equal-width bins.
    pub fn from_sample(values: &[f64], bins: usize) -> Result<Histogram> {
        if values.is_empty() || bins == 0 {
            return Err(Error::Usage("histogram needs values and at least one bin".into()));
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(lo < hi) {
            // Point mass: a single degenerate bin.
            return Ok(Histogram { edges: vec![lo, lo], probs: vec![1.0] });
        }
        let width = (hi - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|j| lo + j as f64 * width).collect();
        let mut counts = vec![0usize; bins];
        for &v in values {
            let mut bin = ((v - lo) / width) as usize;
            if bin >= bins {
                bin = bins - 1;
            }
            counts[bin] += 1;
        }
        let n = values.len() as f64;
        let probs = counts.iter().map(|&c| c as f64 / n).collect();
        Ok(Histogram { edges, probs })
    }

    pub fn lo(&self) -> f64 {
        self.edges[0]
    }

    pub fn hi(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    /// Quantile with linear interpolation inside bins.
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let mut cum = 0.0;
        for (j, &prob) in self.probs.iter().enumerate() {
            if prob <= 0.0 {
                continue;
            }
            if p <= cum + prob {
                let within = (p - cum) / prob;
                return self.edges[j] + within * (self.edges[j + 1] - self.edges[j]);
            }
            cum += prob;
        }
        self.hi()
    }

    /// One random draw: bin by mass, uniform inside the bin.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        let mut cum = 0.0;
        for (j, &prob) in self.probs.iter().enumerate() {
            cum += prob;
            if u <= cum && prob > 0.0 {
                return rng.gen_range(self.edges[j]..=self.edges[j + 1]);
            }
        }
        self.hi()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PriorKnowledge {
    MinMax { lo: f64, hi: f64 },
    ApproxDistribution(Histogram),
}

impl PriorKnowledge {
    /// The standard approximate prior: 10 bins over the reference sample.
    pub fn approx_from_sample(values: &[f64]) -> Result<PriorKnowledge> {
        Ok(PriorKnowledge::ApproxDistribution(Histogram::from_sample(values, 10)?))
    }

    fn value_at(&self, p: f64) -> f64 {
        match self {
            PriorKnowledge::MinMax { lo, hi } => lo + p * (hi - lo),
            PriorKnowledge::ApproxDistribution(h) => h.quantile(p),
        }
    }
}

/// Assign a guessed value to every row of the inferred order: flatten the
/// groups to ranks (a group's members share its mean rank), then map rank
/// r to the prior's value at quantile r / (n - 1). Rows without order
/// information get the median.
pub fn assign_values(order: &PartialOrder, prior: &PriorKnowledge) -> Vec<(u32, f64)> {
    let n = order.covered();
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    let ranked: usize = order.groups.iter().map(Vec::len).sum();
    // A lone sample carries no rank: min-max answers the low end, the
    // histogram answers its median.
    let single = match prior {
        PriorKnowledge::MinMax { .. } => 0.0,
        PriorKnowledge::ApproxDistribution(_) => 0.5,
    };
    let denom = (ranked.max(2) - 1) as f64;
    let mut next_rank = 0usize;
    for group in &order.groups {
        let mean_rank = next_rank as f64 + (group.len() as f64 - 1.0) / 2.0;
        let p = if ranked <= 1 { single } else { mean_rank / denom };
        for &row in group {
            out.push((row, prior.value_at(p)));
        }
        next_rank += group.len();
    }
    for &row in &order.unmatched {
        out.push((row, prior.value_at(0.5)));
    }
    out
}

/// Random guessing under the same prior, i.i.d. per sample.
pub fn random_baseline(n: usize, prior: &PriorKnowledge, seed: u64) -> Vec<f64> {
    let mut rng = seeding::rng(seed, "random-baseline", 0);
    (0..n)
        .map(|_| match prior {
            PriorKnowledge::MinMax { lo, hi } => rng.gen_range(*lo..=*hi),
            PriorKnowledge::ApproxDistribution(h) => h.sample(&mut rng),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn singleton_order(rows: &[u32]) -> PartialOrder {
        PartialOrder {
            groups: rows.iter().map(|&r| vec![r]).collect(),
            unmatched: vec![],
        }
    }

    #[test]
    fn minmax_rank_interpolation() {
        // Order x3 < x1 < x2 over [15, 30] guesses {15, 22.5, 30}.
        let order = singleton_order(&[2, 0, 1]);
        let guesses = assign_values(&order, &PriorKnowledge::MinMax { lo: 15.0, hi: 30.0 });
        assert_eq!(guesses, vec![(2, 15.0), (0, 22.5), (1, 30.0)]);
    }

    #[test]
    fn uniform_histogram_reproduces_minmax() {
        let hist = Histogram {
            edges: (0..=10).map(|j| 15.0 + j as f64 * 1.5).collect(),
            probs: vec![0.1; 10],
        };
        let order = singleton_order(&[0, 1, 2, 3, 4]);
        let via_hist = assign_values(&order, &PriorKnowledge::ApproxDistribution(hist));
        let via_minmax = assign_values(&order, &PriorKnowledge::MinMax { lo: 15.0, hi: 30.0 });
        for (a, b) in via_hist.iter().zip(&via_minmax) {
            assert!((a.1 - b.1).abs() < 1e-9, "{} vs {}", a.1, b.1);
        }
    }

    #[test]
    fn point_mass_prior_guesses_that_value() {
        let hist = Histogram::from_sample(&[4.0, 4.0, 4.0], 10).unwrap();
        let order = singleton_order(&[0, 1]);
        let guesses = assign_values(&order, &PriorKnowledge::ApproxDistribution(hist));
        assert!(guesses.iter().all(|&(_, v)| v == 4.0));
    }

    #[test]
    fn single_sample_gets_the_low_end() {
        let order = singleton_order(&[0]);
        let guesses = assign_values(&order, &PriorKnowledge::MinMax { lo: 7.0, hi: 9.0 });
        assert_eq!(guesses, vec![(0, 7.0)]);
    }

    #[test]
    fn tied_group_shares_mean_rank() {
        let order = PartialOrder { groups: vec![vec![0, 1], vec![2]], unmatched: vec![] };
        let guesses = assign_values(&order, &PriorKnowledge::MinMax { lo: 0.0, hi: 2.0 });
        // Ranks: {0,1} share 0.5, {2} has 2; quantiles 0.25 and 1.
        assert_eq!(guesses, vec![(0, 0.5), (1, 0.5), (2, 2.0)]);
    }

    #[test]
    fn minmax_draws_stay_in_range_and_reproduce() {
        let prior = PriorKnowledge::MinMax { lo: 21.0, hi: 109.0 };
        let a = random_baseline(1000, &prior, 5);
        let b = random_baseline(1000, &prior, 5);
        assert_eq!(a, b);
        assert!(a.iter().all(|&v| (21.0..=109.0).contains(&v)));
    }

    #[test]
    fn histogram_draws_converge_to_the_prior() {
        // Chi-square goodness of fit at n = 1e5 over 10 bins: statistic well
        // under the 0.001 critical value (27.9 at 9 degrees of freedom).
        let values: Vec<f64> = (0..1000).map(|i| (i % 100) as f64).collect();
        let hist = Histogram::from_sample(&values, 10).unwrap();
        let prior = PriorKnowledge::ApproxDistribution(hist.clone());
        let draws = random_baseline(100_000, &prior, 11);
        let mut counts = vec![0usize; 10];
        for v in draws {
            let mut bin = ((v - hist.lo()) / (hist.hi() - hist.lo()) * 10.0) as usize;
            if bin >= 10 {
                bin = 9;
            }
            counts[bin] += 1;
        }
        let n = 100_000f64;
        let chi2: f64 = counts
            .iter()
            .zip(&hist.probs)
            .map(|(&c, &p)| {
                let expect = n * p;
                (c as f64 - expect).powi(2) / expect
            })
            .sum();
        assert!(chi2 < 27.9, "chi-square {chi2} too large");
    }

    #[test]
    fn quantile_walks_cumulative_mass() {
        let hist = Histogram { edges: vec![0.0, 1.0, 2.0], probs: vec![0.25, 0.75] };
        assert_eq!(hist.quantile(0.0), 0.0);
        assert_eq!(hist.quantile(0.25), 1.0);
        assert!((hist.quantile(0.625) - 1.5).abs() < 1e-12);
        assert_eq!(hist.quantile(1.0), 2.0);
    }
}
