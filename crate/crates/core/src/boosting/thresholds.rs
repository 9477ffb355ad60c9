//! Per-feature threshold sets and bucket aggregation.
//!
//! Buckets follow the rule `s_{k,v} >= x > s_{k,v-1}` with an implicit lower
//! sentinel of minus infinity, so the last threshold always equals the column
//! maximum and every sample lands in exactly one bucket.

use crate::crypto::Fx;
use crate::error::{Error, Result};

/// Sorted, strictly increasing thresholds for one feature.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureThresholds {
    values: Vec<f64>,
}

/// All threshold sets owned by one party, indexed by local feature id.
pub type PartyThresholds = Vec<FeatureThresholds>;

impl FeatureThresholds {
    /// Build thresholds for a column. `bins == 0` selects per-value
    /// thresholds, otherwise nearest-rank quantiles at j/bins with
    /// duplicates collapsed. A constant column collapses to a single
    /// threshold, which makes the feature unsplittable but is not an error.
    pub fn build(column: &[f64], bins: usize) -> Result<FeatureThresholds> {
        if bins == 0 {
            Self::per_value(column)
        } else {
            Self::quantiles(column, bins)
        }
    }

    /// Nearest-rank quantile thresholds at ranks ceil(n*j/l), j = 1..l.
    pub fn quantiles(column: &[f64], bins: usize) -> Result<FeatureThresholds> {
        if bins < 2 {
            return Err(Error::Usage("quantile binning needs at least 2 bins".into()));
        }
        if column.is_empty() {
            return Err(Error::Usage("cannot build thresholds on an empty column".into()));
        }
        let mut sorted = column.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let n = sorted.len();
        let mut values = Vec::with_capacity(bins);
        for j in 1..=bins {
            let rank = (n * j).div_ceil(bins); // in 1..=n
            let v = sorted[rank - 1];
            if values.last().is_none_or(|&last| v > last) {
                values.push(v);
            }
        }
        Ok(FeatureThresholds { values })
    }

    /// One threshold per distinct value.
    pub fn per_value(column: &[f64]) -> Result<FeatureThresholds> {
        if column.is_empty() {
            return Err(Error::Usage("cannot build thresholds on an empty column".into()));
        }
        let mut values = column.to_vec();
        values.sort_by(|a, b| a.total_cmp(b));
        values.dedup();
        Ok(FeatureThresholds { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The unique bucket index v with `s_v >= x > s_{v-1}`.
    pub fn bucket_of(&self, x: f64) -> Result<usize> {
        let last = *self.values.last().expect("thresholds are never empty");
        if x > last {
            return Err(Error::AboveLastThreshold { value: x, last });
        }
        Ok(self.values.partition_point(|&s| s < x))
    }
}

/// Per-bucket fixed-point gradient sums and member rows.
#[derive(Debug, Clone)]
pub struct BucketStats {
    /// (sum of g, sum of h) per bucket, exact ring arithmetic.
    pub sums: Vec<(Fx, Fx)>,
    /// Member rows per bucket, each ascending.
    pub members: Vec<Vec<u32>>,
}

impl BucketStats {
    pub fn totals(&self) -> (Fx, Fx) {
        let g = self.sums.iter().map(|s| s.0).sum();
        let h = self.sums.iter().map(|s| s.1).sum();
        (g, h)
    }
}

/// Partition `rows` (ascending) into buckets of `thresholds` by `column`.
pub fn bucket_members(
    rows: &[u32],
    column: &[f64],
    thresholds: &FeatureThresholds,
) -> Result<Vec<Vec<u32>>> {
    let mut members = vec![Vec::new(); thresholds.len()];
    for &row in rows {
        let v = thresholds.bucket_of(column[row as usize])?;
        members[v].push(row);
    }
    Ok(members)
}

/// Aggregate fixed-point gradient sums per bucket, accumulating in ascending
/// row order so every protocol reproduces identical ring values.
pub fn bucket_aggregate(
    rows: &[u32],
    column: &[f64],
    thresholds: &FeatureThresholds,
    g: &[Fx],
    h: &[Fx],
) -> Result<BucketStats> {
    let members = bucket_members(rows, column, thresholds)?;
    let sums = members
        .iter()
        .map(|rows| {
            let mut gs = Fx::ZERO;
            let mut hs = Fx::ZERO;
            for &row in rows {
                gs += g[row as usize];
                hs += h[row as usize];
            }
            (gs, hs)
        })
        .collect();
    Ok(BucketStats { sums, members })
}
