//! Vertically partitioned dataset: aligned sample ids, per-party feature
//! columns, labels held by the active party only.

use std::collections::HashMap;

use crate::error::{Error, Result};

pub type PartyId = usize;

/// The active party is always party 0; it owns the labels and coordinates
/// every protocol round.
pub const ACTIVE_PARTY: PartyId = 0;

/// One party's share of the feature space, column-major.
#[derive(Debug, Clone, Default)]
pub struct PartyFeatures {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl PartyFeatures {
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> Self {
        PartyFeatures { names, columns }
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }
}

#[derive(Debug, Clone)]
pub struct VerticalDataset {
    sample_ids: Vec<u64>,
    parties: Vec<PartyFeatures>,
    labels: Vec<u8>,
    id_to_row: HashMap<u64, u32>,
}

impl VerticalDataset {
    /// Build a dataset, checking alignment: every party column has exactly
    /// one value per sample id, labels are binary and owned by the active
    /// party.
    pub fn new(sample_ids: Vec<u64>, parties: Vec<PartyFeatures>, labels: Vec<u8>) -> Result<Self> {
        let n = sample_ids.len();
        if n == 0 {
            return Err(Error::Usage("dataset has no samples".into()));
        }
        if parties.is_empty() {
            return Err(Error::Config("at least one party required".into()));
        }
        if labels.len() != n {
            return Err(Error::LengthMismatch { left: labels.len(), right: n });
        }
        if let Some(&bad) = labels.iter().find(|&&y| y > 1) {
            return Err(Error::Usage(format!("label {bad} is not binary")));
        }
        for (p, party) in parties.iter().enumerate() {
            if party.names.len() != party.columns.len() {
                return Err(Error::Config(format!("party {p}: names/columns mismatch")));
            }
            for (k, col) in party.columns.iter().enumerate() {
                if col.len() != n {
                    return Err(Error::LengthMismatch { left: col.len(), right: n });
                }
                if let Some(bad) = col.iter().find(|v| !v.is_finite()) {
                    return Err(Error::Usage(format!(
                        "party {p} feature {k} has non-finite value {bad}"
                    )));
                }
            }
        }
        let mut id_to_row = HashMap::with_capacity(n);
        for (row, &id) in sample_ids.iter().enumerate() {
            if id_to_row.insert(id, row as u32).is_some() {
                return Err(Error::Usage(format!("duplicate sample id {id}")));
            }
        }
        Ok(VerticalDataset {
            sample_ids,
            parties,
            labels,
            id_to_row,
        })
    }

    /// Convenience constructor with sample ids 0..n.
    pub fn from_columns(parties: Vec<PartyFeatures>, labels: Vec<u8>) -> Result<Self> {
        let n = labels.len();
        Self::new((0..n as u64).collect(), parties, labels)
    }

    pub fn n_samples(&self) -> usize {
        self.sample_ids.len()
    }

    pub fn n_parties(&self) -> usize {
        self.parties.len()
    }

    pub fn n_features_total(&self) -> usize {
        self.parties.iter().map(|p| p.n_features()).sum()
    }

    /// Labels, readable by active-party logic only.
    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn party(&self, p: PartyId) -> &PartyFeatures {
        &self.parties[p]
    }

    pub fn parties(&self) -> &[PartyFeatures] {
        &self.parties
    }

    pub fn sample_ids(&self) -> &[u64] {
        &self.sample_ids
    }

    pub fn id_of(&self, row: u32) -> u64 {
        self.sample_ids[row as usize]
    }

    pub fn row_of(&self, id: u64) -> Result<u32> {
        self.id_to_row.get(&id).copied().ok_or(Error::UnknownSample(id))
    }
}

/// Training hyperparameters. Defaults follow the benchmark configuration:
/// depth-3 trees, learning rate 0.3, subsample fraction 0.8.
#[derive(Debug, Clone)]
pub struct Hyperparams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub subsample: f64,
    pub lambda: f64,
    /// Quantile bucket count per feature; 0 selects per-value thresholds.
    pub bins: usize,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            n_trees: 5,
            max_depth: 3,
            learning_rate: 0.3,
            subsample: 0.8,
            lambda: 1.0,
            bins: 33,
            seed: 0,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth < 1 {
            return Err(Error::Usage("max_depth must be >= 1".into()));
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return Err(Error::Usage("subsample must be in (0, 1]".into()));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Usage("lambda must be a finite nonnegative real".into()));
        }
        if self.bins == 1 {
            return Err(Error::Usage("bins must be 0 (per-value) or >= 2".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Usage("learning_rate must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_party() -> VerticalDataset {
        VerticalDataset::from_columns(
            vec![
                PartyFeatures::new(vec!["a".into()], vec![vec![1.0, 2.0, 3.0]]),
                PartyFeatures::new(vec!["b".into()], vec![vec![9.0, 8.0, 7.0]]),
            ],
            vec![0, 1, 0],
        )
        .unwrap()
    }

    #[test]
    fn aligned_dataset_builds() {
        let ds = two_party();
        assert_eq!(ds.n_samples(), 3);
        assert_eq!(ds.n_parties(), 2);
        assert_eq!(ds.row_of(2).unwrap(), 2);
    }

    #[test]
    fn misaligned_column_is_rejected() {
        let err = VerticalDataset::from_columns(
            vec![PartyFeatures::new(vec!["a".into()], vec![vec![1.0, 2.0]])],
            vec![0, 1, 0],
        );
        assert!(err.is_err());
    }

    #[test]
    fn non_binary_labels_rejected() {
        let err = VerticalDataset::from_columns(
            vec![PartyFeatures::new(vec!["a".into()], vec![vec![1.0]])],
            vec![2],
        );
        assert!(err.is_err());
    }

    #[test]
    fn default_hyperparams_validate() {
        Hyperparams::default().validate().unwrap();
        let mut bad = Hyperparams::default();
        bad.subsample = 0.0;
        assert!(bad.validate().is_err());
    }
}
