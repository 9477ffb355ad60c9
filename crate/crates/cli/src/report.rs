//! Run reports and their serialized forms: JSON for the full report,
//! plot-ready CSVs for accuracy and benchmark sweeps, and the line-delimited
//! transcript export.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use fedboost::error::{Error, Result};
use fedboost::federation::channel::Router;
use serde::{Deserialize, Serialize};

use crate::accounting::ExpectedBytes;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelBytes {
    pub sender: usize,
    pub receiver: usize,
    pub phase: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub method: String,
    pub party: usize,
    pub feature: String,
    pub tolerance: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub warmup_rounds: usize,
    pub scored_samples: usize,
    pub rows: Vec<AccuracyRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub protocol: String,
    pub n_samples: usize,
    pub n_parties: usize,
    pub n_features: usize,
    pub bins: usize,
    /// Actual threshold counts per party per feature (duplicates collapse).
    pub thresholds_per_feature: Vec<Vec<usize>>,
    pub paillier_bits: usize,
    pub seed: u64,
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub subsample: f64,
    pub lambda: f64,
    pub model_hash: String,
    pub train_accuracy: f64,
    pub train_auc: f64,
    /// Wall-clock per protocol phase; the only nondeterministic fields.
    pub phase_time_ms: BTreeMap<String, f64>,
    pub total_time_ms: f64,
    pub bytes_by_phase: BTreeMap<String, u64>,
    pub bytes_by_channel: Vec<ChannelBytes>,
    pub total_bytes: u64,
    /// Gradients + splits + decision phases: the split-finding protocol
    /// proper, the basis for cross-protocol comparisons.
    pub split_finding_bytes: u64,
    /// Closed-form prediction that must equal the measured counters.
    pub expected: ExpectedBytes,
    pub attack: Option<AttackReport>,
}

pub fn write_json(report: &RunReport, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Usage(format!("report serialization failed: {e}")))?;
    std::fs::write(path, text).map_err(|e| Error::Usage(format!("cannot write {}: {e}", path.display())))
}

pub fn read_json(path: &Path) -> Result<RunReport> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Usage(format!("bad report json: {e}")))
}

/// accuracy.csv: method, feature, tolerance, accuracy.
pub fn write_accuracy_csv(rows: &[AccuracyRow], path: &Path) -> Result<()> {
    let mut out = String::from("method,party,feature,tolerance,accuracy\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.method, r.party, r.feature, r.tolerance, r.accuracy
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::Usage(format!("cannot write {}: {e}", path.display())))
}

/// bench.csv: one row per (samples, protocol) pair.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub samples: usize,
    pub protocol: String,
    pub seconds: f64,
    pub split_finding_bytes: u64,
    pub total_bytes: u64,
}

pub fn write_bench_csv(rows: &[BenchRow], path: &Path) -> Result<()> {
    let mut out = String::from("samples,protocol,seconds,split_finding_bytes,total_bytes\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.samples, r.protocol, r.seconds, r.split_finding_bytes, r.total_bytes
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::Usage(format!("cannot write {}: {e}", path.display())))
}

/// view.json: everything the active party decrypted during split finding.
/// Empty for the TEE-backed protocols, which is the attack's negative
/// control.
pub fn write_view(view: &fedboost::protocols::AdversaryView, path: &Path) -> Result<()> {
    let text = serde_json::to_string(view)
        .map_err(|e| Error::Usage(format!("view serialization failed: {e}")))?;
    std::fs::write(path, text).map_err(|e| Error::Usage(format!("cannot write {}: {e}", path.display())))
}

pub fn read_view(path: &Path) -> Result<fedboost::protocols::AdversaryView> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Usage(format!("bad view json: {e}")))
}

/// transcript.jsonl: one record per message.
pub fn write_transcript(router: &Router, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)
        .map_err(|e| Error::Usage(format!("cannot write {}: {e}", path.display())))?;
    let mut w = std::io::BufWriter::new(file);
    for record in router.records() {
        let line = serde_json::to_string(&record)
            .map_err(|e| Error::Usage(format!("transcript serialization failed: {e}")))?;
        writeln!(w, "{line}").map_err(|e| Error::Usage(format!("write failed: {e}")))?;
    }
    Ok(())
}

/// Area under the ROC curve by average ranks (ties share their mean rank).
pub fn auc(scores: &[f64], labels: &[u8]) -> f64 {
    let n_pos = labels.iter().filter(|&&y| y == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return 0.5;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mean_rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            if labels[idx] == 1 {
                rank_sum_pos += mean_rank;
            }
        }
        i = j + 1;
    }
    (rank_sum_pos - n_pos as f64 * (n_pos as f64 + 1.0) / 2.0) / (n_pos as f64 * n_neg as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auc_of_perfect_separation_is_one() {
        let scores = [0.1, 0.2, 0.8, 0.9];
        let labels = [0, 0, 1, 1];
        assert_eq!(auc(&scores, &labels), 1.0);
    }

    #[test]
    fn auc_of_reversed_separation_is_zero() {
        let scores = [0.9, 0.8, 0.1, 0.2];
        let labels = [0, 0, 1, 1];
        assert_eq!(auc(&scores, &labels), 0.0);
    }

    #[test]
    fn auc_handles_ties_by_mean_rank() {
        let scores = [0.5, 0.5, 0.5, 0.5];
        let labels = [0, 1, 0, 1];
        assert_eq!(auc(&scores, &labels), 0.5);
    }
}
