//! Experiment configuration: defaults, the flat key-value config file with
//! `[party.N]` sections, and command-line overrides layered on top.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use fedboost::boosting::dataset::Hyperparams;
use fedboost::error::{Error, Result};
use fedboost::federation::topology::ProtocolKind;

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub protocol: ProtocolKind,
    pub samples: usize,
    /// CSV input; `None` generates synthetic data.
    pub data: Option<PathBuf>,
    pub label: String,
    /// Column names per party (index 0 = active). Empty means the synthetic
    /// generator's own split.
    pub parties: Vec<Vec<String>>,
    pub features: usize,
    pub params: Hyperparams,
    pub paillier_bits: usize,
    pub tolerances: Vec<f64>,
    /// Plaintext warm-up rounds before the attacked split-finding round.
    pub attack_warmup: usize,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            protocol: ProtocolKind::Plaintext,
            samples: 1000,
            data: None,
            label: "label".into(),
            parties: Vec::new(),
            features: 10,
            params: Hyperparams::default(),
            paillier_bits: 1024,
            tolerances: vec![1.0, 2.0, 5.0, 10.0],
            attack_warmup: 6,
            out: None,
        }
    }
}

/// Parsed config file: flat `key = value` lines plus `[party.N]` sections
/// listing comma-separated column names.
#[derive(Debug, Default)]
pub struct FileConfig {
    pub values: BTreeMap<String, String>,
    pub parties: Vec<Vec<String>>,
}

pub fn parse_config(text: &str) -> Result<FileConfig> {
    let mut cfg = FileConfig::default();
    let mut current_party: Option<usize> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(section) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let idx = section
                .strip_prefix("party.")
                .and_then(|n| n.parse::<usize>().ok())
                .ok_or_else(|| {
                    Error::Usage(format!("line {}: unknown section {section:?}", lineno + 1))
                })?;
            if cfg.parties.len() <= idx {
                cfg.parties.resize(idx + 1, Vec::new());
            }
            current_party = Some(idx);
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("line {}: expected key = value", lineno + 1)))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        match current_party {
            Some(p) if key == "columns" => {
                cfg.parties[p] = value
                    .split(',')
                    .map(|c| c.trim().to_string())
                    .filter(|c| !c.is_empty())
                    .collect();
            }
            Some(_) => {
                return Err(Error::Usage(format!(
                    "line {}: only `columns` is valid inside a party section",
                    lineno + 1
                )))
            }
            None => {
                cfg.values.insert(key, value);
            }
        }
    }
    Ok(cfg)
}

fn parse_as<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse::<T>()
        .map_err(|_| Error::Usage(format!("config key {key:?}: cannot parse {value:?}")))
}

pub fn parse_tolerances(s: &str) -> Result<Vec<f64>> {
    let tols: Vec<f64> = s
        .split(',')
        .map(|t| parse_as::<f64>("tolerances", t.trim()))
        .collect::<Result<_>>()?;
    if tols.is_empty() || tols.iter().any(|t| *t < 0.0 || !t.is_finite()) {
        return Err(Error::Usage("tolerances must be nonnegative reals".into()));
    }
    Ok(tols)
}

impl ExperimentConfig {
    /// Layer a parsed config file over the defaults.
    pub fn apply_file(&mut self, file: &FileConfig) -> Result<()> {
        for (key, value) in &file.values {
            match key.as_str() {
                "protocol" => self.protocol = ProtocolKind::from_str(value)?,
                "samples" => self.samples = parse_as(key, value)?,
                "data" => self.data = Some(PathBuf::from(value)),
                "label" => self.label = value.clone(),
                "features" => self.features = parse_as(key, value)?,
                "trees" => self.params.n_trees = parse_as(key, value)?,
                "depth" => self.params.max_depth = parse_as(key, value)?,
                "learning_rate" => self.params.learning_rate = parse_as(key, value)?,
                "subsample" => self.params.subsample = parse_as(key, value)?,
                "lambda" => self.params.lambda = parse_as(key, value)?,
                "bins" => self.params.bins = parse_as(key, value)?,
                "seed" => self.params.seed = parse_as(key, value)?,
                "paillier_bits" => self.paillier_bits = parse_as(key, value)?,
                "tolerances" => self.tolerances = parse_tolerances(value)?,
                "warmup" => self.attack_warmup = parse_as(key, value)?,
                "out" => self.out = Some(PathBuf::from(value)),
                other => return Err(Error::Usage(format!("unknown config key {other:?}"))),
            }
        }
        if !file.parties.is_empty() {
            self.parties = file.parties.clone();
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.data.is_some() && self.parties.is_empty() {
            return Err(Error::Usage(
                "CSV input needs [party.N] sections assigning columns to parties".into(),
            ));
        }
        if !matches!(self.paillier_bits, 512 | 1024 | 2048) {
            return Err(Error::Usage("paillier_bits must be one of 512, 1024, 2048".into()));
        }
        Ok(())
    }
}
