//! Synthetic dataset generation: reproducible feature columns with a
//! logistic label rule, so attack experiments have exact ground truth
//! without any external file.

use fedboost::boosting::dataset::{PartyFeatures, VerticalDataset};
use fedboost::error::{Error, Result};
use fedboost::seeding;
use rand::Rng;

/// Box-Muller standard normal draw.
fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeatureDist {
    Uniform { lo: f64, hi: f64 },
    TruncNormal { mean: f64, sd: f64, lo: f64, hi: f64 },
    /// exp(N(location, scale)): salary-like heavy tail.
    LogNormal { location: f64, scale: f64 },
}

impl FeatureDist {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            FeatureDist::Uniform { lo, hi } => rng.gen_range(lo..hi),
            FeatureDist::TruncNormal { mean, sd, lo, hi } => loop {
                let v = mean + sd * normal(rng);
                if (lo..=hi).contains(&v) {
                    return v;
                }
            },
            FeatureDist::LogNormal { location, scale } => (location + scale * normal(rng)).exp(),
        }
    }

    /// Nominal mean and standard deviation used to standardize the label
    /// rule, so weights are scale-free.
    fn moments(&self) -> (f64, f64) {
        match *self {
            FeatureDist::Uniform { lo, hi } => ((lo + hi) / 2.0, (hi - lo) / 12f64.sqrt()),
            FeatureDist::TruncNormal { mean, sd, .. } => (mean, sd),
            FeatureDist::LogNormal { location, scale } => {
                let mean = (location + scale * scale / 2.0).exp();
                let sd = mean * ((scale * scale).exp() - 1.0).sqrt();
                (mean, sd)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct FeatureSpec {
    pub name: String,
    pub dist: FeatureDist,
    pub label_weight: f64,
}

/// What to generate and how to split it between the parties: the first
/// `passive_features` columns belong to the passive party, the rest to the
/// active party.
#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub features: Vec<FeatureSpec>,
    pub passive_features: usize,
    pub label_bias: f64,
    pub label_scale: f64,
}

pub const AGE_DIST: FeatureDist = FeatureDist::Uniform { lo: 21.0, hi: 109.0 };
pub const SALARY_DIST: FeatureDist = FeatureDist::LogNormal { location: 10.4, scale: 0.55 };

impl SyntheticSpec {
    /// Benchmark schema: age and salary plus noise features, first half at
    /// the passive party.
    pub fn benchmark(d: usize) -> Result<SyntheticSpec> {
        if d < 2 {
            return Err(Error::Usage("benchmark schema needs at least 2 features".into()));
        }
        let mut features = vec![
            FeatureSpec { name: "age".into(), dist: AGE_DIST, label_weight: 1.2 },
            FeatureSpec { name: "salary".into(), dist: SALARY_DIST, label_weight: 0.8 },
        ];
        for k in 2..d {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            features.push(FeatureSpec {
                name: format!("x{k}"),
                dist: FeatureDist::TruncNormal { mean: 0.0, sd: 1.0, lo: -4.0, hi: 4.0 },
                label_weight: sign * 0.6 / (k as f64),
            });
        }
        Ok(SyntheticSpec {
            features,
            passive_features: d.div_ceil(2),
            label_bias: 0.0,
            label_scale: 2.0,
        })
    }

    /// Attack schema: a passive age column driving the labels, one active
    /// salary column. The age weight keeps the logistic transition spread
    /// over the whole range, so boosting refines the value ordering
    /// everywhere rather than only near the decision boundary; that is the
    /// structure the ordering attack exploits.
    pub fn attack_target() -> SyntheticSpec {
        SyntheticSpec {
            features: vec![
                FeatureSpec { name: "age".into(), dist: AGE_DIST, label_weight: 2.0 },
                FeatureSpec { name: "salary".into(), dist: SALARY_DIST, label_weight: 0.5 },
            ],
            passive_features: 1,
            label_bias: 0.0,
            label_scale: 1.0,
        }
    }
}

/// Generate a two-party vertical dataset. Party 0 is active (labels plus
/// the trailing feature block), party 1 passive (the leading block).
/// Deterministic per (spec, seed).
pub fn gen_synthetic(n: usize, spec: &SyntheticSpec, seed: u64) -> Result<VerticalDataset> {
    if n == 0 {
        return Err(Error::Usage("cannot generate an empty dataset".into()));
    }
    if spec.passive_features > spec.features.len() {
        return Err(Error::Config("passive feature count exceeds schema".into()));
    }
    let columns: Vec<Vec<f64>> = spec
        .features
        .iter()
        .enumerate()
        .map(|(k, f)| {
            let mut rng = seeding::rng(seed, "synth-feature", k as u64);
            (0..n).map(|_| f.dist.sample(&mut rng)).collect()
        })
        .collect();

    let mut label_rng = seeding::rng(seed, "synth-labels", 0);
    let labels: Vec<u8> = (0..n)
        .map(|i| {
            let mut score = spec.label_bias;
            for (f, col) in spec.features.iter().zip(&columns) {
                let (mean, sd) = f.dist.moments();
                score += f.label_weight * (col[i] - mean) / sd;
            }
            let p = 1.0 / (1.0 + (-spec.label_scale * score).exp());
            u8::from(label_rng.gen::<f64>() < p)
        })
        .collect();

    let split = spec.passive_features;
    let passive = PartyFeatures::new(
        spec.features[..split].iter().map(|f| f.name.clone()).collect(),
        columns[..split].to_vec(),
    );
    let active = PartyFeatures::new(
        spec.features[split..].iter().map(|f| f.name.clone()).collect(),
        columns[split..].to_vec(),
    );
    VerticalDataset::from_columns(vec![active, passive], labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let spec = SyntheticSpec::benchmark(4).unwrap();
        let a = gen_synthetic(50, &spec, 3).unwrap();
        let b = gen_synthetic(50, &spec, 3).unwrap();
        assert_eq!(a.party(1).columns, b.party(1).columns);
        assert_eq!(a.labels(), b.labels());
        let c = gen_synthetic(50, &spec, 4).unwrap();
        assert_ne!(a.party(1).columns, c.party(1).columns);
    }

    #[test]
    fn age_column_respects_its_range() {
        let spec = SyntheticSpec::attack_target();
        let ds = gen_synthetic(2000, &spec, 7).unwrap();
        let age = &ds.party(1).columns[0];
        let lo = age.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = age.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(lo >= 21.0, "min age {lo}");
        assert!(hi <= 109.0, "max age {hi}");
    }

    #[test]
    fn labels_correlate_with_the_rule() {
        let spec = SyntheticSpec::attack_target();
        let ds = gen_synthetic(4000, &spec, 9).unwrap();
        let age = &ds.party(1).columns[0];
        // Mean age of positive labels should exceed that of negatives by a
        // wide margin under a strong positive weight.
        let (mut pos, mut neg) = (vec![], vec![]);
        for (i, &y) in ds.labels().iter().enumerate() {
            if y == 1 { pos.push(age[i]) } else { neg.push(age[i]) }
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!(mean(&pos) > mean(&neg) + 15.0);
    }

    #[test]
    fn feature_split_across_parties() {
        let spec = SyntheticSpec::benchmark(10).unwrap();
        let ds = gen_synthetic(10, &spec, 1).unwrap();
        assert_eq!(ds.party(1).n_features(), 5);
        assert_eq!(ds.party(0).n_features(), 5);
        assert_eq!(ds.party(1).names[0], "age");
    }
}
