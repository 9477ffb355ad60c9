//! Shared helpers for protocol-level tests.

use fedboost::boosting::dataset::{PartyFeatures, VerticalDataset};
use fedboost::seeding;
use rand::Rng;

/// Small two-party dataset with an informative feature at each party and a
/// noisy label rule, deterministic from `seed`.
pub fn two_party_dataset(n: usize, seed: u64) -> VerticalDataset {
    let mut rng = seeding::rng(seed, "test-data", 0);
    let mut active_cols = vec![Vec::with_capacity(n), Vec::with_capacity(n)];
    let mut passive_cols = vec![Vec::with_capacity(n), Vec::with_capacity(n)];
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let a0: f64 = rng.gen_range(-2.0..2.0);
        let a1: f64 = rng.gen_range(0.0..10.0);
        let p0: f64 = rng.gen_range(-1.0..1.0);
        let p1: f64 = rng.gen_range(20.0..80.0);
        let score = 1.4 * a0 - 0.3 * (a1 - 5.0) + 2.0 * p0 + 0.08 * (p1 - 50.0);
        let prob = 1.0 / (1.0 + (-score as f64).exp());
        labels.push(u8::from(rng.gen::<f64>() < prob));
        active_cols[0].push(a0);
        active_cols[1].push(a1);
        passive_cols[0].push(p0);
        passive_cols[1].push(p1);
    }
    VerticalDataset::from_columns(
        vec![
            PartyFeatures::new(vec!["a0".into(), "a1".into()], active_cols),
            PartyFeatures::new(vec!["p0".into(), "p1".into()], passive_cols),
        ],
        labels,
    )
    .unwrap()
}
