//! Federated prediction must equal the resolved model's local traversal,
//! bit for bit, with only record ids and direction bits on the wire.

mod common;

use fedboost::boosting::dataset::{Hyperparams, PartyFeatures};
use fedboost::boosting::trainer::train;
use fedboost::federation::predict::federated_predict;
use fedboost::federation::topology::{ProtocolKind, SetupConfig, Simulation};
use fedboost::protocols::make_protocol;
use fedboost::seeding;
use rand::Rng;

fn eval_columns(n: usize, seed: u64) -> Vec<PartyFeatures> {
    let mut rng = seeding::rng(seed, "eval-data", 0);
    let mut active = vec![Vec::new(), Vec::new()];
    let mut passive = vec![Vec::new(), Vec::new()];
    for _ in 0..n {
        active[0].push(rng.gen_range(-2.0..2.0));
        active[1].push(rng.gen_range(0.0..10.0));
        passive[0].push(rng.gen_range(-1.0..1.0));
        passive[1].push(rng.gen_range(20.0..80.0));
    }
    vec![
        PartyFeatures::new(vec!["a0".into(), "a1".into()], active),
        PartyFeatures::new(vec!["p0".into(), "p1".into()], passive),
    ]
}

#[test]
fn federated_predict_equals_local_predict_bit_exactly() {
    let dataset = common::two_party_dataset(80, 3);
    let params = Hyperparams { n_trees: 4, bins: 8, seed: 5, ..Default::default() };
    let setup = SetupConfig::for_mode(ProtocolKind::NTee, 2, 512, 5);
    let mut sim = Simulation::establish(dataset, params.bins, setup).unwrap();
    let out = train(&mut sim, &params, make_protocol(ProtocolKind::NTee).as_mut()).unwrap();

    let eval = eval_columns(100, 77);
    for row in 0..100u32 {
        let fed = federated_predict(&mut sim, &out.model, &eval, row).unwrap();
        let per_party: Vec<Vec<f64>> = eval
            .iter()
            .map(|p| p.columns.iter().map(|c| c[row as usize]).collect())
            .collect();
        let sample: Vec<&[f64]> = per_party.iter().map(Vec::as_slice).collect();
        let local = out.resolved.predict(&sample);
        assert_eq!(fed.to_bits(), local.to_bits(), "row {row} diverged");
    }
}

#[test]
fn depth_zero_trees_sum_leaf_weights() {
    let dataset = common::two_party_dataset(10, 9);
    // Constant columns make every feature unsplittable: every tree is a
    // single leaf.
    let constant = PartyFeatures::new(vec!["c".into()], vec![vec![1.0; 10]]);
    let labels = dataset.labels().to_vec();
    let flat = fedboost::boosting::dataset::VerticalDataset::from_columns(
        vec![constant.clone(), constant.clone()],
        labels,
    )
    .unwrap();
    let params = Hyperparams { n_trees: 3, bins: 8, subsample: 1.0, seed: 1, ..Default::default() };
    let setup = SetupConfig::for_mode(ProtocolKind::Plaintext, 2, 512, 1);
    let mut sim = Simulation::establish(flat, params.bins, setup).unwrap();
    let out = train(&mut sim, &params, make_protocol(ProtocolKind::Plaintext).as_mut()).unwrap();

    for tree in &out.model.trees {
        assert_eq!(tree.nodes.len(), 1);
    }
    let eval = vec![constant.clone(), constant];
    let logit = federated_predict(&mut sim, &out.model, &eval, 0).unwrap();
    let weight_sum: f64 = out
        .model
        .trees
        .iter()
        .map(|t| match t.nodes[0] {
            fedboost::boosting::tree::TreeNode::Leaf { weight } => weight,
            _ => unreachable!(),
        })
        .sum();
    assert_eq!(logit, out.model.base_score + weight_sum);
}

#[test]
fn unreachable_owner_is_an_error() {
    let dataset = common::two_party_dataset(30, 13);
    let params = Hyperparams { n_trees: 1, bins: 4, seed: 2, ..Default::default() };
    let setup = SetupConfig::for_mode(ProtocolKind::Plaintext, 2, 512, 2);
    let mut sim = Simulation::establish(dataset, params.bins, setup).unwrap();
    let out = train(&mut sim, &params, make_protocol(ProtocolKind::Plaintext).as_mut()).unwrap();

    // An evaluation set that does not cover every party.
    let eval = eval_columns(5, 1);
    let truncated = vec![eval[0].clone()];
    assert!(federated_predict(&mut sim, &out.model, &truncated, 0).is_err());
}
