//! The three-sample, one-feature walkthrough, executed through the real
//! SecureBoost machinery: one passive party holding x = {20, 30, 15}, the
//! active party holding gradients {-1, 0.6, 0.2}.

use fedboost::attack::{assign_values, guess_accuracy, infer_partial_order, PriorKnowledge};
use fedboost::boosting::dataset::{Hyperparams, PartyFeatures, VerticalDataset};
use fedboost::boosting::gradients::{FxGradients, GradientPair};
use fedboost::boosting::split::find_best_split_oracle;
use fedboost::crypto::Fx;
use fedboost::federation::topology::{ProtocolKind, SetupConfig, Simulation};
use fedboost::protocols::secureboost::SecureBoostProtocol;
use fedboost::protocols::timing::PhaseTimer;
use fedboost::protocols::{LevelNode, RoundCtx, SplitProtocol};

fn example_sim() -> Simulation {
    let dataset = VerticalDataset::from_columns(
        vec![
            PartyFeatures::new(vec![], vec![]), // active party: labels only
            PartyFeatures::new(vec!["x".into()], vec![vec![20.0, 30.0, 15.0]]),
        ],
        vec![1, 0, 0],
    )
    .unwrap();
    let setup = SetupConfig::for_mode(ProtocolKind::SecureBoost, 2, 512, 17);
    Simulation::establish(dataset, 0, setup).unwrap() // per-value thresholds
}

fn example_grads() -> FxGradients {
    FxGradients::encode(&[
        GradientPair { g: -1.0, h: 0.5 },
        GradientPair { g: 0.6, h: 0.5 },
        GradientPair { g: 0.2, h: 0.5 },
    ])
    .unwrap()
}

fn run_root_split(sim: &mut Simulation) -> Option<fedboost::protocols::SplitDecision> {
    let grads = example_grads();
    let params = Hyperparams { lambda: 1.0, ..Default::default() };
    let ctx = RoundCtx { round: 0, params: &params, grads: &grads };
    let node = LevelNode { node: 0, rows: vec![0, 1, 2] };
    let mut timer = PhaseTimer::new();
    let mut proto = SecureBoostProtocol::new();
    proto.begin_round(sim, &ctx, &[0, 1, 2], &mut timer).unwrap();
    proto.begin_level(sim, &ctx, std::slice::from_ref(&node), &mut timer).unwrap();
    proto.find_split(sim, &ctx, &node, &mut timer).unwrap()
}

#[test]
fn decision_matches_the_oracle_and_partitions_as_expected() {
    let mut sim = example_sim();
    let decision = run_root_split(&mut sim).expect("a split exists");

    let grads = example_grads();
    let oracle = find_best_split_oracle(&sim.dataset, &sim.thresholds, &grads, &[0, 1, 2], 1.0)
        .unwrap()
        .unwrap();
    assert_eq!(decision.party, oracle.party);
    assert_eq!(decision.feature, oracle.feature);
    assert_eq!(decision.threshold_index, oracle.threshold);
    assert_eq!(decision.score.to_bits(), oracle.score.to_bits());

    // The winning split separates {15, 20} from {30}: rows of x3 and x1
    // left, x2 right.
    assert_eq!(decision.left_rows, vec![0, 2]);
}

#[test]
fn adversary_view_contains_the_decrypted_split_sums() {
    let mut sim = example_sim();
    run_root_split(&mut sim).unwrap();
    let view = sim.view.latest_root().expect("secureboost populates the view");
    assert_eq!(view.features.len(), 1);
    let buckets = &view.features[0].buckets;

    // Bucket g sums in value order decode to {0.2, -1, 0.6}.
    let decoded: Vec<f64> = buckets.iter().map(|b| b.0.decode()).collect();
    assert!((decoded[0] - 0.2).abs() < 1e-5);
    assert!((decoded[1] + 1.0).abs() < 1e-5);
    assert!((decoded[2] - 0.6).abs() < 1e-5);

    // The first split's pair: left sum 0.2, right sum -0.4.
    let total: Fx = buckets.iter().map(|b| b.0).sum();
    let split1 = (buckets[0].0, total - buckets[0].0);
    assert!((split1.0.decode() - 0.2).abs() < 1e-5);
    assert!((split1.1.decode() + 0.4).abs() < 1e-5);

    // Bucket sums reassemble to the node totals.
    let (g_total, h_total) = example_grads().node_totals(&[0, 1, 2]);
    assert_eq!(total, g_total);
    let h_sum: Fx = buckets.iter().map(|b| b.1).sum();
    assert_eq!(h_sum, h_total);

    // Three singleton buckets match the plaintext gradients as a multiset.
    let mut got: Vec<u64> = buckets.iter().map(|b| b.0 .0).collect();
    let mut want: Vec<u64> = example_grads().g.iter().map(|g| g.0).collect();
    got.sort_unstable();
    want.sort_unstable();
    assert_eq!(got, want);
}

#[test]
fn attack_recovers_the_ordering_and_guesses_values() {
    let mut sim = example_sim();
    run_root_split(&mut sim).unwrap();
    let view = sim.view.latest_root().unwrap();

    let orders = infer_partial_order(view).unwrap();
    // x3 <= x1 <= x2, i.e. rows 2, 0, 1.
    assert_eq!(orders[0].order.groups, vec![vec![2], vec![0], vec![1]]);

    let prior = PriorKnowledge::MinMax { lo: 15.0, hi: 30.0 };
    let mut guesses = assign_values(&orders[0].order, &prior);
    guesses.sort_by_key(|&(row, _)| row);
    let guessed: Vec<f64> = guesses.iter().map(|&(_, v)| v).collect();
    assert_eq!(guessed, vec![22.5, 30.0, 15.0]);

    let truth = [20.0, 30.0, 15.0];
    let acc = guess_accuracy(&guessed, &truth, &[2.0, 3.0]).unwrap();
    assert!((acc[0] - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(acc[1], 1.0);
}
