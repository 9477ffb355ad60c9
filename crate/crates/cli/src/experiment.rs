//! Experiment orchestration: dataset construction, protocol training with
//! timing and byte accounting, and the four-method attack evaluation.

use std::collections::BTreeMap;
use std::time::Instant;

use fedboost::attack::{
    assign_values, guess_accuracy, infer_partial_order, random_baseline, PriorKnowledge,
};
use fedboost::boosting::dataset::VerticalDataset;
use fedboost::boosting::gradients::{compute_gradients, sigmoid, FxGradients};
use fedboost::boosting::trainer::{train, TrainOutput};
use fedboost::error::{Error, Result};
use fedboost::federation::channel::Phase;
use fedboost::federation::topology::{ProtocolKind, SetupConfig, Simulation};
use fedboost::protocols::secureboost::SecureBoostProtocol;
use fedboost::protocols::timing::{PhaseTimer, TimePhase};
use fedboost::protocols::{make_protocol, LevelNode, RoundCtx, SplitProtocol};
use fedboost::seeding;
use rand::seq::SliceRandom;
use sha2::{Digest, Sha256};

use crate::accounting::{expected_bytes, replay_trace, NodeTrace, RunTrace, TreeTrace};
use crate::config::ExperimentConfig;
use crate::csv_io::load_csv_vertical;
use crate::report::{AccuracyRow, AttackReport, BenchRow, ChannelBytes, RunReport};
use crate::synth::{gen_synthetic, SyntheticSpec};

/// Which synthetic schema a run uses when no CSV is configured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schema {
    Benchmark,
    AttackTarget,
}

pub struct Outcome {
    pub report: RunReport,
    pub sim: Simulation,
    pub train: TrainOutput,
}

pub fn build_dataset(cfg: &ExperimentConfig, schema: Schema) -> Result<VerticalDataset> {
    match &cfg.data {
        Some(path) => load_csv_vertical(path, &cfg.label, &cfg.parties),
        None => {
            let spec = match schema {
                Schema::Benchmark => SyntheticSpec::benchmark(cfg.features)?,
                Schema::AttackTarget => SyntheticSpec::attack_target(),
            };
            gen_synthetic(cfg.samples, &spec, cfg.params.seed)
        }
    }
}

fn model_hash(train: &TrainOutput) -> String {
    let mut hasher = Sha256::new();
    hasher.update(train.resolved.canonical_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn phase_name(phase: Phase) -> &'static str {
    match phase {
        Phase::Setup => "setup",
        Phase::Gradients => "gradients",
        Phase::Splits => "splits",
        Phase::Decision => "decision",
        Phase::Inference => "inference",
    }
}

fn assemble_report(
    cfg: &ExperimentConfig,
    sim: &Simulation,
    train: &TrainOutput,
    total_time_ms: f64,
    attack: Option<AttackReport>,
    trace_override: Option<RunTrace>,
) -> Result<RunReport> {
    let trace = match trace_override {
        Some(t) => t,
        None => replay_trace(&sim.dataset, &train.resolved, &cfg.params)?,
    };
    let thresholds: Vec<Vec<usize>> = sim
        .thresholds
        .iter()
        .map(|per_feature| per_feature.iter().map(|t| t.len()).collect())
        .collect();
    let expected = expected_bytes(
        sim.mode,
        &trace,
        &thresholds,
        cfg.paillier_bits as u64,
        sim.setup.enclave_budget,
    );

    let labels = sim.dataset.labels();
    let probs: Vec<f64> = train.final_logits.iter().map(|&z| sigmoid(z)).collect();
    let train_accuracy = probs
        .iter()
        .zip(labels)
        .filter(|(p, &y)| (**p > 0.5) == (y == 1))
        .count() as f64
        / labels.len() as f64;
    let train_auc = crate::report::auc(&probs, labels);

    let mut phase_time_ms = BTreeMap::new();
    for phase in TimePhase::ALL {
        phase_time_ms.insert(
            phase.name().to_string(),
            train.timer.get(phase).as_secs_f64() * 1e3,
        );
    }

    let mut bytes_by_phase = BTreeMap::new();
    for phase in [Phase::Setup, Phase::Gradients, Phase::Splits, Phase::Decision, Phase::Inference] {
        bytes_by_phase.insert(phase_name(phase).to_string(), sim.router.bytes_in_phase(phase));
    }
    let bytes_by_channel = sim
        .router
        .bytes_by_pair_phase()
        .iter()
        .map(|(&(s, r, p), &b)| ChannelBytes {
            sender: s,
            receiver: r,
            phase: phase_name(p).to_string(),
            bytes: b,
        })
        .collect();

    Ok(RunReport {
        protocol: sim.mode.name().to_string(),
        n_samples: sim.dataset.n_samples(),
        n_parties: sim.dataset.n_parties(),
        n_features: sim.dataset.n_features_total(),
        bins: cfg.params.bins,
        thresholds_per_feature: thresholds,
        paillier_bits: cfg.paillier_bits,
        seed: cfg.params.seed,
        n_trees: cfg.params.n_trees,
        max_depth: cfg.params.max_depth,
        learning_rate: cfg.params.learning_rate,
        subsample: cfg.params.subsample,
        lambda: cfg.params.lambda,
        model_hash: model_hash(train),
        train_accuracy,
        train_auc,
        phase_time_ms,
        total_time_ms,
        bytes_by_phase,
        bytes_by_channel,
        total_bytes: sim.router.total_bytes(),
        split_finding_bytes: sim.router.protocol_bytes(),
        expected,
        attack,
    })
}

/// Train with the configured protocol, measuring time and bytes.
pub fn run_experiment(cfg: &ExperimentConfig, schema: Schema) -> Result<Outcome> {
    cfg.validate()?;
    let dataset = build_dataset(cfg, schema)?;
    let setup = SetupConfig::for_mode(
        cfg.protocol,
        dataset.n_parties(),
        cfg.paillier_bits,
        cfg.params.seed,
    );
    let mut sim = Simulation::establish(dataset, cfg.params.bins, setup)?;
    let mut strategy = make_protocol(cfg.protocol);
    let t0 = Instant::now();
    let train_out = train(&mut sim, &cfg.params, strategy.as_mut())?;
    let total_time_ms = t0.elapsed().as_secs_f64() * 1e3;
    let report = assemble_report(cfg, &sim, &train_out, total_time_ms, None, None)?;
    Ok(Outcome { report, sim, train: train_out })
}

/// The four guessing methods of the evaluation.
const METHOD_RANDOM_MINMAX: &str = "random_minmax";
const METHOD_ATTACK_MINMAX: &str = "attack_minmax";
const METHOD_RANDOM_DIST: &str = "random_distribution";
const METHOD_ATTACK_DIST: &str = "attack_distribution";

/// Run the ordering attack end to end:
/// warm the model up with the plaintext oracle (losslessness makes the
/// resulting gradients identical to any protocol's), execute one real
/// SecureBoost split-finding round at the root to produce the adversary
/// view, reconstruct per-feature orders, and score all four guessing
/// methods against ground truth.
pub fn run_attack(cfg: &ExperimentConfig, schema: Schema) -> Result<Outcome> {
    cfg.validate()?;
    let dataset = build_dataset(cfg, schema)?;
    let n = dataset.n_samples();

    // Plaintext warm-up to diversify per-sample gradients.
    let mut warm_params = cfg.params.clone();
    warm_params.n_trees = cfg.attack_warmup;
    let warm_setup =
        SetupConfig::for_mode(ProtocolKind::Plaintext, dataset.n_parties(), cfg.paillier_bits, cfg.params.seed);
    let mut warm_sim = Simulation::establish(dataset.clone(), cfg.params.bins, warm_setup)?;
    let t0 = Instant::now();
    let warm_out = train(&mut warm_sim, &warm_params, make_protocol(ProtocolKind::Plaintext).as_mut())?;

    // One SecureBoost round over the full instance set.
    let pairs = compute_gradients(&warm_out.final_logits, warm_sim.dataset.labels())?;
    let grads = FxGradients::encode(&pairs)?;
    let sb_setup = SetupConfig::for_mode(
        ProtocolKind::SecureBoost,
        dataset.n_parties(),
        cfg.paillier_bits,
        cfg.params.seed,
    );
    let mut sb_sim = Simulation::establish(dataset, cfg.params.bins, sb_setup)?;
    let mut proto = SecureBoostProtocol::new();
    let mut timer = PhaseTimer::new();
    let rows: Vec<u32> = (0..n as u32).collect();
    let ctx = RoundCtx { round: cfg.attack_warmup, params: &cfg.params, grads: &grads };
    let root = LevelNode { node: 0, rows: rows.clone() };
    proto.begin_round(&mut sb_sim, &ctx, &rows, &mut timer)?;
    proto.begin_level(&mut sb_sim, &ctx, std::slice::from_ref(&root), &mut timer)?;
    let decision = proto.find_split(&mut sb_sim, &ctx, &root, &mut timer)?;
    // The transcript holds exactly one attempted root node.
    let attack_trace = RunTrace {
        trees: vec![TreeTrace {
            nodes: vec![NodeTrace {
                n_rows: n as u64,
                winner: decision.as_ref().map(|d| (d.party, d.left_rows.len() as u64)),
            }],
            oob_passive_edges: 0,
        }],
    };

    let view = sb_sim
        .view
        .latest_root()
        .ok_or_else(|| Error::Protocol("secureboost round produced no adversary view".into()))?;
    let orders = infer_partial_order(view)?;

    // Prior knowledge from a disjoint sample: a fresh draw of the same
    // generator, or a held-out row subset for CSV input.
    let prior_seed = seeding::derive(cfg.params.seed, "prior-sample", 0);
    let (prior_columns, scored_rows): (BTreeMap<(usize, usize), Vec<f64>>, Vec<u32>) =
        match &cfg.data {
            None => {
                let spec = match schema {
                    Schema::Benchmark => SyntheticSpec::benchmark(cfg.features)?,
                    Schema::AttackTarget => SyntheticSpec::attack_target(),
                };
                let disjoint = gen_synthetic(cfg.samples, &spec, prior_seed)?;
                let mut map = BTreeMap::new();
                for order in &orders {
                    map.insert(
                        (order.party, order.feature),
                        disjoint.party(order.party).columns[order.feature].clone(),
                    );
                }
                (map, rows.clone())
            }
            Some(_) => {
                // Hold out a seeded 10% of rows as the attacker's reference
                // sample; score the rest.
                let mut shuffled: Vec<u32> = rows.clone();
                shuffled.shuffle(&mut seeding::rng(prior_seed, "prior-rows", 0));
                let cut = (n / 10).max(1);
                let (prior_rows, rest) = shuffled.split_at(cut);
                let mut scored: Vec<u32> = rest.to_vec();
                scored.sort_unstable();
                let mut map = BTreeMap::new();
                for order in &orders {
                    let column = &sb_sim.dataset.party(order.party).columns[order.feature];
                    map.insert(
                        (order.party, order.feature),
                        prior_rows.iter().map(|&r| column[r as usize]).collect(),
                    );
                }
                (map, scored)
            }
        };

    let mut attack_rows = Vec::new();
    for order in &orders {
        let column = &sb_sim.dataset.party(order.party).columns[order.feature];
        let name = sb_sim.dataset.party(order.party).names[order.feature].clone();
        let prior_sample = &prior_columns[&(order.party, order.feature)];
        let lo = prior_sample.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = prior_sample.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let minmax = PriorKnowledge::MinMax { lo, hi };
        let dist = PriorKnowledge::approx_from_sample(prior_sample)?;

        let scored: std::collections::HashSet<u32> = scored_rows.iter().copied().collect();
        let mut score_method = |method: &str, guesses_by_row: &BTreeMap<u32, f64>| -> Result<()> {
            let mut guesses = Vec::with_capacity(scored_rows.len());
            let mut truth = Vec::with_capacity(scored_rows.len());
            for (&row, &guess) in guesses_by_row {
                if scored.contains(&row) {
                    guesses.push(guess);
                    truth.push(column[row as usize]);
                }
            }
            let acc = guess_accuracy(&guesses, &truth, &cfg.tolerances)?;
            for (tol, a) in cfg.tolerances.iter().zip(acc) {
                attack_rows.push(AccuracyRow {
                    method: method.to_string(),
                    party: order.party,
                    feature: name.clone(),
                    tolerance: *tol,
                    accuracy: a,
                });
            }
            Ok(())
        };

        let to_map = |v: Vec<(u32, f64)>| -> BTreeMap<u32, f64> { v.into_iter().collect() };
        score_method(METHOD_ATTACK_MINMAX, &to_map(assign_values(&order.order, &minmax)))?;
        score_method(METHOD_ATTACK_DIST, &to_map(assign_values(&order.order, &dist)))?;

        let rand_seed = seeding::derive(cfg.params.seed, "baseline", (order.party * 1024 + order.feature) as u64);
        let rand_mm = random_baseline(n, &minmax, rand_seed);
        let rand_ds = random_baseline(n, &dist, rand_seed.wrapping_add(1));
        let by_row = |draws: Vec<f64>| -> BTreeMap<u32, f64> {
            draws.into_iter().enumerate().map(|(i, v)| (i as u32, v)).collect()
        };
        score_method(METHOD_RANDOM_MINMAX, &by_row(rand_mm))?;
        score_method(METHOD_RANDOM_DIST, &by_row(rand_ds))?;
    }

    let total_time_ms = t0.elapsed().as_secs_f64() * 1e3;
    let attack_report = AttackReport {
        warmup_rounds: cfg.attack_warmup,
        scored_samples: scored_rows.len(),
        rows: attack_rows,
    };
    let report = assemble_report(
        cfg,
        &sb_sim,
        &warm_out,
        total_time_ms,
        Some(attack_report),
        Some(attack_trace),
    )?;
    Ok(Outcome { report, sim: sb_sim, train: warm_out })
}

/// Sweep sample counts and protocols; one row per run.
pub fn run_bench(
    cfg: &ExperimentConfig,
    sample_counts: &[usize],
    protocols: &[ProtocolKind],
) -> Result<(Vec<BenchRow>, Vec<RunReport>)> {
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for &samples in sample_counts {
        for &protocol in protocols {
            let mut one = cfg.clone();
            one.samples = samples;
            one.protocol = protocol;
            let outcome = run_experiment(&one, Schema::Benchmark)?;
            rows.push(BenchRow {
                samples,
                protocol: protocol.name().to_string(),
                seconds: outcome.report.total_time_ms / 1e3,
                split_finding_bytes: outcome.report.split_finding_bytes,
                total_bytes: outcome.report.total_bytes,
            });
            reports.push(outcome.report);
        }
    }
    Ok((rows, reports))
}
