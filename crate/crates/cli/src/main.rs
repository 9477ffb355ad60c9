//! fedboost: train vertical federated boosted trees under interchangeable
//! split-finding protocols, run the ordering attack, and benchmark
//! communication and computation.
//!
//! Exit codes: 0 ok, 1 usage error, 2 runtime failure.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use fedboost::error::Error;
use fedboost::federation::topology::ProtocolKind;
use fedboost_cli::config::{parse_config, parse_tolerances, ExperimentConfig};
use fedboost_cli::csv_io::save_csv;
use fedboost_cli::experiment::{run_attack, run_bench, run_experiment, Outcome, Schema};
use fedboost_cli::report;
use fedboost_cli::synth::{gen_synthetic, SyntheticSpec};

#[derive(Parser)]
#[command(name = "fedboost", version, about = "vertical federated gradient boosting simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct CommonArgs {
    /// Flat key-value config file with [party.N] sections.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV input; omit to generate synthetic data.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Synthetic sample count.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Quantile buckets per feature; 0 selects per-value thresholds.
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    paillier_bits: Option<usize>,
    #[arg(long)]
    trees: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    subsample: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Total synthetic feature count.
    #[arg(long)]
    features: Option<usize>,
    /// Label column name for CSV input.
    #[arg(long)]
    label: Option<String>,
    /// Output directory for the report files.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset CSV.
    Synth {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        features: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one model under a protocol and report time and bytes.
    Train {
        /// plaintext | secureboost | ntee | onetee
        #[arg(long)]
        protocol: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the ordering attack against a SecureBoost round.
    Attack {
        /// Comma-separated absolute tolerances for accuracy scoring.
        #[arg(long)]
        tolerances: Option<String>,
        /// Plaintext warm-up rounds before the attacked round.
        #[arg(long)]
        warmup: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Sweep sample counts and protocols; emit a bench CSV.
    Bench {
        /// Comma-separated sample counts, e.g. 1000,10000.
        #[arg(long)]
        sweep: Option<String>,
        /// Comma-separated protocol names.
        #[arg(long)]
        protocols: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn apply_common(cfg: &mut ExperimentConfig, common: &CommonArgs) -> Result<(), Error> {
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Usage(format!("cannot read config {}: {e}", path.display())))?;
        cfg.apply_file(&parse_config(&text)?)?;
    }
    if let Some(v) = &common.data {
        cfg.data = Some(v.clone());
    }
    if let Some(v) = common.samples {
        cfg.samples = v;
    }
    if let Some(v) = common.seed {
        cfg.params.seed = v;
    }
    if let Some(v) = common.bins {
        cfg.params.bins = v;
    }
    if let Some(v) = common.paillier_bits {
        cfg.paillier_bits = v;
    }
    if let Some(v) = common.trees {
        cfg.params.n_trees = v;
    }
    if let Some(v) = common.depth {
        cfg.params.max_depth = v;
    }
    if let Some(v) = common.subsample {
        cfg.params.subsample = v;
    }
    if let Some(v) = common.lambda {
        cfg.params.lambda = v;
    }
    if let Some(v) = common.features {
        cfg.features = v;
    }
    if let Some(v) = &common.label {
        cfg.label = v.clone();
    }
    if let Some(v) = &common.out {
        cfg.out = Some(v.clone());
    }
    Ok(())
}

fn emit_outcome(outcome: &Outcome, out: &Option<PathBuf>) -> Result<(), Error> {
    let Some(dir) = out else {
        println!("{}", serde_json::to_string_pretty(&outcome.report).unwrap());
        return Ok(());
    };
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::Usage(format!("cannot create {}: {e}", dir.display())))?;
    report::write_json(&outcome.report, &dir.join("report.json"))?;
    report::write_transcript(&outcome.sim.router, &dir.join("transcript.jsonl"))?;
    report::write_view(&outcome.sim.view, &dir.join("view.json"))?;
    if let Some(attack) = &outcome.report.attack {
        report::write_accuracy_csv(&attack.rows, &dir.join("accuracy.csv"))?;
    }
    println!(
        "{}: model {} | split-finding bytes {} | wrote {}",
        outcome.report.protocol,
        &outcome.report.model_hash[..12],
        outcome.report.split_finding_bytes,
        dir.display()
    );
    Ok(())
}

fn dispatch(command: Command) -> Result<(), Error> {
    match command {
        Command::Synth { samples, seed, features, out } => {
            let spec = SyntheticSpec::benchmark(features)?;
            let dataset = gen_synthetic(samples, &spec, seed)?;
            save_csv(&out, &dataset, "label")?;
            println!("wrote {} samples x {} features to {}", samples, features, out.display());
            Ok(())
        }
        Command::Train { protocol, common } => {
            let mut cfg = ExperimentConfig::default();
            apply_common(&mut cfg, &common)?;
            if let Some(p) = protocol {
                cfg.protocol = ProtocolKind::from_str(&p)?;
            }
            let outcome = run_experiment(&cfg, Schema::Benchmark)?;
            emit_outcome(&outcome, &cfg.out)
        }
        Command::Attack { tolerances, warmup, common } => {
            let mut cfg = ExperimentConfig::default();
            // Attack defaults: full instance coverage, per-value thresholds,
            // test-size Paillier keys.
            cfg.params.subsample = 1.0;
            cfg.params.bins = 0;
            cfg.paillier_bits = 512;
            apply_common(&mut cfg, &common)?;
            if let Some(t) = tolerances {
                cfg.tolerances = parse_tolerances(&t)?;
            }
            if let Some(w) = warmup {
                cfg.attack_warmup = w;
            }
            let outcome = run_attack(&cfg, Schema::AttackTarget)?;
            emit_outcome(&outcome, &cfg.out)
        }
        Command::Bench { sweep, protocols, common } => {
            let mut cfg = ExperimentConfig::default();
            apply_common(&mut cfg, &common)?;
            let counts: Vec<usize> = sweep
                .unwrap_or_else(|| "1000".into())
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Usage(format!("bad sample count {s:?}")))
                })
                .collect::<Result<_, _>>()?;
            let kinds: Vec<ProtocolKind> = protocols
                .unwrap_or_else(|| "plaintext,secureboost,ntee,onetee".into())
                .split(',')
                .map(|s| ProtocolKind::from_str(s.trim()))
                .collect::<Result<_, _>>()?;
            let (rows, reports) = run_bench(&cfg, &counts, &kinds)?;
            match &cfg.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir)
                        .map_err(|e| Error::Usage(format!("cannot create {}: {e}", dir.display())))?;
                    report::write_bench_csv(&rows, &dir.join("bench.csv"))?;
                    for r in &reports {
                        report::write_json(r, &dir.join(format!("report_{}_{}.json", r.protocol, r.n_samples)))?;
                    }
                    println!("wrote {} bench rows to {}", rows.len(), dir.display());
                }
                None => {
                    for row in &rows {
                        println!(
                            "{},{},{:.3},{}",
                            row.samples, row.protocol, row.seconds, row.split_finding_bytes
                        );
                    }
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap help/version are not errors.
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Usage(_)) | Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
