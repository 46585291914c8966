//! Command-line surface. Exit codes: 0 success, 1 usage or runtime
//! error, 2 property-check failure (selftest or declared orderings).

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use harness_cli::compare::{compare, write_csv, write_learning_curves_svg};
use harness_cli::diagnose::{
    bound_report, diagnose_pairs, diagnose_points, parse_action_spec, ActionSpecKind,
    PointDatasetFile,
};
use harness_cli::schema::{shipped_schema, validate_csv, validate_json};
use harness_cli::selftest::run_selftest;
use harness_cli::{train, ExperimentConfig, HarnessError};
use symmetry_diagnostics::InstanceSpec;
use synthetic_tasks::{make_rotation_pairs, save_pairs, CorruptionKind, PairSetConfig};

#[derive(Parser)]
#[command(name = "equisym", about = "Equivariant-network experiments and symmetry diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset (rotation pairs by default, or the 2D ring).
    GenData(GenDataArgs),
    /// Train one model from a config file and write its reports.
    Train(TrainArgs),
    /// Run several configs and aggregate them into a comparison table.
    Compare(CompareArgs),
    /// Classify a dataset/action pair as correct/incorrect/extrinsic.
    Diagnose(DiagnoseArgs),
    /// Consensus analysis and accuracy bounds for an instance file.
    Bound(BoundArgs),
    /// Run the equivariance/gradient/oracle property suites.
    Selftest,
}

#[derive(Args)]
struct GenDataArgs {
    /// none | oblique:<deg> | invert-label | fixed-background-grid
    #[arg(long, default_value = "none")]
    corruption: String,
    /// Training samples (pairs) or total points (ring).
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// pairs | ring
    #[arg(long, default_value = "pairs")]
    task: String,
    #[arg(long, default_value_t = 100)]
    val: usize,
    #[arg(long, default_value_t = 100)]
    test: usize,
    #[arg(long, default_value_t = 39)]
    px: usize,
    #[arg(long, default_value = "dataset")]
    stem: String,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (report.json, report_meta.json, model blob).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long, num_args = 1.., required = true)]
    configs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Ordering claims on mean test accuracy, e.g. "equi-c8>cnn".
    #[arg(long)]
    expect: Vec<String>,
}

#[derive(Args)]
struct DiagnoseArgs {
    /// Point dataset JSON file, or a pair-dataset directory.
    #[arg(long)]
    data: PathBuf,
    /// reflect-horizontal | rot-pi | scale:<f> | c8-image
    #[arg(long)]
    action: String,
    /// Nearest-neighbor membership threshold (point datasets without an
    /// exact annulus predicate).
    #[arg(long, default_value_t = 0.05)]
    tol: f64,
    #[arg(long, default_value = "dataset")]
    stem: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_corruption(s: &str) -> Result<CorruptionKind, HarnessError> {
    if s == "none" {
        return Ok(CorruptionKind::None);
    }
    if s == "invert-label" {
        return Ok(CorruptionKind::InvertLabel);
    }
    if s == "fixed-background-grid" {
        return Ok(CorruptionKind::FixedBackgroundGrid);
    }
    if let Some(angle) = s.strip_prefix("oblique:") {
        let view_angle_deg: f64 = angle.parse().map_err(|_| HarnessError::Config {
            reason: format!("bad oblique angle {angle}"),
        })?;
        return Ok(CorruptionKind::Oblique { view_angle_deg });
    }
    Err(HarnessError::Config {
        reason: format!("unknown corruption {s}"),
    })
}

fn write_json(path: &PathBuf, value: &serde_json::Value) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| HarnessError::Io(e.to_string()))?;
    }
    fs::write(path, serde_json::to_string_pretty(value).unwrap() + "\n")
        .map_err(|e| HarnessError::Io(e.to_string()))
}

fn run() -> Result<u8, HarnessError> {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are successes; anything else is a usage error
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            eprint!("{e}");
            return Ok(code);
        }
    };
    match cli.command {
        Command::GenData(args) => {
            match args.task.as_str() {
                "pairs" => {
                    let set = make_rotation_pairs(PairSetConfig {
                        n_train: args.n,
                        n_val: args.val,
                        n_test: args.test,
                        px: args.px,
                        corruption: parse_corruption(&args.corruption)?,
                        seed: args.seed,
                    })?;
                    save_pairs(&set, &args.out, &args.stem)?;
                    println!(
                        "wrote {} samples to {}",
                        set.samples.len(),
                        args.out.display()
                    );
                }
                "ring" => {
                    let noise = 0.1;
                    let ds = synthetic_tasks::make_ring_dataset(
                        args.n,
                        noise,
                        &mut tensor_autodiff::seeded(args.seed),
                        true,
                    );
                    let file = PointDatasetFile {
                        points: ds.points,
                        labels: ds.labels,
                        annulus: Some([ds.r_min, ds.r_max]),
                    };
                    fs::create_dir_all(&args.out).map_err(|e| HarnessError::Io(e.to_string()))?;
                    let path = args.out.join(format!("{}.json", args.stem));
                    fs::write(&path, serde_json::to_string_pretty(&file).unwrap())
                        .map_err(|e| HarnessError::Io(e.to_string()))?;
                    println!("wrote ring dataset to {}", path.display());
                }
                other => {
                    return Err(HarnessError::Config {
                        reason: format!("unknown task {other}"),
                    })
                }
            }
            Ok(0)
        }
        Command::Train(args) => {
            let text = fs::read_to_string(&args.config)
                .map_err(|e| HarnessError::Io(format!("{}: {e}", args.config.display())))?;
            let mut config = ExperimentConfig::from_json(&text)?;
            if let Some(seed) = args.seed {
                config.seed = seed;
            }
            let outcome = train(&config)?;
            let report_json = serde_json::to_value(&outcome.report).unwrap();
            validate_json(&shipped_schema("run_report")?, &report_json, "report")?;
            write_json(&args.out.join("report.json"), &report_json)?;
            write_json(
                &args.out.join("report_meta.json"),
                &serde_json::to_value(&outcome.meta).unwrap(),
            )?;
            let mut model = outcome.model;
            let named = model.named_params();
            let refs: Vec<(String, &tensor_autodiff::Tensor)> =
                named.iter().map(|(n, t)| (n.clone(), t)).collect();
            tensor_autodiff::serialize::save_params(
                &args.out,
                "model",
                &refs,
                model.manifest_metadata(&config.model),
            )?;
            println!(
                "method {} test accuracy {:?}",
                outcome.report.method, outcome.report.test_accuracy
            );
            Ok(0)
        }
        Command::Compare(args) => {
            let configs: Vec<ExperimentConfig> = args
                .configs
                .iter()
                .map(|p| {
                    let text = fs::read_to_string(p)
                        .map_err(|e| HarnessError::Io(format!("{}: {e}", p.display())))?;
                    ExperimentConfig::from_json(&text)
                })
                .collect::<Result<_, _>>()?;
            let reports: Vec<_> = configs
                .par_iter()
                .map(|c| train(c).map(|o| o.report))
                .collect::<Result<_, _>>()?;
            let summary = compare(&reports, &args.expect)?;
            fs::create_dir_all(&args.out).map_err(|e| HarnessError::Io(e.to_string()))?;
            let summary_json = serde_json::to_value(&summary).unwrap();
            validate_json(&shipped_schema("comparison")?, &summary_json, "comparison")?;
            write_json(&args.out.join("comparison.json"), &summary_json)?;
            let csv_path = args.out.join("comparison.csv");
            write_csv(&summary, &csv_path)?;
            let csv_text =
                fs::read_to_string(&csv_path).map_err(|e| HarnessError::Io(e.to_string()))?;
            validate_csv(&shipped_schema("comparison_csv")?, &csv_text)?;
            write_learning_curves_svg(&reports, &args.out.join("curves.svg"))?;
            for row in &summary.rows {
                println!(
                    "{} n={} mean={:.4} stderr={:.4}",
                    row.method, row.n_train, row.mean, row.stderr
                );
            }
            for o in &summary.orderings {
                println!(
                    "ordering {} at n={}: {} ({:.4} vs {:.4})",
                    o.claim,
                    o.n_train,
                    if o.holds { "holds" } else { "VIOLATED" },
                    o.lhs_mean,
                    o.rhs_mean
                );
            }
            Ok(if summary.all_orderings_hold { 0 } else { 2 })
        }
        Command::Diagnose(args) => {
            let action = parse_action_spec(&args.action)?;
            let verdict = if args.data.is_dir() {
                if action != ActionSpecKind::C8Image {
                    return Err(HarnessError::Config {
                        reason: "pair datasets support the c8-image action".into(),
                    });
                }
                diagnose_pairs(&args.data, &args.stem)?
            } else {
                let text = fs::read_to_string(&args.data)
                    .map_err(|e| HarnessError::Io(format!("{}: {e}", args.data.display())))?;
                let ds: PointDatasetFile =
                    serde_json::from_str(&text).map_err(|e| HarnessError::Config {
                        reason: format!("dataset parse: {e}"),
                    })?;
                diagnose_points(&ds, action, args.tol)?
            };
            let json = serde_json::to_value(&verdict).unwrap();
            validate_json(&shipped_schema("verdict")?, &json, "verdict")?;
            match &args.out {
                Some(path) => write_json(path, &json)?,
                None => println!("{}", serde_json::to_string_pretty(&json).unwrap()),
            }
            Ok(0)
        }
        Command::Bound(args) => {
            let text = fs::read_to_string(&args.instance)
                .map_err(|e| HarnessError::Io(format!("{}: {e}", args.instance.display())))?;
            let spec: InstanceSpec =
                serde_json::from_str(&text).map_err(|e| HarnessError::Config {
                    reason: format!("instance parse: {e}"),
                })?;
            let report = bound_report(&spec)?;
            let json = serde_json::to_value(&report).unwrap();
            validate_json(&shipped_schema("bound_report")?, &json, "bound")?;
            match &args.out {
                Some(path) => write_json(path, &json)?,
                None => println!("{}", serde_json::to_string_pretty(&json).unwrap()),
            }
            Ok(0)
        }
        Command::Selftest => {
            let results = run_selftest();
            let mut failed = false;
            for r in &results {
                println!(
                    "{} {}: {}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.detail
                );
                failed |= !r.passed;
            }
            Ok(if failed { 2 } else { 0 })
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
