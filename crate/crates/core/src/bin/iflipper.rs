use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use iflipper::error::{Error, Result};
use iflipper::harness::{
    emit_report, generate_synthetic, load_csv, split_dataset, write_repaired_csv,
    ConsistencySearch, ModelConfig, SyntheticParams,
};
use iflipper::pipeline::{repair, RepairInput};
use iflipper::similarity::{build_graph, Blocking, LshParams, SimilarityConfig};
use iflipper::types::{Dataset, Method, RepairConfig, RepairReport};

#[derive(Parser)]
#[command(
    version,
    about = "Flip as few binary labels as possible to meet a fairness budget"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Repair the labels of a CSV file or a synthetic dataset.
    Repair(RepairArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SimilarityKind {
    Knn,
    Threshold,
}

#[derive(Clone, Copy, ValueEnum)]
enum BlockingKind {
    Exact,
    Lsh,
}

#[derive(Args)]
struct RepairArgs {
    #[arg(
        long,
        conflicts_with = "synthetic",
        required_unless_present = "synthetic"
    )]
    input: Option<PathBuf>,
    /// Generate data instead of reading a file, e.g. `n=2000`.
    #[arg(long, value_parser = parse_synthetic)]
    synthetic: Option<usize>,
    #[arg(long, default_value = "label")]
    label_col: String,
    #[arg(long, value_delimiter = ',')]
    exclude_cols: Vec<String>,
    #[arg(long, value_enum, default_value = "knn")]
    similarity: SimilarityKind,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Distance threshold for the threshold graph.
    #[arg(long = "T", default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 0.05)]
    theta: f64,
    #[arg(long, value_enum, default_value = "exact")]
    blocking: BlockingKind,
    #[arg(
        long,
        conflicts_with = "target_consistency",
        required_unless_present = "target_consistency"
    )]
    m: Option<f64>,
    /// Pick `m` so a model trained on the repaired split reaches this
    /// consistency; the output then holds the repaired training split.
    #[arg(long)]
    target_consistency: Option<f64>,
    #[arg(long, default_value = "iflipper")]
    method: Method,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

fn parse_synthetic(s: &str) -> std::result::Result<usize, String> {
    s.strip_prefix("n=")
        .unwrap_or(s)
        .parse()
        .map_err(|e| format!("expected n=<N>: {e}"))
}

impl RepairArgs {
    fn similarity(&self) -> SimilarityConfig {
        let config = match self.similarity {
            SimilarityKind::Knn => SimilarityConfig::knn(self.k, self.theta),
            SimilarityKind::Threshold => SimilarityConfig::threshold(self.t, self.theta),
        };
        match self.blocking {
            BlockingKind::Exact => config,
            BlockingKind::Lsh => config.with_blocking(Blocking::Lsh(LshParams {
                seed: self.seed,
                ..LshParams::default()
            })),
        }
    }

    fn load(&self) -> Result<Dataset> {
        match (&self.input, self.synthetic) {
            (Some(path), _) => load_csv(path, &self.label_col, &self.exclude_cols),
            (None, Some(n)) => generate_synthetic(n, self.seed, &SyntheticParams::default()),
            (None, None) => Err(Error::InvalidConfig("need --input or --synthetic".into())),
        }
    }
}

fn run(args: &RepairArgs) -> Result<RepairReport> {
    let similarity = args.similarity();
    similarity.validate()?;
    let data = args.load()?;
    let mut config = RepairConfig::new(args.m.unwrap_or(0.0), args.method).with_seed(args.seed);

    let (data, graph) = match args.target_consistency {
        None => {
            let graph = build_graph(&data, &similarity)?;
            (data, graph)
        }
        Some(target) => {
            let split = split_dataset(&data, [0.7, 0.3, 0.0], args.seed)?;
            let train_graph = build_graph(&split.train, &similarity)?;
            let test_graph = build_graph(&split.test, &similarity)?;
            let search = ConsistencySearch {
                train: &split.train,
                train_graph: &train_graph,
                test: &split.test,
                test_graph: &test_graph,
                repair: &config,
                model: &ModelConfig::default(),
            };
            let found = search.run(target, 0.005, 20)?;
            log::info!(
                "m = {} gives model consistency {} after {} steps",
                found.m,
                found.achieved,
                found.steps
            );
            config.m = found.m;
            (split.train, train_graph)
        }
    };

    let (labels, report) = repair(RepairInput::dataset(&data), &graph, &config)?;
    if let Some(path) = &args.output {
        write_repaired_csv(&data, &labels, path)?;
    }
    if let Some(path) = &args.report {
        emit_report(std::slice::from_ref(&report), path)?;
    }
    Ok(report)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let Command::Repair(args) = Cli::parse().command;
    match run(&args) {
        Ok(report) => {
            println!(
                "{} m={} error {} -> {} flips={} feasible={} ({:.1} ms)",
                report.method,
                report.m,
                report.initial_total_error,
                report.final_total_error,
                report.num_flips,
                report.feasible,
                report.runtime_ms
            );
            if report.feasible {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_size_accepts_both_spellings() {
        assert_eq!(parse_synthetic("n=2000"), Ok(2000));
        assert_eq!(parse_synthetic("50"), Ok(50));
        assert!(parse_synthetic("n=lots").is_err());
    }

    #[test]
    fn flags_parse() {
        let cli = Cli::try_parse_from([
            "iflipper",
            "repair",
            "--synthetic",
            "n=10",
            "--m",
            "1",
            "--T",
            "0.5",
            "--method",
            "greedy",
            "--exclude-cols",
            "a,b",
            "--similarity",
            "threshold",
            "--blocking",
            "lsh",
        ])
        .unwrap();
        let Command::Repair(args) = cli.command;
        assert_eq!(args.exclude_cols, vec!["a", "b"]);
        assert_eq!(args.method, Method::Greedy);
        assert!(Cli::try_parse_from(["iflipper", "repair", "--synthetic", "n=10"]).is_err());
    }
}
