use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use deltanas::encoding::{dk_size_exact, dk_size_paper};
use deltanas::space::{SearchSpaceSpec, SpaceKind, space_size_exact, space_size_paper};
use deltanas_cli::config::load_config;
use deltanas_cli::pipeline;

/// Difference-of-architecture search experiments: build delta datasets,
/// train delta predictors, and compare search strategies, all driven by one
/// reproducible config file.
#[derive(Parser)]
#[command(name = "deltanas", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override single keys, e.g. --set oracle.seed=7 (repeatable).
    #[arg(long = "set", value_name = "KEY.PATH=VALUE")]
    overrides: Vec<String>,
    /// Overwrite existing output artifacts.
    #[arg(long)]
    force: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Report search-space and difference-space sizes for a spec.
    Size {
        /// Space kind: block or cell.
        #[arg(long)]
        kind: SpaceKind,
        /// Node count.
        #[arg(long)]
        n: usize,
        /// Operation choices per node.
        #[arg(long)]
        r: usize,
        /// Edit distances to report |D^k| for (repeatable).
        #[arg(long = "k")]
        ks: Vec<usize>,
    },
    /// Generate the difference-of-architecture dataset file.
    GenDataset(ConfigArgs),
    /// Train the delta predictor on the generated dataset.
    Train(ConfigArgs),
    /// Run the configured search algorithm and record its trace.
    Search(ConfigArgs),
    /// Run every configured searcher over the seed list and summarize.
    Compare(ConfigArgs),
    /// Sweep the predictor over edit distances k.
    SweepK(ConfigArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Size { kind, n, r, ks } => cmd_size(kind, n, r, &ks),
        Command::GenDataset(args) => {
            let loaded = load_config(&args.config, &args.overrides)?;
            let stats = pipeline::run_gen_dataset(&loaded, args.force)?;
            println!("wrote {}", stats.path.display());
            println!("samples: {}", stats.samples);
            println!("distinct difference encodings: {}", stats.diff_groups);
            println!("distinct (difference, anchor) pairs: {}", stats.pair_groups);
            Ok(())
        }
        Command::Train(args) => {
            let loaded = load_config(&args.config, &args.overrides)?;
            let stats = pipeline::run_train(&loaded, args.force)?;
            println!("wrote {}", stats.path.display());
            println!(
                "trained on {} samples in {} groups (input dim {})",
                stats.samples, stats.groups, stats.input_dim
            );
            println!("final training mse: {}", stats.training_mse);
            Ok(())
        }
        Command::Search(args) => {
            let loaded = load_config(&args.config, &args.overrides)?;
            let stats = pipeline::run_search(&loaded, args.force)?;
            println!("wrote {}", stats.path.display());
            println!("algorithm: {}", stats.algorithm);
            println!("best architecture: {}", stats.best_key);
            println!("best true score: {}", stats.best_score);
            println!(
                "oracle queries: {} (predictor queries: {})",
                stats.oracle_queries, stats.predictor_queries
            );
            Ok(())
        }
        Command::Compare(args) => {
            let loaded = load_config(&args.config, &args.overrides)?;
            let stats = pipeline::run_compare(&loaded, args.force)?;
            println!("wrote {}", stats.summary_path.display());
            println!("wrote {}", stats.traces_path.display());
            println!(
                "optimum score {}, reach threshold {}",
                stats.comparison.optimum_score, stats.comparison.threshold
            );
            for row in &stats.comparison.rows {
                let queries = row
                    .queries_to_epsilon_median
                    .map_or("never".to_string(), |v| v.to_string());
                println!(
                    "{}: best median {} (iqr {}), queries-to-threshold median {} ({}/{} runs reached)",
                    row.method, row.best_median, row.best_iqr, queries, row.reached, row.runs
                );
            }
            Ok(())
        }
        Command::SweepK(args) => {
            let loaded = load_config(&args.config, &args.overrides)?;
            let stats = pipeline::run_sweep(&loaded, args.force)?;
            println!("wrote {}", stats.path.display());
            println!("k,test_mse,test_tau");
            for row in &stats.rows {
                println!("{},{},{}", row.k, row.test_mse, row.test_tau);
            }
            Ok(())
        }
    }
}

fn cmd_size(kind: SpaceKind, n: usize, r: usize, ks: &[usize]) -> Result<()> {
    let spec = SearchSpaceSpec::new(kind, n, r, (0..r).map(|i| format!("op{i}")).collect())?;
    println!("space kind={kind} n={n} r={r}");
    println!("|A| (paper formula) = {}", space_size_paper(&spec));
    println!("|A| (exact count)   = {}", space_size_exact(&spec));
    for &k in ks {
        let paper = dk_size_paper(&spec, k)?;
        let exact = dk_size_exact(&spec, k)?;
        println!("|D^{k}| paper = {paper}, exact = {exact}");
    }
    Ok(())
}
