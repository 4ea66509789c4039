//! Command-line front end for the `geneprio` pipeline.

pub mod commands;
pub mod config;
pub mod error;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::CompareConfig;
use crate::config::{load_overrides, resolve_threads, Overrides, RunConfig};
pub use crate::error::{exit, CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "geneprio", version, about = "Disease-gene prioritization with mRMR and balanced random forests")]
pub struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Discretize a dataset and write the mRMR feature list.
    Select(RunArgs),
    /// Nested cross-validation; writes report.json.
    Evaluate(RunArgs),
    /// Out-of-fold gene ranking and feature importance.
    Rank(RunArgs),
    /// Join two datasets on their common genes.
    Merge(MergeArgs),
    /// Paired t-tests between two evaluation reports.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON config file, or any artifact written by a previous run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Second dataset, merged with the first on common genes.
    #[arg(long)]
    pub dataset_b: Option<PathBuf>,
    #[arg(long)]
    pub id_col: Option<String>,
    #[arg(long)]
    pub label_col: Option<String>,
    /// Fixed selection fraction in (0, 1].
    #[arg(long, conflicts_with = "fractions")]
    pub fraction: Option<f64>,
    /// Comma-separated fractions searched by inner cross-validation.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub fractions: Option<Vec<f64>>,
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub min_samples_leaf: Option<usize>,
    /// Features tried per split (default: sqrt of the selected count).
    #[arg(long)]
    pub mtry: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every core. Default from GENEPRIO_THREADS.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub outer_folds: Option<usize>,
    #[arg(long)]
    pub inner_folds: Option<usize>,
    #[arg(long)]
    pub max_levels: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Genes written to ranking.tsv; 0 writes all.
    #[arg(long)]
    pub top_genes: Option<usize>,
    /// Features written to importance.tsv; 0 writes all.
    #[arg(long)]
    pub top_features: Option<usize>,
    /// Keep known positives in the ranking.
    #[arg(long)]
    pub include_positives: bool,
    #[arg(long)]
    pub permutation_repeats: Option<usize>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            dataset: self.dataset.clone(),
            dataset_b: self.dataset_b.clone(),
            id_col: self.id_col.clone(),
            label_col: self.label_col.clone(),
            fractions: self.fraction.map(|f| vec![f]).or_else(|| self.fractions.clone()),
            trees: self.trees,
            max_depth: self.max_depth,
            min_samples_leaf: self.min_samples_leaf,
            features_per_split: self.mtry,
            seed: self.seed,
            outer_folds: self.outer_folds,
            inner_folds: self.inner_folds,
            max_levels: self.max_levels,
            out_dir: self.out_dir.clone(),
            top_genes: self.top_genes,
            top_features: self.top_features,
            include_positives: self.include_positives.then_some(true),
            permutation_repeats: self.permutation_repeats,
            threads: self.threads,
            command: None,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct MergeArgs {
    /// The two datasets, instead of --dataset/--dataset-b.
    #[arg(num_args = 0..=2)]
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    pub candidate: PathBuf,
    pub baseline: PathBuf,
    /// Label for the baseline in the output.
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

/// Resolve the full configuration for a pipeline subcommand.
pub fn run_config(command: &str, args: &RunArgs) -> Result<(RunConfig, usize)> {
    let file = args.config.as_deref().map(load_overrides).transpose()?;
    let cfg = RunConfig::resolve(command, file.as_ref(), &args.overrides())?;
    let threads = resolve_threads(args.threads, file.as_ref())?;
    Ok((cfg, threads))
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    pool.install(f)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Select(a) => {
            let (cfg, threads) = run_config("select", &a)?;
            in_pool(threads, || commands::cmd_select(&cfg))
        }
        Command::Evaluate(a) => {
            let (cfg, threads) = run_config("evaluate", &a)?;
            in_pool(threads, || commands::cmd_evaluate(&cfg))
        }
        Command::Rank(a) => {
            let (cfg, threads) = run_config("rank", &a)?;
            in_pool(threads, || commands::cmd_rank(&cfg))
        }
        Command::Merge(m) => {
            let mut run = m.run.clone();
            let mut inputs = m.inputs.into_iter();
            if let Some(p) = inputs.next() {
                run.dataset = Some(p);
            }
            if let Some(p) = inputs.next() {
                run.dataset_b = Some(p);
            }
            let (cfg, _) = run_config("merge", &run)?;
            commands::cmd_merge(&cfg)
        }
        Command::Compare(c) => {
            let name = c.name.clone().unwrap_or_else(|| {
                c.baseline
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "baseline".into())
            });
            commands::cmd_compare(&CompareConfig {
                command: "compare".into(),
                candidate: c.candidate,
                baseline: c.baseline,
                baseline_name: name,
                out_dir: c.out_dir,
            })
        }
    }
}

/// Parse `args`, run, and return the process exit code.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::OK };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .try_init();
    match run(cli) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
