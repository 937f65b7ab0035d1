//! Command-line front end for the food-price modeling pipeline.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use foodprice::pipeline::{run_pipeline, run_stage, PipelineConfig, Stage};

#[derive(Parser)]
#[command(
    name = "foodprice",
    version,
    about = "Indicator-panel modeling pipeline: EDA, feature selection, and six-model comparison"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline (eda, select, train, evaluate, report).
    Run(CommonArgs),
    /// Descriptive statistics, normality screening, transforms, and KDE curves.
    Eda(CommonArgs),
    /// Correlation matrix, clustering, representatives, and top-K selection.
    Select(CommonArgs),
    /// Train the configured models (SVR tuned by cross-validated grid search).
    Train(CommonArgs),
    /// Evaluate persisted models on the held-out rows.
    Evaluate(CommonArgs),
    /// Regenerate the comparison report from persisted models.
    Report(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON config file; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input CSV (header row, integer `year` column).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Random seed for splits, folds, and bootstraps.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of features to keep after ranking.
    #[arg(long)]
    top_k: Option<usize>,
    /// Target column name.
    #[arg(long)]
    target: Option<String>,
    /// Training fraction of rows.
    #[arg(long)]
    train_fraction: Option<f64>,
    /// Clustering distance threshold on 1 - |r|.
    #[arg(long)]
    cluster_threshold: Option<f64>,
    /// Comma-separated subset of models to train.
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<String>>,
    /// Grid-search the non-SVR models too.
    #[arg(long)]
    tune_all: bool,
}

impl CommonArgs {
    fn resolve(self) -> Result<PipelineConfig, foodprice::Error> {
        let mut config = match &self.config {
            Some(path) => PipelineConfig::from_file(path)?,
            None => PipelineConfig::default(),
        };
        if let Some(data) = self.data {
            config.data_path = data;
        }
        if let Some(out_dir) = self.out_dir {
            config.out_dir = out_dir;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(top_k) = self.top_k {
            config.top_k = top_k;
        }
        if let Some(target) = self.target {
            config.target_column = target;
        }
        if let Some(fraction) = self.train_fraction {
            config.train_fraction = fraction;
        }
        if let Some(threshold) = self.cluster_threshold {
            config.cluster_threshold = threshold;
        }
        if let Some(models) = self.models {
            config.models = models;
        }
        if self.tune_all {
            config.tune_all = true;
        }
        config.validate()?;
        Ok(config)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, stage) = match cli.command {
        Command::Run(args) => (args, None),
        Command::Eda(args) => (args, Some(Stage::Eda)),
        Command::Select(args) => (args, Some(Stage::Select)),
        Command::Train(args) => (args, Some(Stage::Train)),
        Command::Evaluate(args) => (args, Some(Stage::Evaluate)),
        Command::Report(args) => (args, Some(Stage::Report)),
    };
    let config = match args.resolve() {
        Ok(config) => config,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let result = match stage {
        None => run_pipeline(&config),
        Some(stage) => run_stage(&config, stage),
    };
    match result {
        Ok(manifest) => {
            for record in &manifest.stages {
                eprintln!("{:>9}  {:>6} ms  {}", record.name, record.millis, record.status);
            }
            println!("{}", config.out_dir.join("manifest.json").display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
