//! End-to-end pipeline orchestration.
//!
//! The run is a fixed sequence of stages — `eda`, `select`, `train`,
//! `evaluate`, `report` — each of which reads its inputs from the output
//! directory (or the source data file), writes its artifacts before the
//! next stage begins, and updates `manifest.json`. Because every stage
//! round-trips its state through files with shortest-round-trip float
//! formatting, running the stages in one process or as separate
//! invocations produces byte-identical artifacts.

pub mod artifacts;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{
    evaluate_models, kfold, train_models, tune_spec, CvResult, EvalReport, HyperGrid,
    ModelComparison, ModelSpec, SvrConfig, TrainedModel,
};
use crate::ingest::{impute, load_table, split_indices, IndicatorTable, Scaler};
use crate::models::{ForestParams, ModelDocument};
use crate::select::{choose_representatives, cluster_features, correlation_matrix};
use crate::stats::{describe, kde, screen_features, yeo_johnson_value};

use artifacts::{csv_document, fmt_f64, json_f64, names, read_to_string, safe_file_stem, OutputLog};

/// The six model identifiers accepted in configs.
pub const MODEL_NAMES: [&str; 6] = [
    "svr",
    "ridge",
    "linear",
    "gradient_boosting",
    "random_forest",
    "decision_tree",
];

fn default_target() -> String {
    "FFPI".to_string()
}
fn default_seed() -> u64 {
    42
}
fn default_train_fraction() -> f64 {
    0.8
}
fn default_top_k() -> usize {
    30
}
fn default_cluster_threshold() -> f64 {
    0.3
}
fn default_models() -> Vec<String> {
    MODEL_NAMES.iter().map(|s| s.to_string()).collect()
}
fn default_kde_grid_size() -> usize {
    256
}
fn default_confidence() -> f64 {
    0.95
}

/// Run settings: a JSON document with defaults for everything except the
/// data file and output directory. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub data_path: PathBuf,
    #[serde(default)]
    pub out_dir: PathBuf,
    #[serde(default = "default_target")]
    pub target_column: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    #[serde(default = "default_cluster_threshold")]
    pub cluster_threshold: f64,
    #[serde(default)]
    pub grid: HyperGrid,
    #[serde(default = "default_models")]
    pub models: Vec<String>,
    /// Grid-search the non-SVR models too (small built-in grids).
    #[serde(default)]
    pub tune_all: bool,
    #[serde(default = "default_kde_grid_size")]
    pub kde_grid_size: usize,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            data_path: PathBuf::new(),
            out_dir: PathBuf::new(),
            target_column: default_target(),
            seed: default_seed(),
            train_fraction: default_train_fraction(),
            top_k: default_top_k(),
            cluster_threshold: default_cluster_threshold(),
            grid: HyperGrid::default(),
            models: default_models(),
            tune_all: false,
            kde_grid_size: default_kde_grid_size(),
            confidence: default_confidence(),
        }
    }
}

impl PipelineConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("invalid config {path:?}: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.data_path.as_os_str().is_empty() {
            return Err(Error::Config("data_path is required".to_string()));
        }
        if self.out_dir.as_os_str().is_empty() {
            return Err(Error::Config("out_dir is required".to_string()));
        }
        if self.target_column.is_empty() {
            return Err(Error::Config("target_column must not be empty".to_string()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train_fraction must be in (0,1), got {}",
                self.train_fraction
            )));
        }
        if self.top_k == 0 {
            return Err(Error::Config("top_k must be >= 1".to_string()));
        }
        if !(self.cluster_threshold > 0.0 && self.cluster_threshold < 1.0) {
            return Err(Error::Config(format!(
                "cluster_threshold must be in (0,1), got {}",
                self.cluster_threshold
            )));
        }
        if self.kde_grid_size < 16 {
            return Err(Error::Config("kde_grid_size must be >= 16".to_string()));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::Config(format!(
                "confidence must be in (0,1), got {}",
                self.confidence
            )));
        }
        if self.models.is_empty() {
            return Err(Error::Config("models must not be empty".to_string()));
        }
        for name in &self.models {
            if !MODEL_NAMES.contains(&name.as_str()) {
                return Err(Error::Config(format!(
                    "unknown model {name:?}; expected one of {MODEL_NAMES:?}"
                )));
            }
        }
        self.grid
            .clone()
            .validated()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    /// Model specs in config order, with the grid and seed wired in.
    pub fn model_specs(&self) -> Vec<ModelSpec> {
        self.models
            .iter()
            .map(|name| match name.as_str() {
                "svr" => ModelSpec::Svr {
                    grid: self.grid.clone(),
                    cv_folds: 5,
                    cv_seed: self.seed,
                },
                "ridge" => ModelSpec::Ridge { lambda: 1.0 },
                "linear" => ModelSpec::Linear,
                "gradient_boosting" => ModelSpec::GradientBoosting {
                    rounds: 100,
                    learning_rate: 0.1,
                    max_depth: 3,
                    min_leaf: 1,
                },
                "random_forest" => ModelSpec::RandomForest(ForestParams {
                    seed: self.seed,
                    ..ForestParams::default()
                }),
                "decision_tree" => ModelSpec::DecisionTree {
                    max_depth: 5,
                    min_leaf: 2,
                },
                other => unreachable!("validated model name {other}"),
            })
            .collect()
    }
}

/// Pipeline stages in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Eda,
    Select,
    Train,
    Evaluate,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 5] = [
        Stage::Eda,
        Stage::Select,
        Stage::Train,
        Stage::Evaluate,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Eda => "eda",
            Stage::Select => "select",
            Stage::Train => "train",
            Stage::Evaluate => "evaluate",
            Stage::Report => "report",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub millis: u128,
    pub status: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputRecord {
    pub path: String,
    pub digest: String,
}

/// Reproducibility record written after every stage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: PipelineConfig,
    pub version: String,
    pub stages: Vec<StageRecord>,
    pub outputs: Vec<OutputRecord>,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl RunManifest {
    fn load_or_new(config: &PipelineConfig) -> Self {
        let path = config.out_dir.join(names::MANIFEST);
        if let Ok(text) = std::fs::read_to_string(&path) {
            if let Ok(manifest) = serde_json::from_str::<RunManifest>(&text) {
                return RunManifest {
                    config: config.clone(),
                    ..manifest
                };
            }
        }
        RunManifest {
            config: config.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            stages: Vec::new(),
            outputs: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn record_stage(&mut self, name: &str, millis: u128, status: &str) {
        self.stages.retain(|s| s.name != name);
        self.stages.push(StageRecord {
            name: name.to_string(),
            millis,
            status: status.to_string(),
        });
    }

    fn merge_outputs(&mut self, log: &OutputLog) {
        for (path, digest) in &log.entries {
            self.outputs.retain(|o| &o.path != path);
            self.outputs.push(OutputRecord {
                path: path.clone(),
                digest: digest.clone(),
            });
        }
        self.outputs.sort_by(|a, b| a.path.cmp(&b.path));
    }

    fn add_notes(&mut self, notes: Vec<String>) {
        for note in notes {
            if !self.notes.contains(&note) {
                self.notes.push(note);
            }
        }
        self.notes.sort();
    }

    fn write(&self, out_dir: &Path) -> Result<()> {
        let path = out_dir.join(names::MANIFEST);
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }
}

struct StageOutcome {
    log: OutputLog,
    notes: Vec<String>,
}

/// Runs a single stage against the saved intermediate artifacts and
/// updates the manifest. Failures leave a FAILED stage record behind.
pub fn run_stage(config: &PipelineConfig, stage: Stage) -> Result<RunManifest> {
    config.validate()?;
    std::fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))?;
    let mut manifest = RunManifest::load_or_new(config);
    let started = Instant::now();
    let outcome = match stage {
        Stage::Eda => stage_eda(config),
        Stage::Select => stage_select(config),
        Stage::Train => stage_train(config),
        Stage::Evaluate | Stage::Report => stage_evaluate(config),
    };
    let millis = started.elapsed().as_millis();
    match outcome {
        Ok(out) => {
            manifest.record_stage(stage.name(), millis, "ok");
            manifest.merge_outputs(&out.log);
            manifest.add_notes(out.notes);
            manifest.write(&config.out_dir)?;
            Ok(manifest)
        }
        Err(e) => {
            manifest.record_stage(stage.name(), millis, "FAILED");
            let _ = manifest.write(&config.out_dir);
            Err(e.in_stage(stage.name()))
        }
    }
}

/// Runs all stages in order.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunManifest> {
    let mut manifest = None;
    for stage in Stage::ALL {
        manifest = Some(run_stage(config, stage)?);
    }
    Ok(manifest.expect("at least one stage ran"))
}

// --- stage: eda -----------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct SplitRecord {
    seed: u64,
    train_fraction: f64,
    n: usize,
    train_indices: Vec<usize>,
    test_indices: Vec<usize>,
}

fn stage_eda(config: &PipelineConfig) -> Result<StageOutcome> {
    let mut log = OutputLog::default();
    let table = impute(&load_table(&config.data_path, &config.target_column)?)?;
    let n = table.n_rows();
    let (train_indices, test_indices) = split_indices(n, config.train_fraction, config.seed)?;

    // Descriptive statistics of the raw (post-imputation) series.
    let mut stat_rows = Vec::new();
    let mut push_stats = |name: &str, series: &[f64]| -> Result<()> {
        let s = describe(series, config.confidence)?;
        stat_rows.push(vec![
            name.to_string(),
            fmt_f64(s.mean),
            fmt_f64(s.median),
            fmt_f64(s.std_dev),
            fmt_f64(s.iqr),
            fmt_f64(s.ci_low),
            fmt_f64(s.ci_high),
        ]);
        Ok(())
    };
    push_stats(&table.target_name, &table.target)?;
    for (j, name) in table.feature_names.iter().enumerate() {
        push_stats(name, &table.values.column(j))?;
    }
    log.write(
        &config.out_dir,
        names::SUMMARY_STATS,
        &csv_document(
            &["variable", "mean", "median", "std_dev", "iqr", "ci_lower", "ci_upper"],
            &stat_rows,
        ),
    )?;

    // Normality screening on training rows only; accepted transforms are
    // applied to the full column.
    let train_x = table.values.select_rows(&train_indices);
    let screen = screen_features(&train_x, &table.feature_names)?;
    let mut transformed = table.clone();
    for (j, result) in screen.iter().enumerate() {
        if let Some(lambda) = result.transform_lambda {
            for i in 0..n {
                let v = yeo_johnson_value(transformed.values.get(i, j), lambda);
                transformed.values.set(i, j, v);
            }
        }
    }

    let normality_rows: Vec<Vec<String>> = screen
        .iter()
        .map(|r| {
            vec![
                r.feature.clone(),
                fmt_f64(r.a_squared),
                fmt_f64(r.a_star),
                fmt_f64(r.p_value),
                r.passed.to_string(),
                r.transform_lambda.map(fmt_f64).unwrap_or_default(),
            ]
        })
        .collect();
    log.write(
        &config.out_dir,
        names::NORMALITY,
        &csv_document(
            &["feature", "a_squared", "a_star", "p_value", "passed", "transform_lambda"],
            &normality_rows,
        ),
    )?;

    // Density curves of the series as used downstream (post-transform).
    let mut kde_for = |name: &str, series: &[f64]| -> Result<()> {
        let curve = kde(series, config.kde_grid_size)?;
        let rows: Vec<Vec<String>> = curve
            .grid
            .iter()
            .zip(&curve.density)
            .map(|(g, d)| vec![fmt_f64(*g), fmt_f64(*d)])
            .collect();
        let rel = format!("{}/{}.csv", names::KDE_DIR, safe_file_stem(name));
        log.write(&config.out_dir, &rel, &csv_document(&["grid", "density"], &rows))
    };
    kde_for(&transformed.target_name, &transformed.target)?;
    for (j, name) in transformed.feature_names.iter().enumerate() {
        kde_for(name, &transformed.values.column(j))?;
    }

    // Persisted state for the later stages.
    let mut processed_rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = vec![transformed.years[i].to_string(), fmt_f64(transformed.target[i])];
        for j in 0..transformed.n_features() {
            row.push(fmt_f64(transformed.values.get(i, j)));
        }
        processed_rows.push(row);
    }
    let mut header: Vec<&str> = vec!["year", &transformed.target_name];
    for name in &transformed.feature_names {
        header.push(name);
    }
    log.write(
        &config.out_dir,
        names::PROCESSED,
        &csv_document(&header, &processed_rows),
    )?;

    let split = SplitRecord {
        seed: config.seed,
        train_fraction: config.train_fraction,
        n,
        train_indices,
        test_indices,
    };
    log.write(
        &config.out_dir,
        names::SPLIT,
        &serde_json::to_string_pretty(&split)?,
    )?;

    let transformed_count = screen.iter().filter(|r| r.transform_lambda.is_some()).count();
    Ok(StageOutcome {
        log,
        notes: vec![format!(
            "eda: {} features screened, {} transformed",
            screen.len(),
            transformed_count
        )],
    })
}

// --- stage: select ---------------------------------------------------------

fn read_state(config: &PipelineConfig) -> Result<(IndicatorTable, SplitRecord)> {
    let processed_path = config.out_dir.join(names::PROCESSED);
    if !processed_path.exists() {
        return Err(Error::MissingArtifact {
            path: processed_path,
        });
    }
    let table = load_table(&processed_path, &config.target_column)?;
    let split_path = config.out_dir.join(names::SPLIT);
    let split: SplitRecord = serde_json::from_str(&read_to_string(&split_path)?)?;
    if split.n != table.n_rows() {
        return Err(Error::Config(format!(
            "split.json covers {} rows but processed.csv has {}",
            split.n,
            table.n_rows()
        )));
    }
    Ok((table, split))
}

fn stage_select(config: &PipelineConfig) -> Result<StageOutcome> {
    let mut log = OutputLog::default();
    let (table, split) = read_state(config)?;
    let train_x = table.values.select_rows(&split.train_indices);
    let train_y: Vec<f64> = split.train_indices.iter().map(|&i| table.target[i]).collect();

    let corr = correlation_matrix(&train_x, &table.feature_names)?;
    let clusters = choose_representatives(
        &cluster_features(&corr, config.cluster_threshold)?,
        &corr,
    );

    // Heatmap rows/columns grouped by cluster.
    let order: Vec<usize> = (0..clusters.n_clusters())
        .flat_map(|c| clusters.members(c))
        .collect();
    let mut heat_header: Vec<&str> = vec!["feature"];
    for &j in &order {
        heat_header.push(&corr.names[j]);
    }
    let heat_rows: Vec<Vec<String>> = order
        .iter()
        .map(|&i| {
            let mut row = vec![corr.names[i].clone()];
            row.extend(order.iter().map(|&j| fmt_f64(corr.get(i, j))));
            row
        })
        .collect();
    log.write(
        &config.out_dir,
        names::HEATMAP,
        &csv_document(&heat_header, &heat_rows),
    )?;

    let clusters_json = serde_json::json!({
        "threshold": config.cluster_threshold,
        "clusters": (0..clusters.n_clusters()).map(|c| {
            serde_json::json!({
                "id": c,
                "members": clusters.members(c).iter().map(|&i| clusters.names[i].clone()).collect::<Vec<_>>(),
                "representative": clusters.representatives[c],
            })
        }).collect::<Vec<_>>(),
    });
    log.write(
        &config.out_dir,
        names::CLUSTERS,
        &serde_json::to_string_pretty(&clusters_json)?,
    )?;

    let selection = crate::select::select_top_k(
        &train_x,
        &table.feature_names,
        &train_y,
        &clusters.representatives,
        config.top_k,
    )?;
    let selected_json = serde_json::json!({
        "k": config.top_k,
        "selected": selection.selected,
        "scores": selection.scores.iter().map(|s| serde_json::json!({
            "feature": s.feature,
            "r": json_f64(s.r),
            "f_value": json_f64(s.f_value),
            "p_value": json_f64(s.p_value),
            "rank": s.rank,
        })).collect::<Vec<_>>(),
    });
    log.write(
        &config.out_dir,
        names::SELECTED,
        &serde_json::to_string_pretty(&selected_json)?,
    )?;

    let mut notes = vec![format!(
        "select: {} clusters from {} features",
        clusters.n_clusters(),
        table.n_features()
    )];
    if selection.selected.len() < config.top_k {
        notes.push(format!(
            "select: only {} of requested top_k={} features available ({} cluster representatives)",
            selection.selected.len(),
            config.top_k,
            clusters.n_clusters()
        ));
    }
    Ok(StageOutcome { log, notes })
}

// --- stage: train ----------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct TrainedEntry {
    name: String,
    file: Option<String>,
    error: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TrainMeta {
    selected_features: Vec<String>,
    feature_scaler: Scaler,
    target_scaler: Scaler,
    svr_config: Option<SvrConfig>,
    trained: Vec<TrainedEntry>,
    specs: Vec<ModelSpec>,
}

fn read_selected(config: &PipelineConfig) -> Result<Vec<String>> {
    let path = config.out_dir.join(names::SELECTED);
    let value: serde_json::Value = serde_json::from_str(&read_to_string(&path)?)?;
    let selected = value
        .get("selected")
        .and_then(|v| v.as_array())
        .ok_or_else(|| Error::Config(format!("malformed {path:?}")))?;
    selected
        .iter()
        .map(|v| {
            v.as_str()
                .map(str::to_string)
                .ok_or_else(|| Error::Config(format!("malformed {path:?}")))
        })
        .collect()
}

fn selected_columns(table: &IndicatorTable, selected: &[String]) -> Result<Vec<usize>> {
    selected
        .iter()
        .map(|name| {
            table
                .feature_index(name)
                .ok_or_else(|| Error::MissingColumn {
                    column: name.clone(),
                })
        })
        .collect()
}

fn stage_train(config: &PipelineConfig) -> Result<StageOutcome> {
    let mut log = OutputLog::default();
    let (table, split) = read_state(config)?;
    let selected = read_selected(config)?;
    let cols = selected_columns(&table, &selected)?;

    let x_sel = table.values.select_columns(&cols);
    let x_train = x_sel.select_rows(&split.train_indices);
    let train_y: Vec<f64> = split.train_indices.iter().map(|&i| table.target[i]).collect();

    let feature_scaler = Scaler::fit(&x_train).map_err(|e| match e {
        Error::ZeroVariance { name } => {
            let col: usize = name
                .strip_prefix("column ")
                .and_then(|s| s.parse().ok())
                .unwrap_or(0);
            Error::ZeroVariance {
                name: selected.get(col).cloned().unwrap_or(name),
            }
        }
        other => other,
    })?;
    let x_train_scaled = feature_scaler.transform(&x_train)?;
    let target_scaler = Scaler::fit_vector(&train_y).map_err(|e| match e {
        Error::ZeroVariance { .. } => Error::ZeroVariance {
            name: config.target_column.clone(),
        },
        other => other,
    })?;
    let y_std = target_scaler.transform_vec(&train_y)?;

    let mut specs = config.model_specs();
    if config.tune_all {
        let folds = kfold(
            x_train_scaled.rows(),
            5.min(x_train_scaled.rows()),
            config.seed,
        )?;
        specs = specs
            .iter()
            .map(|s| tune_spec(s, &x_train_scaled, &y_std, &folds))
            .collect::<Result<Vec<_>>>()?;
    }
    let trained = train_models(&x_train_scaled, &y_std, &specs);

    // Grid-search results (from the SVR entry, when present).
    let cv_results: &[CvResult] = trained
        .iter()
        .find(|t| t.name == "svr")
        .map(|t| t.cv_results.as_slice())
        .unwrap_or(&[]);
    if !cv_results.is_empty() {
        let k = cv_results[0].fold_scores.len();
        let fold_headers: Vec<String> = (0..k).map(|i| format!("fold_{i}")).collect();
        let mut header: Vec<&str> = vec!["kernel", "gamma", "c", "epsilon", "mean_mse", "rank", "converged"];
        header.extend(fold_headers.iter().map(String::as_str));
        let rows: Vec<Vec<String>> = cv_results
            .iter()
            .map(|r| {
                let mut row = vec![
                    r.config.kernel.kind_name().to_string(),
                    r.config.kernel.gamma().map(fmt_f64).unwrap_or_default(),
                    fmt_f64(r.config.c),
                    fmt_f64(r.config.epsilon),
                    fmt_f64(r.mean_score),
                    r.rank.to_string(),
                    r.converged.to_string(),
                ];
                row.extend(r.fold_scores.iter().map(|s| fmt_f64(*s)));
                row
            })
            .collect();
        log.write(&config.out_dir, names::CV_RESULTS, &csv_document(&header, &rows))?;
    }

    let mut entries = Vec::new();
    let mut svr_config = None;
    let mut notes = Vec::new();
    for t in &trained {
        if let Some(cfg) = &t.chosen_config {
            svr_config = Some(cfg.clone());
        }
        match (&t.model, &t.error) {
            (Some(model), _) => {
                let rel = format!("{}/{}.json", names::MODELS_DIR, t.name);
                let doc = ModelDocument::new(model.clone());
                log.write(&config.out_dir, &rel, &doc.to_json()?)?;
                if !model.converged() {
                    notes.push(format!("train: {} did not converge", t.name));
                }
                entries.push(TrainedEntry {
                    name: t.name.clone(),
                    file: Some(rel),
                    error: None,
                });
            }
            (None, err) => {
                notes.push(format!(
                    "train: {} failed: {}",
                    t.name,
                    err.clone().unwrap_or_default()
                ));
                entries.push(TrainedEntry {
                    name: t.name.clone(),
                    file: None,
                    error: err.clone(),
                });
            }
        }
    }

    let meta = TrainMeta {
        selected_features: selected,
        feature_scaler,
        target_scaler,
        svr_config,
        trained: entries,
        specs,
    };
    log.write(
        &config.out_dir,
        names::TRAIN_META,
        &serde_json::to_string_pretty(&meta)?,
    )?;
    Ok(StageOutcome { log, notes })
}

// --- stage: evaluate / report ------------------------------------------------

fn stage_evaluate(config: &PipelineConfig) -> Result<StageOutcome> {
    let mut log = OutputLog::default();
    let (table, split) = read_state(config)?;
    let meta_path = config.out_dir.join(names::TRAIN_META);
    let meta: TrainMeta = serde_json::from_str(&read_to_string(&meta_path)?)?;

    let cols = selected_columns(&table, &meta.selected_features)?;
    let x_test = table
        .values
        .select_columns(&cols)
        .select_rows(&split.test_indices);
    let x_test_scaled = meta.feature_scaler.transform(&x_test)?;
    let test_y: Vec<f64> = split.test_indices.iter().map(|&i| table.target[i]).collect();

    let mut trained = Vec::new();
    for entry in &meta.trained {
        let model = match &entry.file {
            Some(rel) => {
                let path = config.out_dir.join(rel);
                Some(ModelDocument::from_json(&read_to_string(&path)?)?.model)
            }
            None => None,
        };
        trained.push(TrainedModel {
            name: entry.name.clone(),
            model,
            error: entry.error.clone(),
            cv_results: Vec::new(),
            chosen_config: None,
        });
    }

    let comparisons = evaluate_models(&trained, &x_test_scaled, &test_y, &meta.target_scaler)?;
    let rows = comparison_rows(&comparisons);
    log.write(
        &config.out_dir,
        names::COMPARISON,
        &csv_document(
            &["model", "mae", "mse", "rmse", "r2", "scale", "converged", "error"],
            &rows,
        ),
    )?;
    Ok(StageOutcome { log, notes: Vec::new() })
}

fn comparison_rows(comparisons: &[ModelComparison]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    let report_row = |name: &str, r: &EvalReport, converged: bool| -> Vec<String> {
        vec![
            name.to_string(),
            fmt_f64(r.mae),
            fmt_f64(r.mse),
            fmt_f64(r.rmse),
            fmt_f64(r.r2),
            match r.scale {
                crate::eval::Scale::Standardized => "standardized".to_string(),
                crate::eval::Scale::Raw => "raw".to_string(),
            },
            converged.to_string(),
            String::new(),
        ]
    };
    for c in comparisons {
        match (&c.standardized, &c.raw) {
            (Some(std_report), Some(raw_report)) => {
                rows.push(report_row(&c.model_name, std_report, c.converged));
                rows.push(report_row(&c.model_name, raw_report, c.converged));
            }
            _ => rows.push(vec![
                c.model_name.clone(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                "false".to_string(),
                c.error.clone().unwrap_or_default().replace(',', ";"),
            ]),
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_are_valid_once_paths_are_set() {
        let config = PipelineConfig {
            data_path: PathBuf::from("x.csv"),
            out_dir: PathBuf::from("out"),
            ..PipelineConfig::default()
        };
        config.validate().unwrap();
        assert_eq!(config.seed, 42);
        assert_eq!(config.top_k, 30);
        assert_eq!(config.train_fraction, 0.8);
        assert_eq!(config.cluster_threshold, 0.3);
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let text = r#"{"data_path": "x.csv", "out_dir": "o", "zeed": 1}"#;
        assert!(serde_json::from_str::<PipelineConfig>(text).is_err());
    }

    #[test]
    fn unknown_model_names_are_rejected() {
        let config = PipelineConfig {
            data_path: PathBuf::from("x.csv"),
            out_dir: PathBuf::from("out"),
            models: vec!["svr".to_string(), "mystery".to_string()],
            ..PipelineConfig::default()
        };
        let err = config.validate().unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn missing_upstream_artifact_is_reported() {
        let dir = std::env::temp_dir().join(format!("fp_missing_{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        let config = PipelineConfig {
            data_path: PathBuf::from("unused.csv"),
            out_dir: dir.clone(),
            ..PipelineConfig::default()
        };
        let err = run_stage(&config, Stage::Select).unwrap_err();
        match &err {
            Error::StageFailed { stage, source } => {
                assert_eq!(*stage, "select");
                assert!(matches!(**source, Error::MissingArtifact { .. }));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(err.exit_code(), 3);
        let _ = std::fs::remove_dir_all(&dir);
    }
}
