//! K-fold cross-validation, grid search over SVR hyperparameters, the
//! MAE/MSE/RMSE/R² metric suite, and the six-model comparison.

use crate::error::{Error, Result};
use crate::ingest::{Scaler, SplitData};
use crate::linalg::Matrix;
use crate::models::{
    fit_forest, fit_gbm, fit_ols, fit_ridge, fit_svr, fit_tree, ForestParams, KernelKind,
    KernelSpec, RegressionModel, SvrParams,
};
use crate::rng::Rng;

/// Fold assignment for n rows: a seeded shuffle cut into contiguous blocks
/// whose sizes differ by at most one.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FoldPlan {
    pub n: usize,
    pub k: usize,
    /// Fold id per row index.
    pub assignment: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    pub fn fold_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.n).filter(|&i| self.assignment[i] == fold).collect()
    }
}

pub fn kfold(n: usize, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 || k > n {
        return Err(Error::InvalidFolds { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    Rng::new(seed).shuffle(&mut order);
    let base = n / k;
    let extra = n % k; // first `extra` folds take one more row
    let mut assignment = vec![0usize; n];
    let mut cursor = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        for _ in 0..size {
            assignment[order[cursor]] = fold;
            cursor += 1;
        }
    }
    Ok(FoldPlan {
        n,
        k,
        assignment,
        seed,
    })
}

/// Trains on each fold's complement and returns the k validation MSEs in
/// fold order.
pub fn cross_validate(
    x: &Matrix,
    y: &[f64],
    folds: &FoldPlan,
    trainer: &dyn Fn(&Matrix, &[f64]) -> Result<RegressionModel>,
) -> Result<Vec<f64>> {
    if folds.n != x.rows() {
        return Err(x.shape_error(&format!("{} rows", folds.n)));
    }
    let mut scores = Vec::with_capacity(folds.k);
    for fold in 0..folds.k {
        let run = || -> Result<f64> {
            let val_idx = folds.fold_indices(fold);
            let train_idx: Vec<usize> =
                (0..folds.n).filter(|i| folds.assignment[*i] != fold).collect();
            let model = trainer(&x.select_rows(&train_idx), &gather(y, &train_idx))?;
            let pred = model.predict(&x.select_rows(&val_idx))?;
            let truth = gather(y, &val_idx);
            Ok(pred
                .iter()
                .zip(&truth)
                .map(|(p, t)| (p - t) * (p - t))
                .sum::<f64>()
                / truth.len() as f64)
        };
        scores.push(run().map_err(|e| Error::FoldFailed {
            fold,
            source: Box::new(e),
        })?);
    }
    Ok(scores)
}

fn gather(y: &[f64], idx: &[usize]) -> Vec<f64> {
    idx.iter().map(|&i| y[i]).collect()
}

/// Hyperparameter grid for the SVR search. Values are sorted ascending and
/// deduplicated on validation; enumeration order is kernels, then C, then
/// epsilon, then gamma (gamma collapses for the linear kernel).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperGrid {
    pub c_values: Vec<f64>,
    pub epsilon_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
    pub kernels: Vec<KernelKind>,
}

impl Default for HyperGrid {
    fn default() -> Self {
        HyperGrid {
            c_values: vec![0.1, 1.0, 10.0, 100.0],
            epsilon_values: vec![0.01, 0.1, 0.5],
            gamma_values: vec![0.01, 0.1, 1.0],
            kernels: vec![KernelKind::Linear, KernelKind::Rbf],
        }
    }
}

impl HyperGrid {
    pub fn validated(mut self) -> Result<Self> {
        if self.c_values.is_empty()
            || self.epsilon_values.is_empty()
            || self.gamma_values.is_empty()
            || self.kernels.is_empty()
        {
            return Err(Error::InvalidParam("empty hyperparameter grid".to_string()));
        }
        if self.c_values.iter().any(|&c| c <= 0.0) {
            return Err(Error::InvalidParam("grid C values must be > 0".to_string()));
        }
        if self.epsilon_values.iter().any(|&e| e < 0.0) {
            return Err(Error::InvalidParam("grid epsilon values must be >= 0".to_string()));
        }
        if self.gamma_values.iter().any(|&g| g <= 0.0) {
            return Err(Error::InvalidParam("grid gamma values must be > 0".to_string()));
        }
        for list in [
            &mut self.c_values,
            &mut self.epsilon_values,
            &mut self.gamma_values,
        ] {
            list.sort_by(f64::total_cmp);
            list.dedup();
        }
        let mut kernels = Vec::new();
        for k in self.kernels.drain(..) {
            if !kernels.contains(&k) {
                kernels.push(k);
            }
        }
        self.kernels = kernels;
        Ok(self)
    }

    /// All configurations in enumeration order.
    pub fn configs(&self) -> Result<Vec<SvrConfig>> {
        let mut out = Vec::new();
        for &kind in &self.kernels {
            let gammas: &[f64] = match kind {
                KernelKind::Linear => &[1.0], // ignored by the kernel
                _ => &self.gamma_values,
            };
            for &c in &self.c_values {
                for &epsilon in &self.epsilon_values {
                    for &gamma in gammas {
                        out.push(SvrConfig {
                            kernel: KernelSpec::of_kind(kind, gamma)?,
                            c,
                            epsilon,
                        });
                    }
                }
            }
        }
        Ok(out)
    }
}

/// One point of the SVR grid.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SvrConfig {
    pub kernel: KernelSpec,
    pub c: f64,
    pub epsilon: f64,
}

impl SvrConfig {
    pub fn to_params(&self) -> SvrParams {
        SvrParams::new(self.c, self.epsilon, self.kernel.clone())
    }
}

/// Cross-validation outcome for one grid configuration.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CvResult {
    pub config: SvrConfig,
    pub fold_scores: Vec<f64>,
    pub mean_score: f64,
    pub rank: usize,
    /// False when any fold fit stopped on its update budget.
    pub converged: bool,
}

/// Evaluates every grid configuration by k-fold CV (validation MSE) and
/// returns the winner plus all results sorted by rank. Ties keep grid
/// enumeration order.
pub fn grid_search(
    x: &Matrix,
    y: &[f64],
    grid: &HyperGrid,
    folds: &FoldPlan,
) -> Result<(SvrConfig, Vec<CvResult>)> {
    let configs = grid.clone().validated()?.configs()?;
    let mut results: Vec<CvResult> = Vec::with_capacity(configs.len());
    for config in configs {
        let all_converged = std::cell::Cell::new(true);
        let params = config.to_params();
        let trainer = |xs: &Matrix, ys: &[f64]| -> Result<RegressionModel> {
            let model = fit_svr(xs, ys, &params)?;
            if !model.converged {
                all_converged.set(false);
            }
            Ok(RegressionModel::Svr(model))
        };
        let fold_scores = cross_validate(x, y, folds, &trainer)?;
        let mean_score = fold_scores.iter().sum::<f64>() / fold_scores.len() as f64;
        results.push(CvResult {
            config,
            fold_scores,
            mean_score,
            rank: 0,
            converged: all_converged.get(),
        });
    }
    // Stable sort keeps enumeration order among exact ties.
    results.sort_by(|a, b| a.mean_score.total_cmp(&b.mean_score));
    for (i, r) in results.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    Ok((results[0].config.clone(), results))
}

/// Which target units a report is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Standardized,
    Raw,
}

/// MAE / MSE / RMSE / R² of one prediction vector.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EvalReport {
    pub model_name: String,
    pub mae: f64,
    pub mse: f64,
    pub rmse: f64,
    pub r2: f64,
    pub scale: Scale,
}

pub fn evaluate(
    model_name: &str,
    y_true: &[f64],
    y_pred: &[f64],
    scale: Scale,
) -> Result<EvalReport> {
    if y_true.len() != y_pred.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} predictions", y_true.len()),
            got: format!("{}", y_pred.len()),
        });
    }
    if y_true.len() < 2 {
        return Err(Error::TooFewSamples {
            context: "evaluate",
            needed: 2,
            got: y_true.len(),
        });
    }
    let n = y_true.len() as f64;
    let mean = y_true.iter().sum::<f64>() / n;
    let ss_tot: f64 = y_true.iter().map(|t| (t - mean) * (t - mean)).sum();
    if ss_tot == 0.0 {
        return Err(Error::UndefinedR2);
    }
    let mut abs_sum = 0.0;
    let mut sq_sum = 0.0;
    for (t, p) in y_true.iter().zip(y_pred) {
        let e = t - p;
        abs_sum += e.abs();
        sq_sum += e * e;
    }
    let mae = abs_sum / n;
    let mse = sq_sum / n;
    Ok(EvalReport {
        model_name: model_name.to_string(),
        mae,
        mse,
        rmse: mse.sqrt(),
        r2: 1.0 - sq_sum / ss_tot,
        scale,
    })
}

/// Training recipe for one of the six engines.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    Linear,
    Ridge {
        lambda: f64,
    },
    DecisionTree {
        max_depth: usize,
        min_leaf: usize,
    },
    RandomForest(ForestParams),
    GradientBoosting {
        rounds: usize,
        learning_rate: f64,
        max_depth: usize,
        min_leaf: usize,
    },
    /// Tuned by k-fold grid search before the final fit.
    Svr {
        grid: HyperGrid,
        cv_folds: usize,
        cv_seed: u64,
    },
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Linear => "linear",
            ModelSpec::Ridge { .. } => "ridge",
            ModelSpec::DecisionTree { .. } => "decision_tree",
            ModelSpec::RandomForest(_) => "random_forest",
            ModelSpec::GradientBoosting { .. } => "gradient_boosting",
            ModelSpec::Svr { .. } => "svr",
        }
    }

    /// The six default recipes in report order.
    pub fn defaults(grid: HyperGrid, seed: u64) -> Vec<ModelSpec> {
        vec![
            ModelSpec::Svr {
                grid,
                cv_folds: 5,
                cv_seed: seed,
            },
            ModelSpec::Ridge { lambda: 1.0 },
            ModelSpec::Linear,
            ModelSpec::GradientBoosting {
                rounds: 100,
                learning_rate: 0.1,
                max_depth: 3,
                min_leaf: 1,
            },
            ModelSpec::RandomForest(ForestParams {
                seed,
                ..ForestParams::default()
            }),
            ModelSpec::DecisionTree {
                max_depth: 5,
                min_leaf: 2,
            },
        ]
    }
}

/// A trained (or failed) entry of the comparison.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub name: String,
    pub model: Option<RegressionModel>,
    pub error: Option<String>,
    /// Grid results when the model was tuned (SVR only by default).
    pub cv_results: Vec<CvResult>,
    pub chosen_config: Option<SvrConfig>,
}

/// Trains each spec on the (already standardized) training data.
/// Per-model failures are recorded, not propagated.
pub fn train_models(x: &Matrix, y_std: &[f64], specs: &[ModelSpec]) -> Vec<TrainedModel> {
    specs
        .iter()
        .map(|spec| {
            let name = spec.name().to_string();
            let mut cv_results = Vec::new();
            let mut chosen_config = None;
            let outcome: Result<RegressionModel> = (|| match spec {
                ModelSpec::Linear => Ok(RegressionModel::Linear(fit_ols(x, y_std)?)),
                ModelSpec::Ridge { lambda } => {
                    Ok(RegressionModel::Ridge(fit_ridge(x, y_std, *lambda)?))
                }
                ModelSpec::DecisionTree {
                    max_depth,
                    min_leaf,
                } => Ok(RegressionModel::DecisionTree(fit_tree(
                    x, y_std, *max_depth, *min_leaf,
                )?)),
                ModelSpec::RandomForest(params) => {
                    Ok(RegressionModel::RandomForest(fit_forest(x, y_std, params)?))
                }
                ModelSpec::GradientBoosting {
                    rounds,
                    learning_rate,
                    max_depth,
                    min_leaf,
                } => Ok(RegressionModel::GradientBoosting(fit_gbm(
                    x,
                    y_std,
                    *rounds,
                    *learning_rate,
                    *max_depth,
                    *min_leaf,
                )?)),
                ModelSpec::Svr {
                    grid,
                    cv_folds,
                    cv_seed,
                } => {
                    let folds = kfold(x.rows(), (*cv_folds).min(x.rows()), *cv_seed)?;
                    let (best, results) = grid_search(x, y_std, grid, &folds)?;
                    cv_results = results;
                    chosen_config = Some(best.clone());
                    Ok(RegressionModel::Svr(fit_svr(x, y_std, &best.to_params())?))
                }
            })();
            match outcome {
                Ok(model) => TrainedModel {
                    name,
                    model: Some(model),
                    error: None,
                    cv_results,
                    chosen_config,
                },
                Err(e) => TrainedModel {
                    name,
                    model: None,
                    error: Some(e.to_string()),
                    cv_results,
                    chosen_config,
                },
            }
        })
        .collect()
}

/// One comparison row: metrics on both target scales.
#[derive(Debug, Clone)]
pub struct ModelComparison {
    pub model_name: String,
    pub standardized: Option<EvalReport>,
    pub raw: Option<EvalReport>,
    pub converged: bool,
    pub error: Option<String>,
}

/// Evaluates trained models on the held-out rows, reporting standardized
/// and raw scales, sorted by descending R² (failed rows last).
pub fn evaluate_models(
    trained: &[TrainedModel],
    test_x: &Matrix,
    test_y_raw: &[f64],
    target_scaler: &Scaler,
) -> Result<Vec<ModelComparison>> {
    let y_std = target_scaler.transform_vec(test_y_raw)?;
    let mut rows: Vec<ModelComparison> = trained
        .iter()
        .map(|t| {
            let Some(model) = &t.model else {
                return ModelComparison {
                    model_name: t.name.clone(),
                    standardized: None,
                    raw: None,
                    converged: false,
                    error: t.error.clone(),
                };
            };
            let run = || -> Result<(EvalReport, EvalReport)> {
                let pred_std = model.predict(test_x)?;
                let pred_raw = target_scaler.inverse_transform_vec(&pred_std)?;
                Ok((
                    evaluate(&t.name, &y_std, &pred_std, Scale::Standardized)?,
                    evaluate(&t.name, test_y_raw, &pred_raw, Scale::Raw)?,
                ))
            };
            match run() {
                Ok((standardized, raw)) => ModelComparison {
                    model_name: t.name.clone(),
                    standardized: Some(standardized),
                    raw: Some(raw),
                    converged: model.converged(),
                    error: None,
                },
                Err(e) => ModelComparison {
                    model_name: t.name.clone(),
                    standardized: None,
                    raw: None,
                    converged: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        match (&a.standardized, &b.standardized) {
            (Some(x), Some(y)) => y.r2.total_cmp(&x.r2),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => std::cmp::Ordering::Equal,
        }
        .then_with(|| a.model_name.cmp(&b.model_name))
    });
    Ok(rows)
}

/// Trains every spec on the split's training rows (with the target
/// standardized by a train-fitted scaler) and evaluates on the test rows.
pub fn compare_models(split: &SplitData, specs: &[ModelSpec]) -> Result<Vec<ModelComparison>> {
    if specs.is_empty() {
        return Err(Error::InvalidParam("no model specs given".to_string()));
    }
    let target_scaler = Scaler::fit_vector(&split.train_y).map_err(|e| match e {
        Error::ZeroVariance { .. } => Error::ZeroVariance {
            name: "target".to_string(),
        },
        other => other,
    })?;
    let y_train_std = target_scaler.transform_vec(&split.train_y)?;
    let trained = train_models(&split.train_x, &y_train_std, specs);
    evaluate_models(&trained, &split.test_x, &split.test_y, &target_scaler)
}

/// Small built-in grids for the non-SVR engines, enabled by the opt-in
/// tuning flag: each candidate is scored by k-fold validation MSE and ties
/// keep enumeration order.
pub fn tune_spec(
    spec: &ModelSpec,
    x: &Matrix,
    y: &[f64],
    folds: &FoldPlan,
) -> Result<ModelSpec> {
    let candidates: Vec<ModelSpec> = match spec {
        ModelSpec::Ridge { .. } => [0.01, 0.1, 1.0, 10.0, 100.0]
            .iter()
            .map(|&lambda| ModelSpec::Ridge { lambda })
            .collect(),
        ModelSpec::DecisionTree { min_leaf, .. } => [2usize, 3, 5, 8]
            .iter()
            .map(|&max_depth| ModelSpec::DecisionTree {
                max_depth,
                min_leaf: *min_leaf,
            })
            .collect(),
        ModelSpec::RandomForest(base) => [50usize, 100, 200]
            .iter()
            .map(|&n_trees| {
                ModelSpec::RandomForest(ForestParams {
                    n_trees,
                    ..base.clone()
                })
            })
            .collect(),
        ModelSpec::GradientBoosting {
            max_depth,
            min_leaf,
            ..
        } => [(50usize, 0.1), (100, 0.05), (100, 0.1), (200, 0.05)]
            .iter()
            .map(|&(rounds, learning_rate)| ModelSpec::GradientBoosting {
                rounds,
                learning_rate,
                max_depth: *max_depth,
                min_leaf: *min_leaf,
            })
            .collect(),
        // Linear has nothing to tune; SVR is tuned by its own grid search.
        ModelSpec::Linear | ModelSpec::Svr { .. } => return Ok(spec.clone()),
    };
    let mut best: Option<(f64, ModelSpec)> = None;
    for candidate in candidates {
        let trainer = |xs: &Matrix, ys: &[f64]| -> Result<RegressionModel> {
            let trained = train_models(xs, ys, std::slice::from_ref(&candidate));
            match trained.into_iter().next().unwrap() {
                TrainedModel {
                    model: Some(m), ..
                } => Ok(m),
                TrainedModel { error, .. } => {
                    Err(Error::Config(error.unwrap_or_else(|| "training failed".into())))
                }
            }
        };
        let scores = cross_validate(x, y, folds, &trainer)?;
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        if best.as_ref().is_none_or(|(b, _)| mean < *b) {
            best = Some((mean, candidate));
        }
    }
    Ok(best.expect("non-empty candidate list").1)
}
