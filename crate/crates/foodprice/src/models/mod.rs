//! Six regression engines behind one train/predict contract: OLS, ridge,
//! CART regression tree, random forest, gradient boosting, and epsilon-SVR
//! with kernels solved by an SMO-style dual optimizer.

mod forest;
mod gbm;
mod kernel;
mod linear;
mod svr;
mod tree;

pub use forest::{fit_forest, ForestModel, ForestParams};
pub use gbm::{fit_gbm, GbmModel};
pub use kernel::{gram, KernelKind, KernelSpec};
pub use linear::{fit_ols, fit_ridge, LinearModel};
pub use svr::{fit_svr, SvrModel, SvrParams};
pub use tree::{fit_tree, TreeModel};

use crate::error::Result;
use crate::linalg::Matrix;

/// A trained model of any of the six kinds, sharing one predict contract.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegressionModel {
    Linear(LinearModel),
    Ridge(LinearModel),
    DecisionTree(TreeModel),
    RandomForest(ForestModel),
    GradientBoosting(GbmModel),
    Svr(SvrModel),
}

impl RegressionModel {
    /// One prediction per row; pure and deterministic.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        match self {
            RegressionModel::Linear(m) | RegressionModel::Ridge(m) => m.predict(x),
            RegressionModel::DecisionTree(m) => m.predict(x),
            RegressionModel::RandomForest(m) => m.predict(x),
            RegressionModel::GradientBoosting(m) => m.predict(x),
            RegressionModel::Svr(m) => m.predict(x),
        }
    }

    /// Stable identifier used in artifacts and the CLI.
    pub fn name(&self) -> &'static str {
        match self {
            RegressionModel::Linear(_) => "linear",
            RegressionModel::Ridge(_) => "ridge",
            RegressionModel::DecisionTree(_) => "decision_tree",
            RegressionModel::RandomForest(_) => "random_forest",
            RegressionModel::GradientBoosting(_) => "gradient_boosting",
            RegressionModel::Svr(_) => "svr",
        }
    }

    /// False only for an SVR fit that stopped on its update budget.
    pub fn converged(&self) -> bool {
        match self {
            RegressionModel::Svr(m) => m.converged,
            _ => true,
        }
    }
}

/// Versioned serialization wrapper for model artifacts.
#[derive(Debug, serde::Serialize, serde::Deserialize)]
pub struct ModelDocument {
    pub version: u32,
    #[serde(flatten)]
    pub model: RegressionModel,
}

impl ModelDocument {
    pub const CURRENT_VERSION: u32 = 1;

    pub fn new(model: RegressionModel) -> Self {
        ModelDocument {
            version: Self::CURRENT_VERSION,
            model,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
