//! Gradient boosting with squared-error loss.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

use super::tree::{fit_tree, TreeModel};

/// Boosted ensemble: `f(x) = init_value + learning_rate * sum tree_k(x)`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GbmModel {
    pub init_value: f64,
    pub trees: Vec<TreeModel>,
    pub learning_rate: f64,
    pub rounds: usize,
}

impl GbmModel {
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        let mut pred = vec![self.init_value; x.rows()];
        for tree in &self.trees {
            for (acc, p) in pred.iter_mut().zip(tree.predict(x)?) {
                *acc += self.learning_rate * p;
            }
        }
        Ok(pred)
    }
}

/// Boosting on squared error: starting from the target mean, each round
/// fits a tree to the current residuals and adds it with shrinkage.
pub fn fit_gbm(
    x: &Matrix,
    y: &[f64],
    rounds: usize,
    learning_rate: f64,
    max_depth: usize,
    min_leaf: usize,
) -> Result<GbmModel> {
    if !(learning_rate > 0.0 && learning_rate <= 1.0) {
        return Err(Error::InvalidParam(format!(
            "learning_rate must be in (0,1], got {learning_rate}"
        )));
    }
    if y.len() != x.rows() {
        return Err(x.shape_error(&format!("{} target values", y.len())));
    }
    if y.is_empty() {
        return Err(Error::TooFewSamples {
            context: "fit_gbm",
            needed: 1,
            got: 0,
        });
    }
    let init_value = y.iter().sum::<f64>() / y.len() as f64;
    let mut pred = vec![init_value; y.len()];
    let mut trees = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let residual: Vec<f64> = y.iter().zip(&pred).map(|(t, p)| t - p).collect();
        let tree = fit_tree(x, &residual, max_depth, min_leaf)?;
        for (p, correction) in pred.iter_mut().zip(tree.predict(x)?) {
            *p += learning_rate * correction;
        }
        trees.push(tree);
    }
    Ok(GbmModel {
        init_value,
        trees,
        learning_rate,
        rounds,
    })
}
