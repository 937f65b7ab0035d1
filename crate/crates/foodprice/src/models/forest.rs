//! Random forest of CART regression trees.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::Rng;

use super::tree::{grow, TreeModel};

/// Forest training parameters.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Fraction of features considered at each split.
    pub feature_subsample: f64,
    /// When false, every tree trains on the full row set.
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: usize::MAX,
            min_leaf: 1,
            feature_subsample: 1.0 / 3.0,
            bootstrap: true,
            seed: 42,
        }
    }
}

/// Averaged ensemble of trees, reproducible from its per-tree seeds.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeModel>,
    pub bootstrap_seeds: Vec<u64>,
    pub feature_subsample: f64,
}

impl ForestModel {
    /// Arithmetic mean of the member tree predictions.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        let mut total = vec![0.0; x.rows()];
        for tree in &self.trees {
            for (acc, p) in total.iter_mut().zip(tree.predict(x)?) {
                *acc += p;
            }
        }
        let k = self.trees.len() as f64;
        Ok(total.into_iter().map(|v| v / k).collect())
    }
}

/// Fits `n_trees` trees, each on a bootstrap resample (when enabled) with
/// `max(1, round(feature_subsample * m))` candidate features per split.
/// Tree `k` uses the derived seed `derive_seed(seed, k)`, so the whole
/// ensemble is a pure function of the inputs.
pub fn fit_forest(x: &Matrix, y: &[f64], params: &ForestParams) -> Result<ForestModel> {
    if params.n_trees == 0 {
        return Err(Error::InvalidParam("n_trees must be >= 1".to_string()));
    }
    if !(params.feature_subsample > 0.0 && params.feature_subsample <= 1.0) {
        return Err(Error::InvalidParam(format!(
            "feature_subsample must be in (0,1], got {}",
            params.feature_subsample
        )));
    }
    let n = x.rows();
    let m = x.cols();
    let mtry = ((params.feature_subsample * m as f64).round() as usize).max(1);

    let mut trees = Vec::with_capacity(params.n_trees);
    let mut bootstrap_seeds = Vec::with_capacity(params.n_trees);
    for k in 0..params.n_trees {
        let tree_seed = Rng::derive_seed(params.seed, k as u64);
        let mut rng = Rng::new(tree_seed);
        let indices: Vec<usize> = if params.bootstrap {
            (0..n).map(|_| rng.next_below(n as u64) as usize).collect()
        } else {
            (0..n).collect()
        };
        let tree = grow(
            x,
            y,
            &indices,
            params.max_depth,
            params.min_leaf,
            Some(&mut rng),
            mtry,
        )?;
        trees.push(tree);
        bootstrap_seeds.push(tree_seed);
    }
    Ok(ForestModel {
        trees,
        bootstrap_seeds,
        feature_subsample: params.feature_subsample,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::fit_tree;
    use crate::rng::Rng;

    fn noisy_linear(n: usize, seed: u64) -> (Matrix, Vec<f64>) {
        let mut rng = Rng::new(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.next_normal(), rng.next_normal()])
            .collect();
        let x = Matrix::from_rows(&rows);
        let y: Vec<f64> = (0..n)
            .map(|i| 1.5 * x.get(i, 0) - 0.7 * x.get(i, 1) + 0.3 * rng.next_normal())
            .collect();
        (x, y)
    }

    #[test]
    fn single_unsampled_tree_reduces_to_fit_tree() {
        let (x, y) = noisy_linear(40, 1);
        let params = ForestParams {
            n_trees: 1,
            max_depth: 4,
            min_leaf: 2,
            feature_subsample: 1.0,
            bootstrap: false,
            seed: 7,
        };
        let forest = fit_forest(&x, &y, &params).unwrap();
        let tree = fit_tree(&x, &y, 4, 2).unwrap();
        assert_eq!(forest.predict(&x).unwrap(), tree.predict(&x).unwrap());
    }

    #[test]
    fn forests_are_seed_deterministic() {
        let (x, y) = noisy_linear(30, 2);
        let params = ForestParams {
            n_trees: 25,
            ..ForestParams::default()
        };
        let a = fit_forest(&x, &y, &params).unwrap();
        let b = fit_forest(&x, &y, &params).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn averaging_beats_a_single_tree_on_noise() {
        let (x, y) = noisy_linear(120, 3);
        let train: Vec<usize> = (0..90).collect();
        let test: Vec<usize> = (90..120).collect();
        let x_train = x.select_rows(&train);
        let y_train: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        let x_test = x.select_rows(&test);
        let y_test: Vec<f64> = test.iter().map(|&i| y[i]).collect();

        let tree = fit_tree(&x_train, &y_train, usize::MAX, 1).unwrap();
        let params = ForestParams {
            n_trees: 200,
            feature_subsample: 0.5,
            ..ForestParams::default()
        };
        let forest = fit_forest(&x_train, &y_train, &params).unwrap();

        let mse = |pred: &[f64]| -> f64 {
            pred.iter()
                .zip(&y_test)
                .map(|(p, t)| (p - t) * (p - t))
                .sum::<f64>()
                / y_test.len() as f64
        };
        let tree_mse = mse(&tree.predict(&x_test).unwrap());
        let forest_mse = mse(&forest.predict(&x_test).unwrap());
        assert!(
            forest_mse <= tree_mse,
            "forest {forest_mse} vs tree {tree_mse}"
        );
    }
}
