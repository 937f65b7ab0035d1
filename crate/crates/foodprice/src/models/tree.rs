//! Greedy CART regression tree.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::Rng;

/// Tree node; children reference indices into [`TreeModel::nodes`].
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// A fitted regression tree. Node 0 is the root; every leaf predicts the
/// mean target of its training rows.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TreeModel {
    pub nodes: Vec<Node>,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub n_features: usize,
}

impl TreeModel {
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.cols() != self.n_features {
            return Err(x.shape_error(&format!("{} columns", self.n_features)));
        }
        Ok((0..x.rows()).map(|i| self.predict_row(x.row(i))).collect())
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut node = 0;
        loop {
            match &self.nodes[node] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match &nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Greedy CART fit: each split minimizes the summed child SSE (equivalently
/// maximizes variance reduction) over midpoint thresholds of consecutive
/// sorted unique values. Ties resolve to the lower feature index, then the
/// lower threshold. Growth stops at `max_depth`, when a node has fewer than
/// `2 * min_leaf` rows, or when no split reduces the SSE.
pub fn fit_tree(x: &Matrix, y: &[f64], max_depth: usize, min_leaf: usize) -> Result<TreeModel> {
    let indices: Vec<usize> = (0..x.rows()).collect();
    grow(x, y, &indices, max_depth, min_leaf, None, x.cols())
}

/// Tree fit over a row subset with optional per-split feature sampling
/// (`mtry` features per split drawn from `rng`); used by the forest.
pub(crate) fn grow(
    x: &Matrix,
    y: &[f64],
    indices: &[usize],
    max_depth: usize,
    min_leaf: usize,
    mut rng: Option<&mut Rng>,
    mtry: usize,
) -> Result<TreeModel> {
    if min_leaf == 0 {
        return Err(Error::InvalidParam("min_leaf must be >= 1".to_string()));
    }
    if y.len() != x.rows() {
        return Err(x.shape_error(&format!("{} target values", y.len())));
    }
    if indices.len() < 2 * min_leaf {
        return Err(Error::TooFewSamples {
            context: "fit_tree",
            needed: 2 * min_leaf,
            got: indices.len(),
        });
    }
    let mut nodes = Vec::new();
    build(
        x,
        y,
        indices,
        0,
        max_depth,
        min_leaf,
        &mut rng,
        mtry,
        &mut nodes,
    );
    Ok(TreeModel {
        nodes,
        max_depth,
        min_leaf,
        n_features: x.cols(),
    })
}

fn sse(sum: f64, sum_sq: f64, n: f64) -> f64 {
    (sum_sq - sum * sum / n).max(0.0)
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    children_sse: f64,
}

#[allow(clippy::too_many_arguments)]
fn build(
    x: &Matrix,
    y: &[f64],
    indices: &[usize],
    depth: usize,
    max_depth: usize,
    min_leaf: usize,
    rng: &mut Option<&mut Rng>,
    mtry: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let n = indices.len();
    let targets: Vec<f64> = indices.iter().map(|&i| y[i]).collect();
    let sum: f64 = targets.iter().sum();
    let mean = sum / n as f64;

    let make_leaf = |nodes: &mut Vec<Node>| {
        nodes.push(Node::Leaf { value: mean });
        nodes.len() - 1
    };

    let all_equal = targets.iter().all(|&v| v == targets[0]);
    if depth >= max_depth || n < 2 * min_leaf || all_equal {
        return make_leaf(nodes);
    }

    let m = x.cols();
    let candidates: Vec<usize> = match rng {
        Some(r) if mtry < m => {
            let mut pool: Vec<usize> = (0..m).collect();
            for t in 0..mtry {
                let j = t + r.next_below((m - t) as u64) as usize;
                pool.swap(t, j);
            }
            let mut subset = pool[..mtry].to_vec();
            subset.sort_unstable();
            subset
        }
        _ => (0..m).collect(),
    };

    let sum_sq: f64 = targets.iter().map(|v| v * v).sum();
    let parent_sse = sse(sum, sum_sq, n as f64);

    let mut best: Option<BestSplit> = None;
    for &feature in &candidates {
        let mut order: Vec<(f64, f64)> = indices
            .iter()
            .map(|&i| (x.get(i, feature), y[i]))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut left_sum = 0.0;
        let mut left_sq = 0.0;
        for p in 1..n {
            left_sum += order[p - 1].1;
            left_sq += order[p - 1].1 * order[p - 1].1;
            // Splits only between distinct values.
            if order[p - 1].0 == order[p].0 {
                continue;
            }
            if p < min_leaf || n - p < min_leaf {
                continue;
            }
            let children = sse(left_sum, left_sq, p as f64)
                + sse(sum - left_sum, sum_sq - left_sq, (n - p) as f64);
            if best.as_ref().is_none_or(|b| children < b.children_sse) {
                best = Some(BestSplit {
                    feature,
                    threshold: 0.5 * (order[p - 1].0 + order[p].0),
                    children_sse: children,
                });
            }
        }
    }

    let Some(split) = best else {
        return make_leaf(nodes);
    };
    if parent_sse - split.children_sse <= 0.0 {
        return make_leaf(nodes);
    }

    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
        .iter()
        .partition(|&&i| x.get(i, split.feature) <= split.threshold);

    let id = nodes.len();
    nodes.push(Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: 0,
        right: 0,
    });
    let left = build(x, y, &left_idx, depth + 1, max_depth, min_leaf, rng, mtry, nodes);
    let right = build(x, y, &right_idx, depth + 1, max_depth, min_leaf, rng, mtry, nodes);
    if let Node::Split {
        left: l, right: r, ..
    } = &mut nodes[id]
    {
        *l = left;
        *r = right;
    }
    id
}
