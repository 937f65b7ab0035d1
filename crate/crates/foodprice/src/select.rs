//! Correlation-matrix construction, agglomerative feature clustering,
//! cluster representatives, and top-K extraction by F-score.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::stats::{f_score, pearson, FeatureScore};

/// Symmetric feature-correlation matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    pub r: Matrix,
}

impl CorrelationMatrix {
    pub fn size(&self) -> usize {
        self.names.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.r.get(i, j)
    }
}

/// Pairwise Pearson correlations of the columns of `x`. The upper triangle
/// is computed once and mirrored, so symmetry is exact.
pub fn correlation_matrix(x: &Matrix, names: &[String]) -> Result<CorrelationMatrix> {
    assert_eq!(x.cols(), names.len());
    let m = names.len();
    let columns: Vec<Vec<f64>> = (0..m).map(|j| x.column(j)).collect();
    let mut r = Matrix::zeros(m, m);
    for i in 0..m {
        r.set(i, i, 1.0);
        for j in i + 1..m {
            let v = pearson(&columns[i], &columns[j]).map_err(|e| match e {
                Error::ZeroVariance { name } => Error::ZeroVariance {
                    name: if name == "first series" {
                        names[i].clone()
                    } else {
                        names[j].clone()
                    },
                },
                other => other,
            })?;
            r.set(i, j, v);
            r.set(j, i, v);
        }
    }
    Ok(CorrelationMatrix {
        names: names.to_vec(),
        r,
    })
}

/// Feature-to-cluster assignment over a correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterMap {
    pub names: Vec<String>,
    /// Cluster id per feature index; ids are contiguous from 0, ordered by
    /// each cluster's smallest member index.
    pub assignment: Vec<usize>,
    /// Representative feature name per cluster id.
    pub representatives: Vec<String>,
    pub threshold: f64,
}

impl ClusterMap {
    pub fn n_clusters(&self) -> usize {
        self.representatives.len()
    }

    /// Member feature indices of a cluster, ascending.
    pub fn members(&self, cluster: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == cluster)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Average-linkage agglomerative clustering on the distance
/// `d(i, j) = 1 - |r_ij|`. Merging continues while the smallest pairwise
/// cluster distance stays at or below `threshold`; ties pick the earliest
/// pair in (smallest-member, smallest-member) order. Cluster-to-cluster
/// distances are maintained with the Lance–Williams average-linkage
/// update, which is exact.
pub fn cluster_features(corr: &CorrelationMatrix, threshold: f64) -> Result<ClusterMap> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidParam(format!(
            "cluster threshold must be in (0,1), got {threshold}"
        )));
    }
    let m = corr.size();
    // Active clusters stay sorted by smallest member index throughout:
    // merging pair (i, j) with i < j keeps the merged cluster at slot i.
    let mut members: Vec<Vec<usize>> = (0..m).map(|i| vec![i]).collect();
    let mut dist: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| 1.0 - corr.get(i, j).abs()).collect())
        .collect();

    while members.len() > 1 {
        let mut best = f64::INFINITY;
        let mut pair = (0, 0);
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                if dist[i][j] < best {
                    best = dist[i][j];
                    pair = (i, j);
                }
            }
        }
        if best > threshold {
            break;
        }
        let (i, j) = pair;
        let (wi, wj) = (members[i].len() as f64, members[j].len() as f64);
        for k in 0..members.len() {
            if k == i || k == j {
                continue;
            }
            let merged = (wi * dist[i][k] + wj * dist[j][k]) / (wi + wj);
            dist[i][k] = merged;
            dist[k][i] = merged;
        }
        let absorbed = members.remove(j);
        members[i].extend(absorbed);
        dist.remove(j);
        for row in &mut dist {
            row.remove(j);
        }
    }

    let mut assignment = vec![0usize; m];
    let mut representatives = Vec::with_capacity(members.len());
    for (cluster_id, cluster) in members.iter().enumerate() {
        for &feature in cluster {
            assignment[feature] = cluster_id;
        }
        let smallest = *cluster.iter().min().expect("non-empty cluster");
        representatives.push(corr.names[smallest].clone());
    }
    Ok(ClusterMap {
        names: corr.names.clone(),
        assignment,
        representatives,
        threshold,
    })
}

/// Picks each cluster's representative: the member with the largest mean
/// |r| to the other members, singletons representing themselves and exact
/// ties resolved by lexicographically smaller name.
pub fn choose_representatives(clusters: &ClusterMap, corr: &CorrelationMatrix) -> ClusterMap {
    assert_eq!(clusters.names, corr.names);
    let mut out = clusters.clone();
    for cluster_id in 0..clusters.n_clusters() {
        let members = clusters.members(cluster_id);
        let best = members
            .iter()
            .map(|&i| {
                let mean_abs = if members.len() == 1 {
                    1.0
                } else {
                    members
                        .iter()
                        .filter(|&&j| j != i)
                        .map(|&j| corr.get(i, j).abs())
                        .sum::<f64>()
                        / (members.len() - 1) as f64
                };
                (mean_abs, &corr.names[i])
            })
            .reduce(|acc, cur| {
                if cur.0 > acc.0 || (cur.0 == acc.0 && cur.1 < acc.1) {
                    cur
                } else {
                    acc
                }
            })
            .expect("non-empty cluster");
        out.representatives[cluster_id] = best.1.clone();
    }
    out
}

/// Top-K extraction result.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    /// Selected feature names, descending F-value.
    pub selected: Vec<String>,
    /// Scores for every candidate, in rank order.
    pub scores: Vec<FeatureScore>,
    pub k: usize,
}

/// Scores each candidate feature against the target and keeps the
/// `min(k, |reps|)` with the largest F-values. Ties sort by name.
pub fn select_top_k(
    x: &Matrix,
    names: &[String],
    y: &[f64],
    reps: &[String],
    k: usize,
) -> Result<SelectionResult> {
    if k == 0 {
        return Err(Error::InvalidParam("top-k must be >= 1".to_string()));
    }
    let mut scored: Vec<(String, crate::stats::Association)> = Vec::with_capacity(reps.len());
    for rep in reps {
        let col = names
            .iter()
            .position(|n| n == rep)
            .ok_or_else(|| Error::Config(format!("unknown feature {rep:?}")))?;
        let assoc = f_score(&x.column(col), y).map_err(|e| match e {
            Error::ZeroVariance { .. } => Error::ZeroVariance { name: rep.clone() },
            other => other,
        })?;
        scored.push((rep.clone(), assoc));
    }
    scored.sort_by(|a, b| {
        b.1.f_value
            .total_cmp(&a.1.f_value)
            .then_with(|| a.0.cmp(&b.0))
    });
    let scores: Vec<FeatureScore> = scored
        .iter()
        .enumerate()
        .map(|(idx, (name, assoc))| FeatureScore {
            feature: name.clone(),
            r: assoc.r,
            f_value: assoc.f_value,
            p_value: assoc.p_value,
            rank: idx + 1,
        })
        .collect();
    let selected = scores
        .iter()
        .take(k.min(scores.len()))
        .map(|s| s.feature.clone())
        .collect();
    Ok(SelectionResult {
        selected,
        scores,
        k,
    })
}
