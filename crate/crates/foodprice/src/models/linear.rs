//! Ordinary least squares and ridge regression.

use crate::error::{Error, Result};
use crate::linalg::{dot, least_squares, solve_dense, Matrix};

/// Linear predictor `f(x) = w . x + b`; `regularization` is the ridge
/// penalty used at fit time (0 for OLS).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub regularization: f64,
}

impl LinearModel {
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.cols() != self.weights.len() {
            return Err(x.shape_error(&format!("{} columns", self.weights.len())));
        }
        Ok((0..x.rows())
            .map(|i| dot(x.row(i), &self.weights) + self.bias)
            .collect())
    }
}

/// Least-squares fit via Householder QR on the intercept-augmented design
/// matrix. Rank deficiency is reported as a singular-design error.
pub fn fit_ols(x: &Matrix, y: &[f64]) -> Result<LinearModel> {
    let n = x.rows();
    let m = x.cols();
    if y.len() != n {
        return Err(x.shape_error(&format!("{} target values", y.len())));
    }
    if n < m + 1 {
        return Err(Error::TooFewSamples {
            context: "fit_ols",
            needed: m + 1,
            got: n,
        });
    }
    let mut design = Matrix::zeros(n, m + 1);
    for i in 0..n {
        design.set(i, 0, 1.0);
        for j in 0..m {
            design.set(i, j + 1, x.get(i, j));
        }
    }
    let coeffs = least_squares(&design, y).map_err(|e| match e {
        // Column 0 of the design is the intercept.
        Error::SingularDesign { column } => Error::SingularDesign {
            column: column.saturating_sub(1),
        },
        other => other,
    })?;
    Ok(LinearModel {
        weights: coeffs[1..].to_vec(),
        bias: coeffs[0],
        regularization: 0.0,
    })
}

/// Ridge regression with an unpenalized intercept: the solution of
/// `(Xc' Xc + lambda I) w = Xc' yc` on column-centered data, with
/// `bias = mean(y) - mean_x . w`.
pub fn fit_ridge(x: &Matrix, y: &[f64], lambda: f64) -> Result<LinearModel> {
    let n = x.rows();
    let m = x.cols();
    if y.len() != n {
        return Err(x.shape_error(&format!("{} target values", y.len())));
    }
    if n < 2 {
        return Err(Error::TooFewSamples {
            context: "fit_ridge",
            needed: 2,
            got: n,
        });
    }
    if lambda < 0.0 {
        return Err(Error::InvalidParam(format!(
            "ridge lambda must be >= 0, got {lambda}"
        )));
    }
    let mean_x: Vec<f64> = (0..m)
        .map(|j| x.column(j).iter().sum::<f64>() / n as f64)
        .collect();
    let mean_y = y.iter().sum::<f64>() / n as f64;

    let mut gram = Matrix::zeros(m, m);
    let mut rhs = vec![0.0; m];
    for i in 0..n {
        let row = x.row(i);
        let yc = y[i] - mean_y;
        for a in 0..m {
            let da = row[a] - mean_x[a];
            rhs[a] += da * yc;
            for b in a..m {
                let v = gram.get(a, b) + da * (row[b] - mean_x[b]);
                gram.set(a, b, v);
                if a != b {
                    gram.set(b, a, v);
                }
            }
        }
    }
    for j in 0..m {
        gram.set(j, j, gram.get(j, j) + lambda);
    }
    let weights = solve_dense(gram, rhs)?;
    let bias = mean_y - dot(&mean_x, &weights);
    Ok(LinearModel {
        weights,
        bias,
        regularization: lambda,
    })
}
