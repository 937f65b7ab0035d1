//! Epsilon-SVR trained by sequential minimal optimization on the dual.
//!
//! The dual is parameterized by a single coefficient vector
//! `beta_i = alpha_i - alpha_i*` (the complementarity `alpha_i alpha_i* = 0`
//! is implied by the `-epsilon |beta|` term):
//!
//! ```text
//! maximize  D(beta) = -1/2 sum_ij beta_i beta_j K_ij
//!                     - epsilon sum_i |beta_i| + sum_i y_i beta_i
//! subject to  sum_i beta_i = 0,   -C <= beta_i <= C
//! ```
//!
//! Each step picks the pair with the largest KKT violation and moves along
//! `e_i - e_j` (preserving the equality constraint) to the exact maximizer
//! of the piecewise-quadratic restriction, walking the breakpoints where
//! either coefficient crosses zero. The solver stops when the maximal
//! violation drops below `tol` or the update budget is exhausted.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

use super::kernel::{gram, KernelSpec};

/// SVR hyperparameters and solver controls.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SvrParams {
    pub c: f64,
    pub epsilon: f64,
    pub kernel: KernelSpec,
    /// KKT violation threshold for convergence.
    pub tol: f64,
    /// Pair-update budget; `None` means `10 n^2`.
    pub max_passes: Option<usize>,
}

impl SvrParams {
    pub fn new(c: f64, epsilon: f64, kernel: KernelSpec) -> Self {
        SvrParams {
            c,
            epsilon,
            kernel,
            tol: 1e-3,
            max_passes: None,
        }
    }
}

/// Trained epsilon-SVR: support rows with their dual coefficients, a bias,
/// and solver diagnostics.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SvrModel {
    pub support_indices: Vec<usize>,
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
    pub kernel: KernelSpec,
    pub c: f64,
    pub epsilon: f64,
    pub x_support: Matrix,
    /// False when the update budget ran out before reaching `tol`.
    pub converged: bool,
    /// KKT violation at the final iterate.
    pub kkt_violation: f64,
    /// Dual objective at the final iterate.
    pub dual_objective: f64,
}

impl SvrModel {
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.cols() != self.x_support.cols() {
            return Err(x.shape_error(&format!("{} columns", self.x_support.cols())));
        }
        Ok((0..x.rows())
            .map(|i| {
                let row = x.row(i);
                self.dual_coefs
                    .iter()
                    .enumerate()
                    .map(|(s, beta)| beta * self.kernel.eval(self.x_support.row(s), row))
                    .sum::<f64>()
                    + self.bias
            })
            .collect())
    }
}

pub(crate) struct Solution {
    pub beta: Vec<f64>,
    pub bias: f64,
    pub converged: bool,
    pub violation: f64,
    pub objective: f64,
    /// Dual objective after every accepted update.
    #[allow(dead_code)] // read by the monotonicity tests
    pub trace: Vec<f64>,
}

/// Directional derivative of the dual when increasing `beta_i`.
#[inline]
fn up_gain(beta: f64, g: f64, epsilon: f64) -> f64 {
    if beta >= 0.0 {
        g - epsilon
    } else {
        g + epsilon
    }
}

/// Directional derivative of the dual when decreasing `beta_i`.
#[inline]
fn down_gain(beta: f64, g: f64, epsilon: f64) -> f64 {
    if beta > 0.0 {
        -g + epsilon
    } else {
        -g - epsilon
    }
}

/// Exact maximizer of `t -> D(beta + t (e_i - e_j))` over `[0, t_max]`.
/// The restriction is concave piecewise quadratic with breakpoints where
/// either coefficient crosses zero.
fn line_search(
    beta_i: f64,
    beta_j: f64,
    g_i: f64,
    g_j: f64,
    eta: f64,
    c: f64,
    epsilon: f64,
) -> f64 {
    let t_max = (c - beta_i).min(beta_j + c);
    let mut stops: Vec<f64> = Vec::with_capacity(3);
    if beta_i < 0.0 && -beta_i < t_max {
        stops.push(-beta_i);
    }
    if beta_j > 0.0 && beta_j < t_max {
        stops.push(beta_j);
    }
    stops.sort_by(f64::total_cmp);
    stops.push(t_max);

    let mut t0 = 0.0;
    for &t1 in &stops {
        // Signs on this segment; a coefficient sitting exactly on zero is
        // about to move positive (i) or negative (j).
        let sign_i = if beta_i + t0 >= 0.0 { 1.0 } else { -1.0 };
        let sign_j = if beta_j - t0 > 0.0 { 1.0 } else { -1.0 };
        let slope_at = |t: f64| (g_i - g_j) - eta * t - epsilon * sign_i + epsilon * sign_j;
        if slope_at(t0) <= 0.0 {
            return t0;
        }
        if eta > 0.0 {
            let t_star = ((g_i - g_j) - epsilon * sign_i + epsilon * sign_j) / eta;
            if t_star <= t1 {
                return t_star.min(t_max);
            }
        }
        t0 = t1;
    }
    t_max
}

pub(crate) fn solve(
    k: &Matrix,
    y: &[f64],
    c: f64,
    epsilon: f64,
    tol: f64,
    max_updates: usize,
) -> Solution {
    let n = y.len();
    let mut beta = vec![0.0; n];
    let mut g: Vec<f64> = y.to_vec(); // g_i = y_i - (K beta)_i
    let mut objective = 0.0;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut violation = f64::INFINITY;

    for _ in 0..max_updates {
        // Top-two feasible ascent directions on each side.
        let mut up: [(f64, usize); 2] = [(f64::NEG_INFINITY, usize::MAX); 2];
        let mut down: [(f64, usize); 2] = [(f64::NEG_INFINITY, usize::MAX); 2];
        for i in 0..n {
            if beta[i] < c {
                let gain = up_gain(beta[i], g[i], epsilon);
                if gain > up[0].0 {
                    up[1] = up[0];
                    up[0] = (gain, i);
                } else if gain > up[1].0 {
                    up[1] = (gain, i);
                }
            }
            if beta[i] > -c {
                let gain = down_gain(beta[i], g[i], epsilon);
                if gain > down[0].0 {
                    down[1] = down[0];
                    down[0] = (gain, i);
                } else if gain > down[1].0 {
                    down[1] = (gain, i);
                }
            }
        }
        // Best pair with distinct indices.
        let (i, j, pair_violation) = if up[0].1 == usize::MAX || down[0].1 == usize::MAX {
            (usize::MAX, usize::MAX, f64::NEG_INFINITY)
        } else if up[0].1 != down[0].1 {
            (up[0].1, down[0].1, up[0].0 + down[0].0)
        } else {
            let via_second_down = if down[1].1 != usize::MAX {
                up[0].0 + down[1].0
            } else {
                f64::NEG_INFINITY
            };
            let via_second_up = if up[1].1 != usize::MAX {
                up[1].0 + down[0].0
            } else {
                f64::NEG_INFINITY
            };
            if via_second_down >= via_second_up {
                (up[0].1, down[1].1, via_second_down)
            } else {
                (up[1].1, down[0].1, via_second_up)
            }
        };
        violation = pair_violation;
        if violation < tol {
            converged = true;
            break;
        }

        let eta = (k.get(i, i) + k.get(j, j) - 2.0 * k.get(i, j)).max(0.0);
        let t = line_search(beta[i], beta[j], g[i], g[j], eta, c, epsilon);
        if t <= 0.0 {
            // Stalled by rounding; the recorded violation stands.
            break;
        }

        let old_i = beta[i];
        let old_j = beta[j];
        let new_i = (old_i + t).clamp(-c, c);
        let new_j = (old_j - t).clamp(-c, c);
        objective += t * (g[i] - g[j]) - 0.5 * t * t * eta
            - epsilon * (new_i.abs() - old_i.abs())
            - epsilon * (new_j.abs() - old_j.abs());
        beta[i] = new_i;
        beta[j] = new_j;
        for (idx, grad) in g.iter_mut().enumerate() {
            *grad -= t * (k.get(idx, i) - k.get(idx, j));
        }
        trace.push(objective);
    }

    // Bias from margin support points, falling back to the midpoint of the
    // KKT interval when the box holds every support vector.
    let box_tol = 1e-8 * c.max(1.0);
    let mut margin_sum = 0.0;
    let mut margin_count = 0usize;
    for i in 0..n {
        if beta[i] > box_tol && beta[i] < c - box_tol {
            margin_sum += g[i] - epsilon;
            margin_count += 1;
        } else if beta[i] < -box_tol && beta[i] > -c + box_tol {
            margin_sum += g[i] + epsilon;
            margin_count += 1;
        }
    }
    let bias = if margin_count > 0 {
        margin_sum / margin_count as f64
    } else {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for i in 0..n {
            if beta[i] < c {
                lo = lo.max(up_gain(beta[i], g[i], epsilon));
            }
            if beta[i] > -c {
                hi = hi.min(-down_gain(beta[i], g[i], epsilon));
            }
        }
        if lo.is_finite() && hi.is_finite() {
            0.5 * (lo + hi)
        } else {
            0.0
        }
    };

    // Exact objective at the final iterate (the trace is incremental).
    let mut quad = 0.0;
    for i in 0..n {
        if beta[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            quad += beta[i] * beta[j] * k.get(i, j);
        }
    }
    let exact_objective = beta
        .iter()
        .zip(y)
        .map(|(b, yi)| yi * b - epsilon * b.abs())
        .sum::<f64>()
        - 0.5 * quad;

    Solution {
        beta,
        bias,
        converged,
        violation,
        objective: exact_objective,
        trace,
    }
}

/// Fits an epsilon-SVR on pre-scaled features. Non-convergence within the
/// update budget is not fatal: the model is returned with
/// `converged = false` and the achieved violation.
pub fn fit_svr(x: &Matrix, y: &[f64], params: &SvrParams) -> Result<SvrModel> {
    if params.c <= 0.0 {
        return Err(Error::InvalidParam(format!("C must be > 0, got {}", params.c)));
    }
    if params.epsilon < 0.0 {
        return Err(Error::InvalidParam(format!(
            "epsilon must be >= 0, got {}",
            params.epsilon
        )));
    }
    let n = x.rows();
    if n < 2 {
        return Err(Error::TooFewSamples {
            context: "fit_svr",
            needed: 2,
            got: n,
        });
    }
    if y.len() != n {
        return Err(x.shape_error(&format!("{} target values", y.len())));
    }
    let k = gram(x, x, &params.kernel)?;
    let max_updates = params.max_passes.unwrap_or(10 * n * n);
    let solution = solve(&k, y, params.c, params.epsilon, params.tol, max_updates);

    let support_indices: Vec<usize> = (0..n).filter(|&i| solution.beta[i] != 0.0).collect();
    let dual_coefs: Vec<f64> = support_indices.iter().map(|&i| solution.beta[i]).collect();
    let x_support = x.select_rows(&support_indices);
    Ok(SvrModel {
        support_indices,
        dual_coefs,
        bias: solution.bias,
        kernel: params.kernel.clone(),
        c: params.c,
        epsilon: params.epsilon,
        x_support,
        converged: solution.converged,
        kkt_violation: solution.violation,
        dual_objective: solution.objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::fit_ols;
    use crate::rng::Rng;

    fn full_beta(model: &SvrModel, n: usize) -> Vec<f64> {
        let mut beta = vec![0.0; n];
        for (s, &i) in model.support_indices.iter().enumerate() {
            beta[i] = model.dual_coefs[s];
        }
        beta
    }

    #[test]
    fn flat_target_needs_no_support_vectors() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]);
        let y = vec![5.0; 4];
        let params = SvrParams::new(10.0, 0.1, KernelSpec::rbf(1.0).unwrap());
        let model = fit_svr(&x, &y, &params).unwrap();
        assert!(model.support_indices.is_empty());
        assert_eq!(model.bias, 5.0);
        assert!(model.predict(&x).unwrap().iter().all(|&p| p == 5.0));
    }

    #[test]
    fn wide_tube_swallows_the_data() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]);
        let y = vec![1.0, 1.4, 0.8, 1.2];
        // epsilon beyond half the target range.
        let params = SvrParams::new(10.0, 0.5, KernelSpec::Linear);
        let model = fit_svr(&x, &y, &params).unwrap();
        assert!(model.support_indices.is_empty());
        let pred = model.predict(&x).unwrap();
        for (p, t) in pred.iter().zip(&y) {
            assert!((p - t).abs() <= 0.5 + 1e-12);
        }
    }

    #[test]
    fn dual_feasibility_on_random_problems() {
        let mut rng = Rng::new(11);
        for trial in 0..12 {
            let n = 6 + (trial % 4);
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| vec![rng.next_normal(), rng.next_normal()])
                .collect();
            let x = Matrix::from_rows(&rows);
            let y: Vec<f64> = (0..n).map(|_| rng.next_normal()).collect();
            for (c, kernel) in [
                (1.0, KernelSpec::Linear),
                (10.0, KernelSpec::rbf(0.7).unwrap()),
                (100.0, KernelSpec::rbf(2.0).unwrap()),
            ] {
                let params = SvrParams::new(c, 0.05, kernel);
                let model = fit_svr(&x, &y, &params).unwrap();
                let beta = full_beta(&model, n);
                let total: f64 = beta.iter().sum();
                assert!(total.abs() < 1e-6, "sum beta = {total}");
                for b in &beta {
                    assert!((-c - 1e-9..=c + 1e-9).contains(b), "beta {b} outside box");
                }
            }
        }
    }

    #[test]
    fn dual_objective_never_decreases() {
        let mut rng = Rng::new(12);
        let rows: Vec<Vec<f64>> = (0..10)
            .map(|_| vec![rng.next_normal()])
            .collect();
        let x = Matrix::from_rows(&rows);
        let y: Vec<f64> = (0..10).map(|i| (i as f64 * 0.7).sin() + 0.1 * rng.next_normal()).collect();
        let k = gram(&x, &x, &KernelSpec::rbf(1.0).unwrap()).unwrap();
        let solution = solve(&k, &y, 10.0, 0.05, 1e-8, 10_000);
        assert!(solution.converged);
        for w in solution.trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "objective fell: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn kkt_classification_at_the_solution() {
        let mut rng = Rng::new(13);
        let n = 8;
        let rows: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.next_normal()]).collect();
        let x = Matrix::from_rows(&rows);
        let y: Vec<f64> = (0..n)
            .map(|i| x.get(i, 0).tanh() + 0.05 * rng.next_normal())
            .collect();
        let c = 5.0;
        let epsilon = 0.1;
        let mut params = SvrParams::new(c, epsilon, KernelSpec::rbf(0.8).unwrap());
        params.tol = 1e-8;
        params.max_passes = Some(100_000);
        let model = fit_svr(&x, &y, &params).unwrap();
        assert!(model.converged);
        let beta = full_beta(&model, n);
        let pred = model.predict(&x).unwrap();
        for i in 0..n {
            let resid = y[i] - pred[i];
            if resid.abs() < epsilon - 1e-4 {
                assert!(beta[i].abs() < 1e-6, "interior point {i} with beta {}", beta[i]);
            }
            let inside_box = beta[i].abs() > 1e-7 && beta[i].abs() < c - 1e-7;
            if inside_box {
                assert!(
                    (resid.abs() - epsilon).abs() < 1e-4,
                    "margin point {i}: |resid| = {} vs epsilon {epsilon}",
                    resid.abs()
                );
            }
        }
    }

    #[test]
    fn zero_epsilon_large_c_linear_matches_ols() {
        let mut rng = Rng::new(14);
        let rows: Vec<Vec<f64>> = (0..12)
            .map(|_| vec![rng.next_normal(), rng.next_normal()])
            .collect();
        let x = Matrix::from_rows(&rows);
        let y: Vec<f64> = (0..12)
            .map(|i| 1.2 * x.get(i, 0) - 0.4 * x.get(i, 1) + 0.25)
            .collect();
        let ols = fit_ols(&x, &y).unwrap();
        let mut params = SvrParams::new(1e6, 0.0, KernelSpec::Linear);
        params.tol = 1e-9;
        params.max_passes = Some(500_000);
        let svr = fit_svr(&x, &y, &params).unwrap();
        let svr_pred = svr.predict(&x).unwrap();
        let ols_pred = ols.predict(&x).unwrap();
        for (a, b) in svr_pred.iter().zip(&ols_pred) {
            assert!((a - b).abs() < 1e-3, "{a} vs {b}");
        }
    }

    #[test]
    fn fits_are_deterministic() {
        let mut rng = Rng::new(15);
        let rows: Vec<Vec<f64>> = (0..9).map(|_| vec![rng.next_normal()]).collect();
        let x = Matrix::from_rows(&rows);
        let y: Vec<f64> = (0..9).map(|_| rng.next_normal()).collect();
        let params = SvrParams::new(10.0, 0.1, KernelSpec::rbf(1.0).unwrap());
        let a = fit_svr(&x, &y, &params).unwrap();
        let b = fit_svr(&x, &y, &params).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn exhausted_budget_is_flagged_not_fatal() {
        let mut rng = Rng::new(16);
        let rows: Vec<Vec<f64>> = (0..10).map(|_| vec![rng.next_normal()]).collect();
        let x = Matrix::from_rows(&rows);
        let y: Vec<f64> = (0..10).map(|_| rng.next_normal()).collect();
        let mut params = SvrParams::new(10.0, 0.01, KernelSpec::rbf(1.0).unwrap());
        params.max_passes = Some(1);
        let model = fit_svr(&x, &y, &params).unwrap();
        assert!(!model.converged);
        assert!(model.kkt_violation > params.tol);
    }

    #[test]
    fn rejects_invalid_parameters() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0]]);
        let y = vec![0.0, 1.0];
        assert!(fit_svr(&x, &y, &SvrParams::new(0.0, 0.1, KernelSpec::Linear)).is_err());
        assert!(fit_svr(&x, &y, &SvrParams::new(1.0, -0.1, KernelSpec::Linear)).is_err());
    }
}
