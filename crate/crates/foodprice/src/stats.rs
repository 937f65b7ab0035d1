//! Descriptive statistics, Anderson–Darling normality screening with
//! Yeo–Johnson transforms, kernel density estimation, and univariate
//! association scores.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::special::{f_sf, normal_cdf, student_t_quantile};

/// Rejection level used by the normality screen.
pub const AD_ALPHA: f64 = 0.05;

/// Lambda grid searched by [`yeo_johnson`]: -2.0, -1.9, ..., 2.0.
pub fn yeo_johnson_grid() -> impl Iterator<Item = f64> {
    (0..=40).map(|k| k as f64 / 10.0 - 2.0)
}

fn mean(series: &[f64]) -> f64 {
    series.iter().sum::<f64>() / series.len() as f64
}

/// Sample standard deviation (divisor n-1), the convention used end to end.
fn sample_std(series: &[f64], mean: f64) -> f64 {
    let ss: f64 = series.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (series.len() as f64 - 1.0)).sqrt()
}

/// Quantile by linear interpolation between order statistics at position
/// `p * (n - 1)` (zero-based).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    debug_assert!((0.0..=1.0).contains(&p));
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = pos - lo as f64;
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}

/// Per-series descriptive summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStats {
    pub mean: f64,
    pub median: f64,
    pub std_dev: f64,
    pub iqr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
}

/// Mean, median, sample std, IQR, and a Student-t confidence interval on
/// the mean at the given confidence level.
pub fn describe(series: &[f64], confidence: f64) -> Result<SummaryStats> {
    let n = series.len();
    if n < 2 {
        return Err(Error::TooFewSamples {
            context: "describe",
            needed: 2,
            got: n,
        });
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidParam(format!(
            "confidence must be in (0,1), got {confidence}"
        )));
    }
    let mut sorted = series.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = mean(series);
    let std_dev = sample_std(series, mean);
    let median = quantile(&sorted, 0.5);
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let t = student_t_quantile(0.5 * (1.0 + confidence), (n - 1) as f64);
    let half = t * std_dev / (n as f64).sqrt();
    Ok(SummaryStats {
        mean,
        median,
        std_dev,
        iqr,
        ci_low: mean - half,
        ci_high: mean + half,
        n,
    })
}

/// Anderson–Darling statistic for normality with estimated parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdResult {
    /// Raw A² statistic.
    pub a_squared: f64,
    /// Small-sample corrected statistic A² (1 + 0.75/n + 2.25/n²).
    pub a_star: f64,
    /// P-value from the parameters-estimated piecewise approximation.
    pub p_value: f64,
}

/// P-value approximation for the corrected statistic (normality, both
/// parameters estimated).
pub fn ad_p_value(a_star: f64) -> f64 {
    let a = a_star;
    let p = if a <= 0.2 {
        1.0 - (-13.436 + 101.14 * a - 223.73 * a * a).exp()
    } else if a <= 0.34 {
        1.0 - (-8.318 + 42.796 * a - 59.938 * a * a).exp()
    } else if a < 0.6 {
        (0.9177 - 4.279 * a - 1.38 * a * a).exp()
    } else {
        (1.2937 - 5.709 * a + 0.0186 * a * a).exp()
    };
    p.clamp(0.0, 1.0)
}

/// Anderson–Darling normality test. The series is standardized with its
/// sample mean and standard deviation; CDF values are clamped away from 0
/// and 1 before the logs.
pub fn anderson_darling(series: &[f64]) -> Result<AdResult> {
    let n = series.len();
    if n < 8 {
        return Err(Error::TooFewSamples {
            context: "anderson_darling",
            needed: 8,
            got: n,
        });
    }
    let m = mean(series);
    let s = sample_std(series, m);
    if s == 0.0 {
        return Err(Error::ZeroVariance {
            name: "series".to_string(),
        });
    }
    let mut z: Vec<f64> = series.iter().map(|v| (v - m) / s).collect();
    z.sort_by(f64::total_cmp);

    const CLAMP: f64 = 1e-15;
    let n_f = n as f64;
    let mut sum = 0.0;
    for i in 0..n {
        let phi_lo = normal_cdf(z[i]).clamp(CLAMP, 1.0 - CLAMP);
        let phi_hi = normal_cdf(z[n - 1 - i]).clamp(CLAMP, 1.0 - CLAMP);
        sum += (2 * (i + 1) - 1) as f64 * (phi_lo.ln() + (1.0 - phi_hi).ln());
    }
    let a_squared = -n_f - sum / n_f;
    let a_star = a_squared * (1.0 + 0.75 / n_f + 2.25 / (n_f * n_f));
    Ok(AdResult {
        a_squared,
        a_star,
        p_value: ad_p_value(a_star),
    })
}

/// Yeo–Johnson power transform of a single value.
pub fn yeo_johnson_value(y: f64, lambda: f64) -> f64 {
    if y >= 0.0 {
        if lambda == 0.0 {
            (y + 1.0).ln()
        } else {
            ((y + 1.0).powf(lambda) - 1.0) / lambda
        }
    } else if lambda == 2.0 {
        -(1.0 - y).ln()
    } else {
        -((1.0 - y).powf(2.0 - lambda) - 1.0) / (2.0 - lambda)
    }
}

/// Transforms a series toward normality, choosing lambda on the fixed grid
/// by maximizing the Gaussian profile log-likelihood (Jacobian included).
/// Returns the transformed series and the chosen lambda.
pub fn yeo_johnson(series: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = series.len();
    if n < 8 {
        return Err(Error::TooFewSamples {
            context: "yeo_johnson",
            needed: 8,
            got: n,
        });
    }
    // Jacobian term: (lambda - 1) * sum sign(y) ln(1 + |y|).
    let jac_base: f64 = series
        .iter()
        .map(|&y| y.signum() * (1.0 + y.abs()).ln())
        .sum();
    let n_f = n as f64;

    let mut best_lambda = 1.0;
    let mut best_ll = f64::NEG_INFINITY;
    let mut best_series: Option<Vec<f64>> = None;
    for lambda in yeo_johnson_grid() {
        let transformed: Vec<f64> = series.iter().map(|&y| yeo_johnson_value(y, lambda)).collect();
        if transformed.iter().any(|v| !v.is_finite()) {
            continue;
        }
        let m = mean(&transformed);
        let var_mle: f64 =
            transformed.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n_f;
        if var_mle <= 0.0 {
            continue;
        }
        let ll = -0.5 * n_f * var_mle.ln() + (lambda - 1.0) * jac_base;
        if ll > best_ll {
            best_ll = ll;
            best_lambda = lambda;
            best_series = Some(transformed);
        }
    }
    let out = best_series.expect("lambda = 1 always yields a finite transform");
    Ok((out, best_lambda))
}

/// Kernel density estimate evaluated on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

/// Gaussian-kernel density with the Silverman bandwidth
/// `0.9 min(std, iqr/1.34) n^(-1/5)`, evaluated on `grid_size` points
/// spanning the data range plus four bandwidths on each side.
pub fn kde(series: &[f64], grid_size: usize) -> Result<DensityCurve> {
    let n = series.len();
    if n < 2 {
        return Err(Error::TooFewSamples {
            context: "kde",
            needed: 2,
            got: n,
        });
    }
    if grid_size < 16 {
        return Err(Error::InvalidParam(format!(
            "kde grid_size must be >= 16, got {grid_size}"
        )));
    }
    let m = mean(series);
    let std = sample_std(series, m);
    if std == 0.0 {
        return Err(Error::ZeroVariance {
            name: "series".to_string(),
        });
    }
    let mut sorted = series.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    // A flat middle can make the IQR zero even for non-constant data.
    let scale = if iqr > 0.0 { std.min(iqr / 1.34) } else { std };
    let bandwidth = 0.9 * scale * (n as f64).powf(-0.2);

    let lo = sorted[0] - 4.0 * bandwidth;
    let hi = sorted[n - 1] + 4.0 * bandwidth;
    let step = (hi - lo) / (grid_size - 1) as f64;
    let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * bandwidth * n as f64);
    let mut grid = Vec::with_capacity(grid_size);
    let mut density = Vec::with_capacity(grid_size);
    for k in 0..grid_size {
        let g = lo + step * k as f64;
        let d: f64 = series
            .iter()
            .map(|&x| {
                let u = (g - x) / bandwidth;
                (-0.5 * u * u).exp()
            })
            .sum::<f64>()
            * norm;
        grid.push(g);
        density.push(d);
    }
    Ok(DensityCurve {
        grid,
        density,
        bandwidth,
    })
}

/// Sample Pearson correlation, clamped to [-1, 1] against rounding.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} values", a.len()),
            got: format!("{} values", b.len()),
        });
    }
    if a.len() < 2 {
        return Err(Error::TooFewSamples {
            context: "pearson",
            needed: 2,
            got: a.len(),
        });
    }
    let ma = mean(a);
    let mb = mean(b);
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        let dx = x - ma;
        let dy = y - mb;
        cov += dx * dy;
        va += dx * dx;
        vb += dy * dy;
    }
    if va == 0.0 || vb == 0.0 {
        return Err(Error::ZeroVariance {
            name: if va == 0.0 { "first series" } else { "second series" }.to_string(),
        });
    }
    Ok((cov / (va * vb).sqrt()).clamp(-1.0, 1.0))
}

/// Univariate linear association of a feature with the target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Association {
    pub r: f64,
    /// Regression F statistic r²/(1-r²)·(n-2); +infinity when |r| = 1.
    pub f_value: f64,
    pub p_value: f64,
}

/// F-value test of linear dependence between `x` and `y`.
pub fn f_score(x: &[f64], y: &[f64]) -> Result<Association> {
    if x.len() < 3 {
        return Err(Error::TooFewSamples {
            context: "f_score",
            needed: 3,
            got: x.len(),
        });
    }
    let r = pearson(x, y)?;
    let df = (x.len() - 2) as f64;
    let r2 = r * r;
    // Exactly collinear inputs land within rounding of |r| = 1; report the
    // infinite-F sentinel rather than a rounding-dependent huge value.
    if 1.0 - r2 < 1e-12 {
        return Ok(Association {
            r,
            f_value: f64::INFINITY,
            p_value: 0.0,
        });
    }
    let f_value = r2 / (1.0 - r2) * df;
    Ok(Association {
        r,
        f_value,
        p_value: f_sf(f_value, 1.0, df),
    })
}

/// Scored feature, ranked within a candidate pool (rank 1 = largest F).
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct FeatureScore {
    pub feature: String,
    pub r: f64,
    pub f_value: f64,
    pub p_value: f64,
    pub rank: usize,
}

/// Outcome of normality screening for one feature.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalityResult {
    pub feature: String,
    pub a_squared: f64,
    pub a_star: f64,
    pub p_value: f64,
    /// Standard reading: the feature passes when p >= 0.05.
    pub passed: bool,
    /// Yeo–Johnson lambda applied, absent when the series was left alone.
    pub transform_lambda: Option<f64>,
}

/// Screens each column for normality on the given rows. Columns rejected
/// at `AD_ALPHA` are Yeo–Johnson transformed; the transform is kept only
/// if it improves the p-value. Reported statistics describe the series as
/// used downstream (post-transform when one was kept).
pub fn screen_features(x: &Matrix, names: &[String]) -> Result<Vec<NormalityResult>> {
    assert_eq!(x.cols(), names.len());
    let mut results = Vec::with_capacity(names.len());
    for (j, name) in names.iter().enumerate() {
        let col = x.column(j);
        let before = anderson_darling(&col).map_err(|e| rename_zero_variance(e, name))?;
        if before.p_value >= AD_ALPHA {
            results.push(NormalityResult {
                feature: name.clone(),
                a_squared: before.a_squared,
                a_star: before.a_star,
                p_value: before.p_value,
                passed: true,
                transform_lambda: None,
            });
            continue;
        }
        let (transformed, lambda) = yeo_johnson(&col)?;
        // A degenerate transform (constant output) counts as no improvement.
        let after = anderson_darling(&transformed).ok();
        match after {
            Some(after) if after.p_value > before.p_value => {
                results.push(NormalityResult {
                    feature: name.clone(),
                    a_squared: after.a_squared,
                    a_star: after.a_star,
                    p_value: after.p_value,
                    passed: after.p_value >= AD_ALPHA,
                    transform_lambda: Some(lambda),
                });
            }
            _ => {
                results.push(NormalityResult {
                    feature: name.clone(),
                    a_squared: before.a_squared,
                    a_star: before.a_star,
                    p_value: before.p_value,
                    passed: false,
                    transform_lambda: None,
                });
            }
        }
    }
    Ok(results)
}

fn rename_zero_variance(e: Error, name: &str) -> Error {
    match e {
        Error::ZeroVariance { .. } => Error::ZeroVariance {
            name: name.to_string(),
        },
        other => other,
    }
}
