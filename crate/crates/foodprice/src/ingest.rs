//! Panel ingestion: CSV loading, missing-value imputation, deterministic
//! train/test splitting, and column standardization.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::Rng;

/// Cell tokens treated as missing on input.
pub const MISSING_TOKENS: [&str; 4] = ["", "NA", "NaN", ".."];

/// Year-indexed indicator panel: one target series plus named feature
/// columns, with a missingness mask aligned to `values`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorTable {
    pub years: Vec<i64>,
    pub target_name: String,
    pub target: Vec<f64>,
    pub feature_names: Vec<String>,
    pub values: Matrix,
    /// Row-major mask, `true` where the input cell was missing.
    pub missing_mask: Vec<bool>,
}

impl IndicatorTable {
    pub fn n_rows(&self) -> usize {
        self.years.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn is_missing(&self, row: usize, col: usize) -> bool {
        self.missing_mask[row * self.n_features() + col]
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|f| f == name)
    }
}

/// Loads an indicator panel from a CSV file with a header row, an integer
/// `year` column, and real-valued indicator columns. Rows are ordered by
/// year; duplicate years are rejected.
pub fn load_table(path: impl AsRef<Path>, target_column: &str) -> Result<IndicatorTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    load_table_from_reader(file, target_column)
}

/// Same as [`load_table`] for any reader (used by tests and staged runs).
pub fn load_table_from_reader(reader: impl Read, target_column: &str) -> Result<IndicatorTable> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers: Vec<String> = csv_reader
        .headers()?
        .iter()
        .map(|h| h.to_string())
        .collect();

    let year_col = headers
        .iter()
        .position(|h| h == "year")
        .ok_or_else(|| Error::MissingColumn {
            column: "year".to_string(),
        })?;
    let target_col = headers
        .iter()
        .position(|h| h == target_column)
        .ok_or_else(|| Error::MissingColumn {
            column: target_column.to_string(),
        })?;

    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|&j| j != year_col && j != target_col)
        .collect();
    let feature_names: Vec<String> = feature_cols.iter().map(|&j| headers[j].clone()).collect();
    for (i, name) in feature_names.iter().enumerate() {
        if feature_names[..i].contains(name) {
            return Err(Error::Config(format!("duplicate feature column {name:?}")));
        }
    }

    struct RawRow {
        year: i64,
        target: f64,
        cells: Vec<(f64, bool)>,
    }

    let mut rows: Vec<RawRow> = Vec::new();
    for (idx, record) in csv_reader.records().enumerate() {
        let record = record?;
        let row_no = idx + 1; // 1-based data row
        let parse = |col: usize| -> Result<Option<f64>> {
            let token = record.get(col).unwrap_or("");
            if MISSING_TOKENS.contains(&token) {
                return Ok(None);
            }
            match token.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(Some(v)),
                _ => Err(Error::BadCell {
                    row: row_no,
                    column: headers[col].clone(),
                    token: token.to_string(),
                }),
            }
        };

        let year_token = record.get(year_col).unwrap_or("");
        let year = year_token.parse::<i64>().map_err(|_| Error::BadCell {
            row: row_no,
            column: "year".to_string(),
            token: year_token.to_string(),
        })?;
        let target = parse(target_col)?.ok_or_else(|| Error::BadCell {
            row: row_no,
            column: target_column.to_string(),
            token: record.get(target_col).unwrap_or("").to_string(),
        })?;

        let mut cells = Vec::with_capacity(feature_cols.len());
        for &col in &feature_cols {
            match parse(col)? {
                Some(v) => cells.push((v, false)),
                None => cells.push((0.0, true)),
            }
        }
        rows.push(RawRow { year, target, cells });
    }

    rows.sort_by_key(|r| r.year);
    for pair in rows.windows(2) {
        if pair[0].year == pair[1].year {
            return Err(Error::DuplicateYear { year: pair[0].year });
        }
    }

    let n = rows.len();
    let m = feature_names.len();
    let mut values = Matrix::zeros(n, m);
    let mut missing_mask = vec![false; n * m];
    let mut years = Vec::with_capacity(n);
    let mut target = Vec::with_capacity(n);
    for (i, row) in rows.iter().enumerate() {
        years.push(row.year);
        target.push(row.target);
        for (j, &(v, miss)) in row.cells.iter().enumerate() {
            values.set(i, j, v);
            missing_mask[i * m + j] = miss;
        }
    }

    Ok(IndicatorTable {
        years,
        target_name: target_column.to_string(),
        target,
        feature_names,
        values,
        missing_mask,
    })
}

/// Fills every masked cell: interior gaps by linear interpolation over the
/// year axis, boundary gaps by the nearest observed value. Observed cells
/// are copied bit for bit.
pub fn impute(table: &IndicatorTable) -> Result<IndicatorTable> {
    let n = table.n_rows();
    let m = table.n_features();
    let mut out = table.clone();

    for j in 0..m {
        let observed: Vec<usize> = (0..n).filter(|&i| !table.is_missing(i, j)).collect();
        if observed.is_empty() {
            return Err(Error::EmptyColumn {
                feature: table.feature_names[j].clone(),
            });
        }
        for i in 0..n {
            if !table.is_missing(i, j) {
                continue;
            }
            let next = observed.iter().position(|&o| o > i);
            let prev = observed.iter().rposition(|&o| o < i);
            let filled = match (prev, next) {
                (Some(p), Some(q)) => {
                    let (ia, ib) = (observed[p], observed[q]);
                    let (ya, yb) = (table.years[ia] as f64, table.years[ib] as f64);
                    let (va, vb) = (table.values.get(ia, j), table.values.get(ib, j));
                    va + (vb - va) * (table.years[i] as f64 - ya) / (yb - ya)
                }
                (Some(p), None) => table.values.get(observed[p], j),
                (None, Some(q)) => table.values.get(observed[q], j),
                (None, None) => unreachable!("observed is non-empty"),
            };
            out.values.set(i, j, filled);
            out.missing_mask[i * m + j] = false;
        }
    }
    Ok(out)
}

/// Deterministic train/test split.
#[derive(Debug, Clone)]
pub struct SplitData {
    pub train_x: Matrix,
    pub train_y: Vec<f64>,
    pub test_x: Matrix,
    pub test_y: Vec<f64>,
    pub seed: u64,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// Index partition for an `n`-row table: a seeded Fisher–Yates shuffle of
/// `0..n`, the first `floor(train_fraction * n)` entries forming the train
/// set. Both index lists are returned sorted ascending.
pub fn split_indices(
    n: usize,
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParam(format!(
            "train_fraction must be in (0,1), got {train_fraction}"
        )));
    }
    if n < 5 {
        return Err(Error::TooFewSamples {
            context: "split",
            needed: 5,
            got: n,
        });
    }
    let n_train = (train_fraction * n as f64).floor() as usize;
    if n_train < 2 || n_train >= n {
        return Err(Error::InvalidParam(format!(
            "train_fraction {train_fraction} leaves {n_train} training rows out of {n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    Rng::new(seed).shuffle(&mut order);
    let mut train: Vec<usize> = order[..n_train].to_vec();
    let mut test: Vec<usize> = order[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Splits a table into train/test matrices over its feature columns.
pub fn split(table: &IndicatorTable, train_fraction: f64, seed: u64) -> Result<SplitData> {
    let (train_indices, test_indices) = split_indices(table.n_rows(), train_fraction, seed)?;
    Ok(SplitData {
        train_x: table.values.select_rows(&train_indices),
        train_y: train_indices.iter().map(|&i| table.target[i]).collect(),
        test_x: table.values.select_rows(&test_indices),
        test_y: test_indices.iter().map(|&i| table.target[i]).collect(),
        seed,
        train_indices,
        test_indices,
    })
}

/// Per-column standardizer (sample standard deviation, divisor n-1).
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Scaler {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Scaler {
    /// Fits column means and sample standard deviations. A constant column
    /// is an error, reported by position.
    pub fn fit(x: &Matrix) -> Result<Scaler> {
        if x.rows() < 2 {
            return Err(Error::TooFewSamples {
                context: "scaler fit",
                needed: 2,
                got: x.rows(),
            });
        }
        let n = x.rows() as f64;
        let mut means = Vec::with_capacity(x.cols());
        let mut stds = Vec::with_capacity(x.cols());
        for j in 0..x.cols() {
            let col = x.column(j);
            let mean = col.iter().sum::<f64>() / n;
            let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
            let std = (ss / (n - 1.0)).sqrt();
            if std == 0.0 {
                return Err(Error::ZeroVariance {
                    name: format!("column {j}"),
                });
            }
            means.push(mean);
            stds.push(std);
        }
        Ok(Scaler { means, stds })
    }

    /// Fits a single-series scaler (used for the target).
    pub fn fit_vector(v: &[f64]) -> Result<Scaler> {
        Scaler::fit(&Matrix::column_vector(v))
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.means.len() {
            return Err(x.shape_error(&format!("{} columns", self.means.len())));
        }
        let mut out = x.clone();
        for i in 0..x.rows() {
            for j in 0..x.cols() {
                out.set(i, j, (x.get(i, j) - self.means[j]) / self.stds[j]);
            }
        }
        Ok(out)
    }

    pub fn inverse_transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.means.len() {
            return Err(x.shape_error(&format!("{} columns", self.means.len())));
        }
        let mut out = x.clone();
        for i in 0..x.rows() {
            for j in 0..x.cols() {
                out.set(i, j, x.get(i, j) * self.stds[j] + self.means[j]);
            }
        }
        Ok(out)
    }

    pub fn transform_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        Ok(self.transform(&Matrix::column_vector(v))?.column(0))
    }

    pub fn inverse_transform_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        Ok(self.inverse_transform(&Matrix::column_vector(v))?.column(0))
    }
}
