//! Minimal dense linear algebra: a row-major matrix, a pivoted
//! Gaussian-elimination solver, and Householder least squares.
//!
//! The data sizes in this domain are tiny (tens of rows, around a hundred
//! columns), so clarity wins over blocking or SIMD.

use crate::error::{Error, Result};

/// Dense row-major `f64` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix { rows: r, cols: c, data }
    }

    /// Single-column matrix from a vector.
    pub fn column_vector(v: &[f64]) -> Self {
        Matrix {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn select_columns(&self, indices: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.rows, indices.len());
        for i in 0..self.rows {
            for (jj, &j) in indices.iter().enumerate() {
                out.set(i, jj, self.get(i, j));
            }
        }
        out
    }

    /// `self * v` for a vector of length `cols`.
    pub fn mat_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| dot(self.row(i), v))
            .collect()
    }

    pub fn shape_error(&self, expected: &str) -> Error {
        Error::ShapeMismatch {
            expected: expected.to_string(),
            got: format!("{}x{}", self.rows, self.cols),
        }
    }
}

// Serialized as a list of rows; round-trip exact for every finite value.
impl serde::Serialize for Matrix {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<&[f64]> = (0..self.rows()).map(|i| self.row(i)).collect();
        rows.serialize(serializer)
    }
}

impl<'de> serde::Deserialize<'de> for Matrix {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<f64>> = Vec::deserialize(deserializer)?;
        Ok(Matrix::from_rows(&rows))
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// Solves the square system `a x = b` by Gaussian elimination with partial
/// pivoting. `a` is consumed as scratch.
pub fn solve_dense(mut a: Matrix, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = a.rows();
    assert_eq!(a.cols(), n);
    assert_eq!(b.len(), n);
    for k in 0..n {
        let mut pivot = k;
        let mut best = a.get(k, k).abs();
        for i in k + 1..n {
            let v = a.get(i, k).abs();
            if v > best {
                best = v;
                pivot = i;
            }
        }
        if best < 1e-12 {
            return Err(Error::SingularDesign { column: k });
        }
        if pivot != k {
            for j in 0..n {
                let tmp = a.get(k, j);
                a.set(k, j, a.get(pivot, j));
                a.set(pivot, j, tmp);
            }
            b.swap(k, pivot);
        }
        for i in k + 1..n {
            let factor = a.get(i, k) / a.get(k, k);
            if factor == 0.0 {
                continue;
            }
            for j in k..n {
                let v = a.get(i, j) - factor * a.get(k, j);
                a.set(i, j, v);
            }
            b[i] -= factor * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = b[i];
        for j in i + 1..n {
            acc -= a.get(i, j) * x[j];
        }
        x[i] = acc / a.get(i, i);
    }
    Ok(x)
}

/// Least squares `min ||a x - b||` via Householder QR without pivoting.
/// Rank deficiency surfaces as a singular-design error naming the first
/// dependent column.
pub fn least_squares(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let m = a.rows();
    let n = a.cols();
    assert_eq!(b.len(), m);
    if m < n {
        return Err(a.shape_error("at least as many rows as columns"));
    }
    let mut r = a.clone();
    let mut rhs = b.to_vec();
    let mut max_diag: f64 = 0.0;
    for k in 0..n {
        // Householder reflection clearing column k below the diagonal.
        let mut norm = 0.0;
        for i in k..m {
            norm += r.get(i, k) * r.get(i, k);
        }
        let norm = norm.sqrt();
        if norm == 0.0 {
            return Err(Error::SingularDesign { column: k });
        }
        let alpha = if r.get(k, k) >= 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..m).map(|i| r.get(i, k)).collect();
        v[0] -= alpha;
        let v_norm2 = dot(&v, &v);
        if v_norm2 > 0.0 {
            for j in k..n {
                let mut proj = 0.0;
                for (idx, i) in (k..m).enumerate() {
                    proj += v[idx] * r.get(i, j);
                }
                let scale = 2.0 * proj / v_norm2;
                for (idx, i) in (k..m).enumerate() {
                    let nv = r.get(i, j) - scale * v[idx];
                    r.set(i, j, nv);
                }
            }
            let mut proj = 0.0;
            for (idx, i) in (k..m).enumerate() {
                proj += v[idx] * rhs[i];
            }
            let scale = 2.0 * proj / v_norm2;
            for (idx, i) in (k..m).enumerate() {
                rhs[i] -= scale * v[idx];
            }
        }
        r.set(k, k, alpha);
        max_diag = max_diag.max(alpha.abs());
    }
    // Back substitution on the triangular factor.
    let tol = max_diag * 1e-12;
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let diag = r.get(i, i);
        if diag.abs() <= tol {
            return Err(Error::SingularDesign { column: i });
        }
        let mut acc = rhs[i];
        for j in i + 1..n {
            acc -= r.get(i, j) * x[j];
        }
        x[i] = acc / diag;
    }
    Ok(x)
}
