//! Kernel functions and Gram matrix assembly.

use crate::error::{Error, Result};
use crate::linalg::{dot, squared_distance, Matrix};

/// Kernel family, as named in grids and config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Linear,
    Rbf,
    Polynomial,
}

/// Kernel specification. RBF and polynomial kernels carry a width
/// parameter gamma; the polynomial additionally a degree and offset.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    Linear,
    Rbf { gamma: f64 },
    Polynomial { gamma: f64, degree: u32, coef0: f64 },
}

impl KernelSpec {
    pub fn linear() -> Self {
        KernelSpec::Linear
    }

    pub fn rbf(gamma: f64) -> Result<Self> {
        if gamma <= 0.0 {
            return Err(Error::InvalidParam(format!("rbf gamma must be > 0, got {gamma}")));
        }
        Ok(KernelSpec::Rbf { gamma })
    }

    pub fn polynomial(gamma: f64, degree: u32, coef0: f64) -> Result<Self> {
        if gamma <= 0.0 {
            return Err(Error::InvalidParam(format!("poly gamma must be > 0, got {gamma}")));
        }
        if degree == 0 {
            return Err(Error::InvalidParam("poly degree must be >= 1".to_string()));
        }
        Ok(KernelSpec::Polynomial { gamma, degree, coef0 })
    }

    /// K(a, b) for two feature rows.
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            KernelSpec::Linear => dot(a, b),
            KernelSpec::Rbf { gamma } => (-gamma * squared_distance(a, b)).exp(),
            KernelSpec::Polynomial { gamma, degree, coef0 } => {
                (gamma * dot(a, b) + coef0).powi(degree as i32)
            }
        }
    }

    /// Short name for reports.
    pub fn kind_name(&self) -> &'static str {
        match self {
            KernelSpec::Linear => "linear",
            KernelSpec::Rbf { .. } => "rbf",
            KernelSpec::Polynomial { .. } => "polynomial",
        }
    }

    /// Gamma when the kernel has one.
    pub fn gamma(&self) -> Option<f64> {
        match *self {
            KernelSpec::Linear => None,
            KernelSpec::Rbf { gamma } | KernelSpec::Polynomial { gamma, .. } => Some(gamma),
        }
    }

    /// Builds a spec of the given family. Polynomial kernels in grids use
    /// degree 3 and coef0 1.
    pub fn of_kind(kind: KernelKind, gamma: f64) -> Result<Self> {
        match kind {
            KernelKind::Linear => Ok(KernelSpec::Linear),
            KernelKind::Rbf => KernelSpec::rbf(gamma),
            KernelKind::Polynomial => KernelSpec::polynomial(gamma, 3, 1.0),
        }
    }
}

/// Kernel matrix K[i][j] = K(a_i, b_j) between the rows of two matrices.
pub fn gram(a: &Matrix, b: &Matrix, kernel: &KernelSpec) -> Result<Matrix> {
    if a.cols() != b.cols() {
        return Err(b.shape_error(&format!("{} columns", a.cols())));
    }
    let mut out = Matrix::zeros(a.rows(), b.rows());
    for i in 0..a.rows() {
        for j in 0..b.rows() {
            out.set(i, j, kernel.eval(a.row(i), b.row(j)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn rbf_diagonal_is_one() {
        let mut rng = Rng::new(1);
        let rows: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..3).map(|_| rng.next_normal()).collect())
            .collect();
        let x = Matrix::from_rows(&rows);
        let k = gram(&x, &x, &KernelSpec::rbf(0.7).unwrap()).unwrap();
        for i in 0..6 {
            assert_eq!(k.get(i, i), 1.0);
        }
    }

    #[test]
    fn linear_kernel_of_orthogonal_rows_vanishes() {
        let x = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0]]);
        let k = gram(&x, &x, &KernelSpec::Linear).unwrap();
        assert_eq!(k.get(0, 1), 0.0);
        assert_eq!(k.get(1, 0), 0.0);
    }

    #[test]
    fn rbf_hand_value() {
        let x = Matrix::from_rows(&[vec![0.0], vec![2.0]]);
        let k = gram(&x, &x, &KernelSpec::rbf(0.5).unwrap()).unwrap();
        assert!((k.get(0, 1) - (-2.0f64).exp()).abs() < 1e-16);
        assert!((k.get(0, 1) - 0.1353352832366127).abs() < 1e-15);
    }

    #[test]
    fn polynomial_kernel_hand_value() {
        let x = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, -1.0]]);
        let k = KernelSpec::polynomial(0.5, 2, 1.0).unwrap();
        // dot = 1, (0.5 * 1 + 1)^2 = 2.25
        assert_eq!(k.eval(x.row(0), x.row(1)), 2.25);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(KernelSpec::rbf(0.0).is_err());
        assert!(KernelSpec::polynomial(1.0, 0, 0.0).is_err());
    }

    #[test]
    fn gram_shape_mismatch() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0]]);
        let b = Matrix::from_rows(&[vec![1.0]]);
        assert!(gram(&a, &b, &KernelSpec::Linear).is_err());
    }

    /// Smallest eigenvalue via power iteration on the spectral shift.
    fn min_eigenvalue(k: &Matrix) -> f64 {
        let n = k.rows();
        let power = |m: &dyn Fn(&[f64]) -> Vec<f64>| -> f64 {
            let mut v = vec![1.0; n];
            let mut lambda = 0.0;
            for _ in 0..500 {
                let w = m(&v);
                let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm == 0.0 {
                    return 0.0;
                }
                v = w.iter().map(|x| x / norm).collect();
                lambda = norm;
            }
            lambda
        };
        let apply_k = |v: &[f64]| k.mat_vec(v);
        let lambda_max = power(&apply_k);
        let shifted = |v: &[f64]| -> Vec<f64> {
            let kv = k.mat_vec(v);
            v.iter()
                .zip(kv)
                .map(|(x, y)| lambda_max * x - y)
                .collect()
        };
        lambda_max - power(&shifted)
    }

    #[test]
    fn gram_matrices_are_symmetric_psd() {
        let mut rng = Rng::new(42);
        for kernel in [
            KernelSpec::Linear,
            KernelSpec::rbf(0.3).unwrap(),
            KernelSpec::rbf(2.0).unwrap(),
            KernelSpec::polynomial(0.5, 3, 1.0).unwrap(),
        ] {
            let rows: Vec<Vec<f64>> = (0..15)
                .map(|_| (0..4).map(|_| rng.next_normal()).collect())
                .collect();
            let x = Matrix::from_rows(&rows);
            let k = gram(&x, &x, &kernel).unwrap();
            for i in 0..15 {
                for j in 0..15 {
                    assert_eq!(k.get(i, j), k.get(j, i));
                }
            }
            let lambda_min = min_eigenvalue(&k);
            assert!(lambda_min >= -1e-8, "{kernel:?}: lambda_min = {lambda_min}");
        }
    }
}
