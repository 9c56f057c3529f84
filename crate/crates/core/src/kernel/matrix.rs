use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixError {
    #[error("expected {expected} values for {n} ids, got {got}")]
    Shape { n: usize, expected: usize, got: usize },
    #[error("matrix is not symmetric: max |K_ij - K_ji| = {0:e}")]
    Asymmetric(f64),
    #[error("negative diagonal entry {value} at {index}")]
    NegativeDiagonal { index: usize, value: f64 },
    #[error(
        "matrix is not positive semidefinite: min eigenvalue {min:e} < -{rel_tol:e} * max eigenvalue {max:e}; clip negative eigenvalues before training"
    )]
    NotPsd { min: f64, max: f64, rel_tol: f64 },
}

/// Dense symmetric Gram matrix over instances, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelMatrix {
    instance_ids: Vec<String>,
    values: Vec<f64>,
}

impl KernelMatrix {
    pub fn new(instance_ids: Vec<String>, values: Vec<f64>) -> Result<Self, MatrixError> {
        let n = instance_ids.len();
        if values.len() != n * n {
            return Err(MatrixError::Shape {
                n,
                expected: n * n,
                got: values.len(),
            });
        }
        Ok(KernelMatrix {
            instance_ids,
            values,
        })
    }

    /// Fills the upper triangle with `f` in parallel and mirrors it.
    pub fn from_fn<F>(instance_ids: Vec<String>, f: F) -> Self
    where
        F: Fn(usize, usize) -> f64 + Sync,
    {
        let n = instance_ids.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| (i..n).map(|j| f(i, j)).collect())
            .collect();
        let mut values = vec![0.0; n * n];
        for (i, row) in rows.into_iter().enumerate() {
            for (off, v) in row.into_iter().enumerate() {
                let j = i + off;
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        KernelMatrix {
            instance_ids,
            values,
        }
    }

    pub fn size(&self) -> usize {
        self.instance_ids.len()
    }

    pub fn instance_ids(&self) -> &[String] {
        &self.instance_ids
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.size();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.size()).map(|i| self.get(i, i)).collect()
    }

    /// Principal submatrix on `idx`, in that order.
    pub fn submatrix(&self, idx: &[usize]) -> KernelMatrix {
        let mut values = Vec::with_capacity(idx.len() * idx.len());
        for &i in idx {
            let row = self.row(i);
            values.extend(idx.iter().map(|&j| row[j]));
        }
        KernelMatrix {
            instance_ids: idx.iter().map(|&i| self.instance_ids[i].clone()).collect(),
            values,
        }
    }

    /// Entry-wise `sum_k weights[k] * mats[k]`. All matrices must share ids.
    pub fn weighted_sum(mats: &[&KernelMatrix], weights: &[f64]) -> KernelMatrix {
        assert_eq!(mats.len(), weights.len());
        assert!(!mats.is_empty());
        let mut values = vec![0.0; mats[0].values.len()];
        for (m, &w) in mats.iter().zip(weights) {
            if w == 0.0 {
                continue;
            }
            for (acc, v) in values.iter_mut().zip(&m.values) {
                *acc += w * v;
            }
        }
        KernelMatrix {
            instance_ids: mats[0].instance_ids.clone(),
            values,
        }
    }

    pub fn max_asymmetry(&self) -> f64 {
        let n = self.size();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Smallest and largest eigenvalue of the symmetrized matrix.
    pub fn eigen_extremes(&self) -> (f64, f64) {
        let n = self.size();
        if n == 0 {
            return (0.0, 0.0);
        }
        let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (self.get(i, j) + self.get(j, i)));
        let eig = SymmetricEigen::new(m);
        let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let max = eig
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        (min, max)
    }

    /// Symmetry within `sym_tol`, non-negative diagonal and
    /// `min_eig >= -rel_tol * max_eig`.
    pub fn check_psd(&self, sym_tol: f64, rel_tol: f64) -> Result<(), MatrixError> {
        let asym = self.max_asymmetry();
        if asym > sym_tol {
            return Err(MatrixError::Asymmetric(asym));
        }
        for i in 0..self.size() {
            let v = self.get(i, i);
            if v < 0.0 {
                return Err(MatrixError::NegativeDiagonal { index: i, value: v });
            }
        }
        let (min, max) = self.eigen_extremes();
        if min < -rel_tol * max.max(0.0) {
            return Err(MatrixError::NotPsd { min, max, rel_tol });
        }
        Ok(())
    }

    /// Projects onto the PSD cone by zeroing negative eigenvalues.
    pub fn clip_negative_eigenvalues(&self) -> KernelMatrix {
        let n = self.size();
        let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (self.get(i, j) + self.get(j, i)));
        let eig = SymmetricEigen::new(m);
        let clipped = eig.eigenvalues.map(|v| v.max(0.0));
        let rebuilt = &eig.eigenvectors
            * DMatrix::from_diagonal(&clipped)
            * eig.eigenvectors.transpose();
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                values.push(rebuilt[(i, j)]);
            }
        }
        KernelMatrix {
            instance_ids: self.instance_ids.clone(),
            values,
        }
    }
}
