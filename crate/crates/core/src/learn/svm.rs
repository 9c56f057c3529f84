//! C-SVM dual solved by SMO on a precomputed kernel.
//!
//! Working-set selection uses second-order information (the libsvm rule);
//! the stopping criterion is the maximal violating pair gap.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Label;
use crate::kernel::{KernelMatrix, MatrixError};

pub const DEFAULT_EPS: f64 = 1e-3;
pub const DEFAULT_MAX_ITER: usize = 100_000;
const TAU: f64 = 1e-12;

/// Relative tolerance on the spectrum used by [`train_svm`].
pub const PSD_REL_TOL: f64 = 1e-8;
pub const SYM_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SvmError {
    #[error("C must be positive and finite, got {0}")]
    BadC(f64),
    #[error("{labels} labels for a {n}x{n} kernel")]
    LabelCount { labels: usize, n: usize },
    #[error("empty training set")]
    Empty,
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("kernel row has length {got}, model has {expected} training instances")]
    RowLength { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    /// `alpha_i * y_i` per training instance.
    pub coefficients: Vec<f64>,
    pub bias: f64,
    pub training_ids: Vec<String>,
    pub c: f64,
    pub iterations: usize,
}

impl SvmModel {
    /// Decision value `sum_i coef_i * row_i + bias`.
    pub fn margin(&self, row: &[f64]) -> Result<f64, SvmError> {
        if row.len() != self.coefficients.len() {
            return Err(SvmError::RowLength {
                expected: self.coefficients.len(),
                got: row.len(),
            });
        }
        Ok(decision(&self.coefficients, row, self.bias))
    }

    /// Predicted label and margin; a margin of exactly 0 predicts +1.
    pub fn predict(&self, row: &[f64]) -> Result<(Label, f64), SvmError> {
        let m = self.margin(row)?;
        Ok((sign_label(m), m))
    }

    pub fn support_vector_count(&self) -> usize {
        self.coefficients.iter().filter(|c| **c != 0.0).count()
    }
}

fn decision(coef: &[f64], row: &[f64], bias: f64) -> f64 {
    coef.iter().zip(row).map(|(a, k)| a * k).sum::<f64>() + bias
}

pub(crate) fn sign_label(m: f64) -> Label {
    if m >= 0.0 {
        Label::Positive
    } else {
        Label::Negative
    }
}

/// Solver state after convergence.
#[derive(Debug, Clone)]
pub(crate) struct Solution {
    pub alpha: Vec<f64>,
    pub grad: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
}

impl Solution {
    pub fn coefficients(&self, y: &[f64]) -> Vec<f64> {
        self.alpha.iter().zip(y).map(|(a, y)| a * y).collect()
    }
}

/// Row-major `n x n` kernel with labels as +-1.
pub(crate) struct Problem<'a> {
    pub k: &'a [f64],
    pub n: usize,
    pub y: &'a [f64],
    pub c: f64,
}

impl Problem<'_> {
    #[inline]
    fn kij(&self, i: usize, j: usize) -> f64 {
        self.k[i * self.n + j]
    }

    fn is_upper(&self, a: f64) -> bool {
        a >= self.c
    }

    fn is_lower(&self, a: f64) -> bool {
        a <= 0.0
    }

    /// `G = Q alpha - 1` with `Q_ij = y_i y_j K_ij`.
    pub fn gradient(&self, alpha: &[f64]) -> Vec<f64> {
        let mut g = vec![-1.0; self.n];
        for (j, &a) in alpha.iter().enumerate() {
            if a != 0.0 {
                let row = &self.k[j * self.n..(j + 1) * self.n];
                let ya = self.y[j] * a;
                for t in 0..self.n {
                    g[t] += self.y[t] * ya * row[t];
                }
            }
        }
        g
    }

    /// Maximal violating pair gap `m(alpha) - M(alpha)`; 0 when one of the
    /// index sets is empty.
    pub fn kkt_gap(&self, alpha: &[f64], grad: &[f64]) -> f64 {
        let mut up = f64::NEG_INFINITY;
        let mut low = f64::NEG_INFINITY;
        for t in 0..self.n {
            let v = -self.y[t] * grad[t];
            let (in_up, in_low) = if self.y[t] > 0.0 {
                (!self.is_upper(alpha[t]), !self.is_lower(alpha[t]))
            } else {
                (!self.is_lower(alpha[t]), !self.is_upper(alpha[t]))
            };
            if in_up {
                up = up.max(v);
            }
            if in_low {
                low = low.max(-v);
            }
        }
        if up == f64::NEG_INFINITY || low == f64::NEG_INFINITY {
            0.0
        } else {
            (up + low).max(0.0)
        }
    }

    /// Runs SMO from a feasible `alpha` (box and equality constraints).
    pub fn solve(&self, alpha: Vec<f64>, eps: f64, max_iter: usize) -> Solution {
        self.solve_without(alpha, None, eps, max_iter)
    }

    /// As [`solve`](Self::solve) on the problem with row and column `skip`
    /// removed. `alpha[skip]` must be 0 and stays 0.
    pub fn solve_without(&self, alpha: Vec<f64>, skip: Option<usize>, eps: f64, max_iter: usize) -> Solution {
        let grad = self.gradient(&alpha);
        self.solve_from(alpha, grad, skip, eps, max_iter)
    }

    /// As [`solve_without`](Self::solve_without) with the gradient at
    /// `alpha` supplied by the caller.
    pub fn solve_from(&self, mut alpha: Vec<f64>, mut grad: Vec<f64>, skip: Option<usize>, eps: f64, max_iter: usize) -> Solution {
        let n = self.n;
        let (y, c) = (self.y, self.c);
        let skip = skip.unwrap_or(usize::MAX);
        debug_assert!(skip == usize::MAX || alpha[skip] == 0.0);
        let mut iter = 0;

        let first = (0..n).find(|&t| t != skip);
        if let Some(f) = first {
            if (0..n).all(|t| t == skip || y[t] == y[f]) {
                // single class: the only feasible point is alpha = 0
                return Solution {
                    alpha: vec![0.0; n],
                    grad: vec![-1.0; n],
                    bias: y[f],
                    iterations: 0,
                };
            }
        } else {
            return Solution {
                alpha: vec![0.0; n],
                grad: vec![-1.0; n],
                bias: 1.0,
                iterations: 0,
            };
        }

        let diag: Vec<f64> = (0..n).map(|t| self.kij(t, t)).collect();
        // membership in I_up / I_low; only the two updated variables change
        let mut up = vec![false; n];
        let mut low = vec![false; n];
        let status = |t: usize, a: f64, up: &mut [bool], low: &mut [bool]| {
            if t == skip {
                return;
            }
            let (u, l) = if y[t] > 0.0 {
                (!self.is_upper(a), !self.is_lower(a))
            } else {
                (!self.is_lower(a), !self.is_upper(a))
            };
            up[t] = u;
            low[t] = l;
        };
        for t in 0..n {
            status(t, alpha[t], &mut up, &mut low);
        }

        while iter < max_iter {
            // select i: argmax over I_up of -y_t G_t
            let mut gmax = f64::NEG_INFINITY;
            let mut i = usize::MAX;
            for t in 0..n {
                if up[t] && -y[t] * grad[t] >= gmax {
                    gmax = -y[t] * grad[t];
                    i = t;
                }
            }
            // select j: second-order rule over I_low
            let mut gmax2 = f64::NEG_INFINITY;
            let mut j = usize::MAX;
            let mut obj_min = f64::INFINITY;
            if i != usize::MAX {
                let kii = diag[i];
                let ki = &self.k[i * n..(i + 1) * n];
                for t in 0..n {
                    if !low[t] {
                        continue;
                    }
                    let v = y[t] * grad[t];
                    gmax2 = gmax2.max(v);
                    let diff = gmax + v;
                    if diff > 0.0 {
                        let mut quad = kii + diag[t] - 2.0 * ki[t];
                        if quad <= 0.0 {
                            quad = TAU;
                        }
                        let obj = -(diff * diff) / quad;
                        if obj <= obj_min {
                            obj_min = obj;
                            j = t;
                        }
                    }
                }
            }
            if i == usize::MAX || j == usize::MAX || gmax + gmax2 < eps {
                break;
            }
            iter += 1;

            let (old_i, old_j) = (alpha[i], alpha[j]);
            let mut quad = diag[i] + diag[j] - 2.0 * self.kij(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
            if y[i] != y[j] {
                let delta = (-grad[i] - grad[j]) / quad;
                let diff = alpha[i] - alpha[j];
                alpha[i] += delta;
                alpha[j] += delta;
                if diff > 0.0 {
                    if alpha[j] < 0.0 {
                        alpha[j] = 0.0;
                        alpha[i] = diff;
                    }
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = c - diff;
                    }
                } else {
                    if alpha[i] < 0.0 {
                        alpha[i] = 0.0;
                        alpha[j] = -diff;
                    }
                    if alpha[j] > c {
                        alpha[j] = c;
                        alpha[i] = c + diff;
                    }
                }
            } else {
                let delta = (grad[i] - grad[j]) / quad;
                let sum = alpha[i] + alpha[j];
                alpha[i] -= delta;
                alpha[j] += delta;
                if sum > c {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = sum - c;
                    }
                    if alpha[j] > c {
                        alpha[j] = c;
                        alpha[i] = sum - c;
                    }
                } else {
                    if alpha[j] < 0.0 {
                        alpha[j] = 0.0;
                        alpha[i] = sum;
                    }
                    if alpha[i] < 0.0 {
                        alpha[i] = 0.0;
                        alpha[j] = sum;
                    }
                }
            }

            let di = (alpha[i] - old_i) * y[i];
            let dj = (alpha[j] - old_j) * y[j];
            let ri = &self.k[i * n..(i + 1) * n];
            let rj = &self.k[j * n..(j + 1) * n];
            for (((g, yt), a), b) in grad.iter_mut().zip(y).zip(ri).zip(rj) {
                *g += yt * (di * a + dj * b);
            }
            status(i, alpha[i], &mut up, &mut low);
            status(j, alpha[j], &mut up, &mut low);
        }

        let bias = bias_from(y, c, &alpha, &grad, (0..n).filter(|&t| t != skip));
        Solution {
            alpha,
            grad,
            bias,
            iterations: iter,
        }
    }

}

/// Bias over the index subset `idx`: mean of `-y_t G_t` over free
/// variables, else the midpoint of the feasible interval.
pub(crate) fn bias_from(y: &[f64], c: f64, alpha: &[f64], grad: &[f64], idx: impl Iterator<Item = usize>) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut sum_free = 0.0;
    let mut nr_free = 0usize;
    let mut seen_pos = false;
    let mut seen_neg = false;
    for t in idx {
        if y[t] > 0.0 {
            seen_pos = true;
        } else {
            seen_neg = true;
        }
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            nr_free += 1;
            sum_free += yg;
        }
    }
    if !(seen_pos && seen_neg) {
        return if seen_pos { 1.0 } else { -1.0 };
    }
    let rho = if nr_free > 0 {
        sum_free / nr_free as f64
    } else {
        (ub + lb) / 2.0
    };
    -rho
}

pub(crate) fn signs(labels: &[Label]) -> Vec<f64> {
    labels.iter().map(|l| l.sign()).collect()
}

fn check_inputs(n: usize, labels: &[Label], c: f64) -> Result<(), SvmError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(SvmError::BadC(c));
    }
    if labels.len() != n {
        return Err(SvmError::LabelCount { labels: labels.len(), n });
    }
    if n == 0 {
        return Err(SvmError::Empty);
    }
    Ok(())
}

/// Trains without the PSD check; used where the kernel is known to be a
/// valid Gram matrix or indefiniteness is tolerated.
pub fn train_svm_unchecked(gram: &KernelMatrix, labels: &[Label], c: f64) -> Result<SvmModel, SvmError> {
    check_inputs(gram.size(), labels, c)?;
    let y = signs(labels);
    let p = Problem {
        k: gram.values(),
        n: gram.size(),
        y: &y,
        c,
    };
    let sol = p.solve(vec![0.0; gram.size()], DEFAULT_EPS, DEFAULT_MAX_ITER);
    Ok(SvmModel {
        coefficients: sol.coefficients(&y),
        bias: sol.bias,
        training_ids: gram.instance_ids().to_vec(),
        c,
        iterations: sol.iterations,
    })
}

/// Trains a C-SVM. Matrices that are not PSD within tolerance are rejected;
/// use [`KernelMatrix::clip_negative_eigenvalues`] first if that happens.
pub fn train_svm(gram: &KernelMatrix, labels: &[Label], c: f64) -> Result<SvmModel, SvmError> {
    check_inputs(gram.size(), labels, c)?;
    gram.check_psd(SYM_TOL, PSD_REL_TOL)?;
    train_svm_unchecked(gram, labels, c)
}

/// Dual objective `sum alpha - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij`
/// of a model's coefficients.
pub fn dual_objective(gram: &KernelMatrix, coefficients: &[f64]) -> f64 {
    let n = gram.size();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += coefficients[i] * coefficients[j] * gram.get(i, j);
        }
    }
    coefficients.iter().map(|c| c.abs()).sum::<f64>() - 0.5 * quad
}

/// Maximal KKT violation of a model on its training data.
pub fn kkt_residual(gram: &KernelMatrix, labels: &[Label], model: &SvmModel) -> f64 {
    let y = signs(labels);
    let alpha: Vec<f64> = model.coefficients.iter().map(|c| c.abs()).collect();
    let p = Problem {
        k: gram.values(),
        n: gram.size(),
        y: &y,
        c: model.c,
    };
    let g = p.gradient(&alpha);
    p.kkt_gap(&alpha, &g)
}
