use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::svm::{bias_from, sign_label, signs, Problem, DEFAULT_EPS, DEFAULT_MAX_ITER};
use crate::graph::Label;
use crate::kernel::KernelMatrix;

/// Train and test row indices, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified split: within each class, a seeded shuffle puts
/// `round(test_fraction * class_size)` rows in the test set.
pub fn stratified_split(labels: &[Label], test_fraction: f64, seed: u64) -> Split {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [Label::Negative, Label::Positive] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        let k = (test_fraction * idx.len() as f64).round() as usize;
        test.extend_from_slice(&idx[..k]);
        train.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Split { train, test }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LooResult {
    pub correct: usize,
    pub n: usize,
    pub accuracy: f64,
    pub predictions: Vec<Label>,
}

/// Leave-one-out cross-validation of a C-SVM on `gram`.
///
/// Each fold starts SMO from the full-data solution with the held-out
/// variable removed. Folds whose held-out point is not a support vector are
/// already optimal and need no iterations; for the others the equality
/// constraint is restored by lowering opposite-class multipliers.
pub fn loo_cv(gram: &KernelMatrix, labels: &[Label], c: f64) -> LooResult {
    loo_cv_raw(gram.values(), gram.size(), labels, c, 0).expect("a zero floor never stops early")
}

/// LOO that gives up as soon as fewer than `floor` folds can still come out
/// right, returning the best count still reachable at that point.
pub(crate) fn loo_cv_raw(k: &[f64], n: usize, labels: &[Label], c: f64, floor: usize) -> Result<LooResult, usize> {
    assert_eq!(labels.len(), n, "label count");
    let y = signs(labels);
    let full = Problem { k, n, y: &y, c }.solve(vec![0.0; n], DEFAULT_EPS, DEFAULT_MAX_ITER);

    // Folds run in order of increasing full-data margin y_i f(x_i), so the
    // likely errors come first and a hopeless configuration stops early.
    // The count does not depend on the order.
    let mut order: Vec<usize> = (0..n).collect();
    let fit = |t: usize| full.grad[t] + 1.0 + y[t] * full.bias;
    order.sort_by(|&a, &b| fit(a).total_cmp(&fit(b)).then(a.cmp(&b)));

    let n_pos = labels.iter().filter(|l| **l == Label::Positive).count();
    let mut predictions = vec![Label::Positive; n];
    let mut correct = 0;
    for (done, &i) in order.iter().enumerate() {
        if correct + (n - done) < floor {
            return Err(correct + n - done);
        }
        let pos_left = n_pos - usize::from(y[i] > 0.0);
        let neg_left = n - 1 - pos_left;
        if pos_left == 0 || neg_left == 0 {
            let p = if pos_left > 0 { Label::Positive } else { Label::Negative };
            correct += usize::from(p == labels[i]);
            predictions[i] = p;
            continue;
        }
        let row = &k[i * n..(i + 1) * n];
        let margin = if full.alpha[i] == 0.0 {
            let bias = bias_from(&y, c, &full.alpha, &full.grad, (0..n).filter(|&t| t != i));
            (0..n).map(|t| full.alpha[t] * y[t] * row[t]).sum::<f64>() + bias
        } else {
            // fold problem: the full matrix with row and column i skipped
            let mut alpha = full.alpha.clone();
            let mut grad = full.grad.clone();
            let shift = |t: usize, d: f64, grad: &mut [f64]| {
                let yd = y[t] * d;
                for ((g, yu), kt) in grad.iter_mut().zip(&y).zip(&k[t * n..(t + 1) * n]) {
                    *g += yu * yd * kt;
                }
            };
            let mut excess = alpha[i];
            alpha[i] = 0.0;
            shift(i, -excess, &mut grad);
            for t in 0..n {
                if excess <= 0.0 {
                    break;
                }
                if t != i && y[t] != y[i] && alpha[t] > 0.0 {
                    let d = alpha[t].min(excess);
                    alpha[t] -= d;
                    excess -= d;
                    shift(t, -d, &mut grad);
                }
            }
            let sol = Problem { k, n, y: &y, c }.solve_from(alpha, grad, Some(i), DEFAULT_EPS, DEFAULT_MAX_ITER);
            (0..n)
                .filter(|&t| t != i)
                .map(|t| sol.alpha[t] * y[t] * row[t])
                .sum::<f64>()
                + sol.bias
        };
        let p = sign_label(margin);
        correct += usize::from(p == labels[i]);
        predictions[i] = p;
    }
    Ok(LooResult {
        correct,
        n,
        accuracy: if n == 0 { 0.0 } else { correct as f64 / n as f64 },
        predictions,
    })
}
