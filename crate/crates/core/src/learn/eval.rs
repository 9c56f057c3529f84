use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::cv::{stratified_split, Split};
use super::grid::{kernel_gram, KernelKind};
use super::svm::{train_svm_unchecked, SvmError, SvmModel};
use crate::graph::{ConfigError, Instance, Label, WeightConfig};
use crate::kernel::KernelMatrix;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub true_pos: usize,
    pub false_pos: usize,
    pub true_neg: usize,
    pub false_neg: usize,
}

impl Confusion {
    pub fn add(&mut self, truth: Label, predicted: Label) {
        match (truth, predicted) {
            (Label::Positive, Label::Positive) => self.true_pos += 1,
            (Label::Negative, Label::Positive) => self.false_pos += 1,
            (Label::Negative, Label::Negative) => self.true_neg += 1,
            (Label::Positive, Label::Negative) => self.false_neg += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }

    pub fn correct(&self) -> usize {
        self.true_pos + self.true_neg
    }
}

fn ratio(a: usize, b: usize) -> Option<f64> {
    (b > 0).then(|| a as f64 / b as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub kernel: KernelKind,
    pub config: WeightConfig,
    pub c: f64,
    pub split_seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub accuracy: f64,
    pub positive: ClassScores,
    pub negative: ClassScores,
    pub confusion: Confusion,
    /// Majority class of the training part.
    pub majority_label: Label,
    /// Accuracy of always predicting `majority_label` on the test part.
    pub baseline_accuracy: f64,
}

impl EvalReport {
    pub fn from_predictions(
        kernel: KernelKind,
        config: WeightConfig,
        c: f64,
        split_seed: u64,
        train_labels: &[Label],
        truth: &[Label],
        predicted: &[Label],
    ) -> Self {
        let mut conf = Confusion::default();
        for (t, p) in truth.iter().zip(predicted) {
            conf.add(*t, *p);
        }
        let majority_label = majority(train_labels);
        let base = truth.iter().filter(|l| **l == majority_label).count();
        EvalReport {
            kernel,
            config,
            c,
            split_seed,
            n_train: train_labels.len(),
            n_test: truth.len(),
            accuracy: ratio(conf.correct(), conf.total()).unwrap_or(0.0),
            positive: ClassScores {
                precision: ratio(conf.true_pos, conf.true_pos + conf.false_pos),
                recall: ratio(conf.true_pos, conf.true_pos + conf.false_neg),
            },
            negative: ClassScores {
                precision: ratio(conf.true_neg, conf.true_neg + conf.false_neg),
                recall: ratio(conf.true_neg, conf.true_neg + conf.false_pos),
            },
            confusion: conf,
            majority_label,
            baseline_accuracy: ratio(base, truth.len()).unwrap_or(0.0),
        }
    }

    /// Aligned two-column text table.
    pub fn to_table(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.4}"));
        let rows = [
            ("kernel", self.kernel.to_string()),
            ("depth", self.config.max_depth.to_string()),
            ("C", self.c.to_string()),
            ("train", self.n_train.to_string()),
            ("test", self.n_test.to_string()),
            ("accuracy", format!("{:.4}", self.accuracy)),
            ("baseline", format!("{:.4} ({})", self.baseline_accuracy, self.majority_label)),
            ("precision +1", fmt(self.positive.precision)),
            ("recall +1", fmt(self.positive.recall)),
            ("precision -1", fmt(self.negative.precision)),
            ("recall -1", fmt(self.negative.recall)),
            (
                "confusion",
                format!(
                    "tp={} fp={} tn={} fn={}",
                    self.confusion.true_pos, self.confusion.false_pos, self.confusion.true_neg, self.confusion.false_neg
                ),
            ),
        ];
        let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in rows {
            let _ = writeln!(out, "{k:<width$}  {v}");
        }
        out
    }
}

/// More frequent label; ties go to +1.
pub fn majority(labels: &[Label]) -> Label {
    let pos = labels.iter().filter(|l| **l == Label::Positive).count();
    if 2 * pos >= labels.len() {
        Label::Positive
    } else {
        Label::Negative
    }
}

/// Trains on `split.train` rows of `gram` and predicts `split.test` rows.
pub fn fit_and_predict(gram: &KernelMatrix, labels: &[Label], split: &Split, c: f64) -> Result<(SvmModel, Vec<Label>), SvmError> {
    let train_gram = gram.submatrix(&split.train);
    let train_labels: Vec<Label> = split.train.iter().map(|&i| labels[i]).collect();
    let model = train_svm_unchecked(&train_gram, &train_labels, c)?;
    let preds = split
        .test
        .iter()
        .map(|&t| {
            let row: Vec<f64> = split.train.iter().map(|&j| gram.get(t, j)).collect();
            model.predict(&row).map(|p| p.0)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((model, preds))
}

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Svm(#[from] SvmError),
}

/// Trains on the stratified training part and reports on the held-out part.
pub fn evaluate(
    instances: &[Instance],
    config: &WeightConfig,
    c: f64,
    kernel: KernelKind,
    split_seed: u64,
    test_fraction: f64,
) -> Result<EvalReport, EvalError> {
    let labels: Vec<Label> = instances.iter().map(|i| i.label).collect();
    let split = stratified_split(&labels, test_fraction, split_seed);
    let gram = kernel_gram(instances, kernel, config)?;
    let (_, preds) = fit_and_predict(&gram, &labels, &split, c)?;
    let train_labels: Vec<Label> = split.train.iter().map(|&i| labels[i]).collect();
    let truth: Vec<Label> = split.test.iter().map(|&i| labels[i]).collect();
    Ok(EvalReport::from_predictions(
        kernel,
        config.clone(),
        c,
        split_seed,
        &train_labels,
        &truth,
        &preds,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_class_test_split() {
        let truth = [Label::Positive; 4];
        let pred = [Label::Positive, Label::Negative, Label::Positive, Label::Positive];
        let r = EvalReport::from_predictions(
            KernelKind::Wl,
            WeightConfig::uniform(0),
            1.0,
            0,
            &[Label::Negative, Label::Positive, Label::Positive],
            &truth,
            &pred,
        );
        assert_eq!(r.accuracy, r.positive.recall.unwrap());
        assert_eq!(r.confusion.total(), 4);
        assert_eq!(r.negative.recall, None);
        assert_eq!(r.baseline_accuracy, 1.0);
        assert!(r.to_table().contains("accuracy"));
    }
}
