//! SVM training on precomputed kernels, cross-validation, grid search and
//! evaluation.

pub mod bow;
pub mod cv;
pub mod eval;
pub mod grid;
pub mod svm;

pub use bow::{bow_features, bow_gram};
pub use cv::{loo_cv, stratified_split, LooResult, Split};
pub use eval::{evaluate, fit_and_predict, majority, Confusion, EvalError, EvalReport};
pub use grid::{grid_scores, grid_search, kernel_gram, select_best, ConfigScore, GridError, GridOutcome, GridSpec, KernelKind};
pub use svm::{dual_objective, kkt_residual, train_svm, train_svm_unchecked, SvmError, SvmModel};
