use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::bow::bow_gram;
use super::cv::{loo_cv_raw, stratified_split, Split};
use crate::graph::{ConfigError, EdgeKind, Instance, Label, NodeKind, WalkOrigin, WeightConfig};
use crate::kernel::node_edge::{new_basis_grams, new_gram};
use crate::kernel::wl::{wl_gram, wl_gram_by_depth};
use crate::kernel::{KernelMatrix, KindMask};

pub const DEFAULT_TEST_FRACTION: f64 = 0.2;
pub const MIN_GRID_INSTANCES: usize = 10;
pub const BOW_NGRAM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Wl,
    New,
    Bow,
}

impl KernelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelKind::Wl => "wl",
            KernelKind::New => "new",
            KernelKind::Bow => "bow",
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KernelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "wl" => Ok(KernelKind::Wl),
            "new" => Ok(KernelKind::New),
            "bow" => Ok(KernelKind::Bow),
            other => Err(format!("unknown kernel `{other}` (expected wl, new or bow)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum GridError {
    #[error("invalid grid: {0}")]
    Spec(String),
    #[error("grid search needs at least {MIN_GRID_INSTANCES} instances, got {0}")]
    TooFew(usize),
    #[error("grid produced no configurations")]
    Empty,
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Candidate values for grid search. Every kind draws its weight from the
/// same candidate list; assignments where no node kind has weight 1 are
/// skipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub depths: Vec<usize>,
    pub node_weights: Vec<f64>,
    pub edge_weights: Vec<f64>,
    pub alpha_step: f64,
    pub cs: Vec<f64>,
    #[serde(default)]
    pub walk_origin: WalkOrigin,
    pub test_fraction: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            depths: vec![0, 1, 2, 3],
            node_weights: vec![0.0, 1.0],
            edge_weights: vec![1.0],
            alpha_step: 0.25,
            cs: vec![0.1, 1.0, 10.0],
            walk_origin: WalkOrigin::Any,
            test_fraction: DEFAULT_TEST_FRACTION,
        }
    }
}

impl GridSpec {
    fn alpha_parts(&self) -> Result<usize, GridError> {
        let m = 1.0 / self.alpha_step;
        if !(self.alpha_step > 0.0 && self.alpha_step <= 1.0) || (m - m.round()).abs() > 1e-9 {
            return Err(GridError::Spec(format!(
                "alpha step {} must divide 1",
                self.alpha_step
            )));
        }
        Ok(m.round() as usize)
    }

    pub fn validate(&self) -> Result<(), GridError> {
        if self.depths.is_empty() || self.node_weights.is_empty() || self.edge_weights.is_empty() || self.cs.is_empty() {
            return Err(GridError::Spec("every candidate set must be non-empty".into()));
        }
        if !self.node_weights.contains(&1.0) {
            return Err(GridError::Spec("node weight candidates must include 1".into()));
        }
        if self.node_weights.iter().chain(&self.edge_weights).any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(GridError::Spec("weights must be non-negative".into()));
        }
        if self.cs.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
            return Err(GridError::Spec("C candidates must be positive".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(GridError::Spec("test fraction must lie in (0, 1)".into()));
        }
        self.alpha_parts()?;
        Ok(())
    }

    /// Node-weight assignments in lexicographic order of candidate index.
    pub fn node_assignments(&self) -> Vec<[f64; 6]> {
        product::<6>(&self.node_weights)
            .into_iter()
            .filter(|w| w.contains(&1.0))
            .collect()
    }

    pub fn edge_assignments(&self) -> Vec<[f64; 5]> {
        product::<5>(&self.edge_weights)
    }

    /// Interpolation vectors for depth `d`. A vector whose trailing entries
    /// are zero is the same kernel as a shallower depth; it is dropped when
    /// that depth is itself in the grid.
    pub fn alphas_for(&self, d: usize) -> Vec<Vec<f64>> {
        let m = self.alpha_parts().unwrap_or(4);
        compositions(m, d + 1)
            .into_iter()
            .filter(|parts| {
                let effective = parts.iter().rposition(|&p| p > 0).unwrap_or(0);
                effective == d || !self.depths.contains(&effective)
            })
            .map(|parts| parts.iter().map(|&p| p as f64 / m as f64).collect())
            .collect()
    }
}

fn product<const K: usize>(cands: &[f64]) -> Vec<[f64; K]> {
    let mut out = vec![[0.0; K]];
    for slot in 0..K {
        let mut next = Vec::with_capacity(out.len() * cands.len());
        for prefix in &out {
            for &c in cands {
                let mut w = *prefix;
                w[slot] = c;
                next.push(w);
            }
        }
        out = next;
    }
    out
}

/// All ways to write `m` as an ordered sum of `k` non-negative parts,
/// lexicographic.
fn compositions(m: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 1 {
        return vec![vec![m]];
    }
    let mut out = Vec::new();
    for first in 0..=m {
        for mut rest in compositions(m - first, k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn weight_config(nodes: &[f64; 6], edges: &[f64; 5], depth: usize, alphas: Vec<f64>, origin: WalkOrigin) -> WeightConfig {
    let mut cfg = WeightConfig::uniform(depth).with_alphas(alphas).with_walk_origin(origin);
    for (k, w) in NodeKind::ALL.iter().zip(nodes) {
        cfg = cfg.with_node_weight(*k, *w);
    }
    for (k, w) in EdgeKind::ALL.iter().zip(edges) {
        cfg = cfg.with_edge_weight(*k, *w);
    }
    cfg
}

fn uniform_alphas(d: usize) -> Vec<f64> {
    vec![1.0 / (d + 1) as f64; d + 1]
}

/// LOO result for one configuration. A pruned score stopped early because
/// it could no longer beat a configuration already scored; its `correct` is
/// then only an upper bound, strictly below the eventual best.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigScore {
    pub config: WeightConfig,
    pub c: f64,
    pub correct: usize,
    pub n: usize,
    pub accuracy: f64,
    #[serde(default)]
    pub pruned: bool,
}

fn cmp_f64s(a: impl Iterator<Item = f64>, b: impl Iterator<Item = f64>) -> Ordering {
    a.zip(b)
        .map(|(x, y)| x.total_cmp(&y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Total preference order: more correct first, then smaller depth, fewer
/// enabled node kinds, and finally weights, alphas and C lexicographically.
pub fn preference(a: &ConfigScore, b: &ConfigScore) -> Ordering {
    b.correct
        .cmp(&a.correct)
        .then(a.config.max_depth.cmp(&b.config.max_depth))
        .then(a.config.enabled_node_kinds().cmp(&b.config.enabled_node_kinds()))
        .then_with(|| {
            cmp_f64s(
                NodeKind::ALL.iter().map(|k| a.config.node_weight(*k)),
                NodeKind::ALL.iter().map(|k| b.config.node_weight(*k)),
            )
        })
        .then_with(|| {
            cmp_f64s(
                EdgeKind::ALL.iter().map(|k| a.config.edge_weight(*k)),
                EdgeKind::ALL.iter().map(|k| b.config.edge_weight(*k)),
            )
        })
        .then_with(|| a.config.alphas.len().cmp(&b.config.alphas.len()))
        .then_with(|| cmp_f64s(a.config.alphas.iter().copied(), b.config.alphas.iter().copied()))
        .then(a.c.total_cmp(&b.c))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridOutcome {
    pub kernel: KernelKind,
    pub split_seed: u64,
    pub split: Split,
    pub best: ConfigScore,
    pub scores: Vec<ConfigScore>,
}

/// Assignments scored per round of the pruned search. Fixed so that which
/// configurations get pruned does not depend on the thread count.
const ROUND: usize = 16;

fn score(k: &KernelMatrix, labels: &[Label], config: &WeightConfig, cs: &[f64], floor: &mut usize) -> Vec<ConfigScore> {
    cs.iter()
        .map(|&c| {
            let n = k.size();
            let (correct, pruned) = match loo_cv_raw(k.values(), n, labels, c, *floor) {
                Ok(r) => {
                    *floor = (*floor).max(r.correct);
                    (r.correct, false)
                }
                Err(bound) => (bound, true),
            };
            ConfigScore {
                config: config.clone(),
                c,
                correct,
                n,
                accuracy: if n == 0 { 0.0 } else { correct as f64 / n as f64 },
                pruned,
            }
        })
        .collect()
}

/// Scores every configuration by LOO accuracy on `train` (indices into
/// `instances`). Scores come back in enumeration order.
///
/// Assignments are visited from the last (every kind enabled) backwards in
/// rounds; a configuration's LOO stops once it cannot reach the best count
/// seen in earlier rounds or earlier in its own assignment. The winner is
/// the same as with exhaustive scoring.
pub fn grid_scores(
    instances: &[Instance],
    train: &[usize],
    spec: &GridSpec,
    kernel: KernelKind,
) -> Result<Vec<ConfigScore>, GridError> {
    spec.validate()?;
    let subset: Vec<Instance> = train.iter().map(|&i| instances[i].clone()).collect();
    let labels: Vec<Label> = subset.iter().map(|i| i.label).collect();

    if kernel == KernelKind::Bow {
        let k = bow_gram(&subset, BOW_NGRAM);
        return Ok(score(&k, &labels, &WeightConfig::uniform(0), &spec.cs, &mut 0));
    }
    if kernel == KernelKind::Wl
        && spec.node_weights.iter().chain(&spec.edge_weights).any(|w| *w != 0.0 && *w != 1.0)
    {
        return Err(GridError::Spec("the WL kernel accepts only 0/1 weights".into()));
    }

    let mut depths = spec.depths.clone();
    depths.sort_unstable();
    depths.dedup();
    let max_depth = *depths.last().expect("validated non-empty");

    let assignments: Vec<([f64; 6], [f64; 5])> = spec
        .node_assignments()
        .into_iter()
        .flat_map(|n| spec.edge_assignments().into_iter().map(move |e| (n, e)))
        .collect();

    let run = |(nodes, edges): &([f64; 6], [f64; 5]), mut floor: usize| -> Vec<ConfigScore> {
        let mut out = Vec::new();
        match kernel {
            KernelKind::Wl => {
                let base = weight_config(nodes, edges, max_depth, uniform_alphas(max_depth), spec.walk_origin);
                let grams = wl_gram_by_depth(&subset, max_depth, KindMask::from_nonzero(&base));
                for &d in &depths {
                    let cfg = weight_config(nodes, edges, d, uniform_alphas(d), spec.walk_origin);
                    out.extend(score(&grams[d], &labels, &cfg, &spec.cs, &mut floor));
                }
            }
            KernelKind::New => {
                let base = weight_config(nodes, edges, max_depth, uniform_alphas(max_depth), spec.walk_origin);
                let basis = new_basis_grams(&subset, &base);
                for &d in &depths {
                    for alphas in spec.alphas_for(d) {
                        let refs: Vec<&KernelMatrix> = basis[..=d].iter().collect();
                        let k = KernelMatrix::weighted_sum(&refs, &alphas);
                        let cfg = weight_config(nodes, edges, d, alphas, spec.walk_origin);
                        out.extend(score(&k, &labels, &cfg, &spec.cs, &mut floor));
                    }
                }
            }
            KernelKind::Bow => unreachable!(),
        }
        out
    };

    let mut per_assignment: Vec<Vec<ConfigScore>> = vec![Vec::new(); assignments.len()];
    let order: Vec<usize> = (0..assignments.len()).rev().collect();
    let mut floor = 0;
    for round in order.chunks(ROUND) {
        let results: Vec<Vec<ConfigScore>> = round.par_iter().map(|&a| run(&assignments[a], floor)).collect();
        for (&a, r) in round.iter().zip(results) {
            floor = r.iter().filter(|s| !s.pruned).map(|s| s.correct).fold(floor, usize::max);
            per_assignment[a] = r;
        }
    }
    Ok(per_assignment.into_iter().flatten().collect())
}

pub fn select_best(scores: &[ConfigScore]) -> Option<&ConfigScore> {
    scores.iter().min_by(|a, b| preference(a, b))
}

/// Stratified split by `split_seed`, then LOO grid search on the training
/// part.
pub fn grid_search(
    instances: &[Instance],
    spec: &GridSpec,
    kernel: KernelKind,
    split_seed: u64,
) -> Result<GridOutcome, GridError> {
    if instances.len() < MIN_GRID_INSTANCES {
        return Err(GridError::TooFew(instances.len()));
    }
    spec.validate()?;
    let labels: Vec<Label> = instances.iter().map(|i| i.label).collect();
    let split = stratified_split(&labels, spec.test_fraction, split_seed);
    let scores = grid_scores(instances, &split.train, spec, kernel)?;
    let best = select_best(&scores).ok_or(GridError::Empty)?.clone();
    Ok(GridOutcome {
        kernel,
        split_seed,
        split,
        best,
        scores,
    })
}

/// Gram matrix of `kernel` under `config` over all instances.
pub fn kernel_gram(instances: &[Instance], kernel: KernelKind, config: &WeightConfig) -> Result<KernelMatrix, ConfigError> {
    match kernel {
        KernelKind::Wl => {
            config.validate()?;
            Ok(wl_gram(instances, config.max_depth, KindMask::from_config(config)?))
        }
        KernelKind::New => new_gram(instances, config),
        KernelKind::Bow => Ok(bow_gram(instances, BOW_NGRAM)),
    }
}
