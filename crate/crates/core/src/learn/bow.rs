//! Bag-of-n-grams baseline over the raw tokens kept on sentence graphs.

use std::collections::{BTreeMap, HashMap};

use crate::graph::Instance;
use crate::kernel::KernelMatrix;

/// n-gram counts of every sentence in a forest; n-grams do not cross
/// sentence boundaries. Tokens are lowercased and joined by a space.
pub fn bow_features(instances: &[Instance], n_max: usize) -> Vec<BTreeMap<String, u32>> {
    instances
        .iter()
        .map(|inst| {
            let mut counts = BTreeMap::new();
            for g in &inst.graphs {
                let toks: Vec<String> = g.tokens().iter().map(|t| t.to_lowercase()).collect();
                for n in 1..=n_max {
                    for w in toks.windows(n) {
                        *counts.entry(w.join(" ")).or_insert(0) += 1;
                    }
                }
            }
            counts
        })
        .collect()
}

/// Cosine-normalized linear kernel over n-gram counts (1..=n_max).
/// Instances without tokens get zero rows.
pub fn bow_gram(instances: &[Instance], n_max: usize) -> KernelMatrix {
    let feats = bow_features(instances, n_max);
    let mut vocab: HashMap<&str, u32> = HashMap::new();
    let sparse: Vec<Vec<(u32, f64)>> = feats
        .iter()
        .map(|m| {
            let mut v: Vec<(u32, f64)> = m
                .iter()
                .map(|(k, &c)| {
                    let next = vocab.len() as u32;
                    (*vocab.entry(k.as_str()).or_insert(next), c as f64)
                })
                .collect();
            v.sort_unstable_by_key(|p| p.0);
            v
        })
        .collect();
    let norms: Vec<f64> = sparse
        .iter()
        .map(|v| v.iter().map(|(_, c)| c * c).sum::<f64>().sqrt())
        .collect();
    let ids = instances.iter().map(Instance::id).collect();
    KernelMatrix::from_fn(ids, |i, j| {
        if norms[i] == 0.0 || norms[j] == 0.0 {
            return 0.0;
        }
        if i == j {
            return 1.0;
        }
        sparse_dot(&sparse[i], &sparse[j]) / (norms[i] * norms[j])
    })
}

fn sparse_dot(a: &[(u32, f64)], b: &[(u32, f64)]) -> f64 {
    let (mut i, mut j, mut s) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                s += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    s
}
