use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{Instance, Label};
use crate::kernel::wl::WlContext;
use crate::kernel::KindMask;

pub const DEFAULT_MIN_SUPPORT: usize = 2;

/// A WL feature: an uncompressed multiset-label string at one iteration.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FeatureKey {
    pub depth: usize,
    pub feature: String,
}

/// Binary instance-by-feature matrix stored by column.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PresenceMatrix {
    pub instance_ids: Vec<String>,
    /// Sorted by (depth, feature string).
    pub features: Vec<FeatureKey>,
    /// `columns[f]` lists, ascending, the instances containing feature `f`.
    pub columns: Vec<Vec<usize>>,
}

impl PresenceMatrix {
    pub fn column(&self, f: usize) -> Vec<bool> {
        let mut col = vec![false; self.instance_ids.len()];
        for &i in &self.columns[f] {
            col[i] = true;
        }
        col
    }

    pub fn find(&self, depth: usize, feature: &str) -> Option<usize> {
        self.features
            .binary_search_by(|k| (k.depth, k.feature.as_str()).cmp(&(depth, feature)))
            .ok()
    }
}

/// Which WL features (iterations `0..=h`) occur in each instance's union
/// graph. Within one iteration compressed ids and label strings are in
/// one-to-one correspondence, so presence is tracked by id.
pub fn feature_presence(instances: &[Instance], h: usize, mask: KindMask) -> PresenceMatrix {
    let mut ctx = WlContext::new(mask);
    let maps: Vec<_> = instances
        .iter()
        .map(|inst| ctx.feature_map(&inst.union_graph(), h))
        .collect();
    let strings = ctx.dictionary().label_strings();

    let mut index: HashMap<(usize, u32), usize> = HashMap::new();
    let mut keys: Vec<FeatureKey> = Vec::new();
    let mut columns: Vec<Vec<usize>> = Vec::new();
    for (row, map) in maps.iter().enumerate() {
        for (depth, hist) in map.per_iteration.iter().enumerate() {
            for &(id, _) in hist {
                let col = *index.entry((depth, id)).or_insert_with(|| {
                    keys.push(FeatureKey {
                        depth,
                        feature: strings[id as usize].clone(),
                    });
                    columns.push(Vec::new());
                    keys.len() - 1
                });
                columns[col].push(row);
            }
        }
    }
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    PresenceMatrix {
        instance_ids: instances.iter().map(Instance::id).collect(),
        features: order.iter().map(|&i| keys[i].clone()).collect(),
        columns: order.iter().map(|&i| std::mem::take(&mut columns[i])).collect(),
    }
}

/// Mutual information in bits from a 2x2 table: `n11` present and +1,
/// `n10` present and -1, `n01` absent and +1, `n00` absent and -1.
pub fn mi_from_counts(n11: usize, n10: usize, n01: usize, n00: usize) -> f64 {
    let n = (n11 + n10 + n01 + n00) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let present = (n11 + n10) as f64;
    let absent = (n01 + n00) as f64;
    let pos = (n11 + n01) as f64;
    let neg = (n10 + n00) as f64;
    let term = |nxy: usize, nx: f64, ny: f64| {
        if nxy == 0 {
            0.0
        } else {
            let p = nxy as f64 / n;
            p * (nxy as f64 * n / (nx * ny)).log2()
        }
    };
    let mi = term(n11, present, pos) + term(n10, present, neg) + term(n01, absent, pos) + term(n00, absent, neg);
    mi.max(0.0)
}

pub fn mutual_information(presence: &[bool], labels: &[Label]) -> f64 {
    assert_eq!(presence.len(), labels.len(), "column and labels differ in length");
    let mut c = [0usize; 4];
    for (&p, &l) in presence.iter().zip(labels) {
        let idx = match (p, l) {
            (true, Label::Positive) => 0,
            (true, Label::Negative) => 1,
            (false, Label::Positive) => 2,
            (false, Label::Negative) => 3,
        };
        c[idx] += 1;
    }
    mi_from_counts(c[0], c[1], c[2], c[3])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedFeature {
    pub feature: String,
    pub depth: usize,
    pub mi: f64,
    pub support_pos: usize,
    pub support_neg: usize,
}

/// Features ranked by MI with the labels, descending; ties go to the lower
/// depth, then the lexicographically smaller string. Features present in
/// fewer than `min_support` instances are dropped.
pub fn rank_features(
    instances: &[Instance],
    h: usize,
    mask: KindMask,
    top_k: usize,
    min_support: usize,
) -> Vec<RankedFeature> {
    let pm = feature_presence(instances, h, mask);
    let labels: Vec<Label> = instances.iter().map(|i| i.label).collect();
    let n_pos = labels.iter().filter(|l| **l == Label::Positive).count();
    let n_neg = labels.len() - n_pos;
    let mut ranked: Vec<RankedFeature> = pm
        .features
        .par_iter()
        .zip(pm.columns.par_iter())
        .filter(|(_, rows)| rows.len() >= min_support)
        .map(|(key, rows)| {
            let pos = rows.iter().filter(|&&r| labels[r] == Label::Positive).count();
            let neg = rows.len() - pos;
            RankedFeature {
                feature: key.feature.clone(),
                depth: key.depth,
                mi: mi_from_counts(pos, neg, n_pos - pos, n_neg - neg),
                support_pos: pos,
                support_neg: neg,
            }
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.mi.total_cmp(&a.mi)
            .then(a.depth.cmp(&b.depth))
            .then_with(|| a.feature.cmp(&b.feature))
    });
    ranked.truncate(top_k);
    ranked
}

/// Tab-separated ranking with a header row.
pub fn ranking_tsv(ranked: &[RankedFeature]) -> String {
    let mut out = String::from("rank\tmi\tsupport_pos\tsupport_neg\tdepth\tfeature\n");
    for (i, r) in ranked.iter().enumerate() {
        let _ = writeln!(
            out,
            "{}\t{:.6}\t{}\t{}\t{}\t{}",
            i + 1,
            r.mi,
            r.support_pos,
            r.support_neg,
            r.depth,
            r.feature
        );
    }
    out
}
