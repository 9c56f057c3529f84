//! Weisfeiler-Lehman subtree kernel.
//!
//! At iteration 0 a node is labeled by its `(kind, label)` pair. At iteration
//! `i` a node with out-neighbors is relabeled by its previous label followed
//! by the sorted previous labels of its out-neighbors, compressed through a
//! dictionary shared by every graph in the comparison set. Nodes without
//! out-neighbors keep their label. The kernel sums, over iterations, the dot
//! product of the compressed-label histograms.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{KernelMatrix, KindMask};
use crate::graph::{Instance, NodeId, NodeKind, OmniGraph};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Key {
    Base(NodeKind, String),
    Augmented(u32, Vec<u32>),
}

/// Injective map from multiset-label keys to integers, in insertion order.
#[derive(Debug, Clone, Default)]
pub struct WlDictionary {
    ids: HashMap<Key, u32>,
    keys: Vec<Key>,
}

impl WlDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    fn intern(&mut self, key: Key) -> u32 {
        if let Some(&id) = self.ids.get(&key) {
            return id;
        }
        let id = self.keys.len() as u32;
        self.keys.push(key.clone());
        self.ids.insert(key, id);
        id
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Uncompressed multiset-label strings for every id, indexed by id.
    ///
    /// A base label renders as `Kind:label`; an augmented label renders as
    /// the node's base label followed by `{child,child,...}` with the
    /// children's strings sorted. Characters `\ { } ,` inside labels are
    /// backslash-escaped.
    pub fn label_strings(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::with_capacity(self.keys.len());
        let mut base_of: Vec<u32> = Vec::with_capacity(self.keys.len());
        for (id, key) in self.keys.iter().enumerate() {
            match key {
                Key::Base(kind, label) => {
                    out.push(base_string(*kind, label));
                    base_of.push(id as u32);
                }
                Key::Augmented(prev, children) => {
                    let base = base_of[*prev as usize];
                    let mut parts: Vec<&str> =
                        children.iter().map(|&c| out[c as usize].as_str()).collect();
                    parts.sort_unstable();
                    let s = format!("{}{{{}}}", out[base as usize], parts.join(","));
                    out.push(s);
                    base_of.push(base);
                }
            }
        }
        out
    }
}

pub(crate) fn escape_label(label: &str) -> String {
    let mut s = String::with_capacity(label.len());
    for c in label.chars() {
        if matches!(c, '\\' | '{' | '}' | ',') {
            s.push('\\');
        }
        s.push(c);
    }
    s
}

fn base_string(kind: NodeKind, label: &str) -> String {
    format!("{}:{}", kind.as_str(), escape_label(label))
}

/// Compressed labels of one graph's retained nodes at each iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WlLabeling {
    /// Ids of the nodes that survived the kind mask, in graph order.
    pub node_ids: Vec<NodeId>,
    /// `iterations[i][v]` is the label of `node_ids[v]` at iteration `i`.
    pub iterations: Vec<Vec<u32>>,
}

impl WlLabeling {
    pub fn feature_map(&self) -> WlFeatureMap {
        let per_iteration = self
            .iterations
            .iter()
            .map(|labels| {
                let mut sorted = labels.clone();
                sorted.sort_unstable();
                let mut hist: Vec<(u32, u32)> = Vec::new();
                for l in sorted {
                    match hist.last_mut() {
                        Some((last, c)) if *last == l => *c += 1,
                        _ => hist.push((l, 1)),
                    }
                }
                hist
            })
            .collect();
        WlFeatureMap { per_iteration }
    }
}

/// Per-iteration histogram of compressed labels, sorted by label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WlFeatureMap {
    pub per_iteration: Vec<Vec<(u32, u32)>>,
}

impl WlFeatureMap {
    /// Sum over shared iterations of histogram dot products.
    pub fn dot(&self, other: &WlFeatureMap) -> u64 {
        self.per_iteration
            .iter()
            .zip(&other.per_iteration)
            .map(|(a, b)| sparse_dot(a, b))
            .sum()
    }

    /// Dot product restricted to iteration `i`.
    pub fn dot_at(&self, other: &WlFeatureMap, i: usize) -> u64 {
        match (self.per_iteration.get(i), other.per_iteration.get(i)) {
            (Some(a), Some(b)) => sparse_dot(a, b),
            _ => 0,
        }
    }

    /// Replace compressed labels with their uncompressed strings.
    pub fn explicit(&self, dict_strings: &[String]) -> ExplicitFeatureMap {
        let mut map = BTreeMap::new();
        for (i, hist) in self.per_iteration.iter().enumerate() {
            let entry: &mut BTreeMap<String, u32> = map.entry(i).or_default();
            for &(l, c) in hist {
                *entry.entry(dict_strings[l as usize].clone()).or_default() += c;
            }
        }
        ExplicitFeatureMap(map)
    }
}

fn sparse_dot(a: &[(u32, u32)], b: &[(u32, u32)]) -> u64 {
    let (mut i, mut j, mut acc) = (0, 0, 0u64);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1 as u64 * b[j].1 as u64;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

/// Dictionary-independent feature map: `{iteration: {label_string: count}}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExplicitFeatureMap(pub BTreeMap<usize, BTreeMap<String, u32>>);

impl ExplicitFeatureMap {
    pub fn dot(&self, other: &ExplicitFeatureMap) -> u64 {
        let mut acc = 0u64;
        for (i, a) in &self.0 {
            let Some(b) = other.0.get(i) else { continue };
            for (label, &ca) in a {
                if let Some(&cb) = b.get(label) {
                    acc += ca as u64 * cb as u64;
                }
            }
        }
        acc
    }

    pub fn iterations(&self) -> usize {
        self.0.len()
    }
}

/// Shared relabeling state for one comparison set.
#[derive(Debug, Clone)]
pub struct WlContext {
    dict: WlDictionary,
    mask: KindMask,
}

impl WlContext {
    pub fn new(mask: KindMask) -> Self {
        WlContext {
            dict: WlDictionary::new(),
            mask,
        }
    }

    pub fn dictionary(&self) -> &WlDictionary {
        &self.dict
    }

    pub fn mask(&self) -> KindMask {
        self.mask
    }

    /// Relabel `g` for iterations `0..=h`, extending the shared dictionary.
    pub fn relabel(&mut self, g: &OmniGraph, h: usize) -> WlLabeling {
        let mut node_ids = Vec::new();
        let mut pos: HashMap<NodeId, usize> = HashMap::new();
        let mut current = Vec::new();
        for n in g.nodes() {
            if !self.mask.node(n.kind) || pos.contains_key(&n.id) {
                continue;
            }
            pos.insert(n.id, node_ids.len());
            node_ids.push(n.id);
            current.push(self.dict.intern(Key::Base(n.kind, n.label.clone())));
        }
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); node_ids.len()];
        for e in g.edges() {
            if !self.mask.edge(e.kind) {
                continue;
            }
            if let (Some(&a), Some(&b)) = (pos.get(&e.from), pos.get(&e.to)) {
                out[a].push(b);
            }
        }

        let mut iterations = Vec::with_capacity(h + 1);
        iterations.push(current);
        for _ in 0..h {
            let prev = iterations.last().expect("iteration 0 exists");
            let next: Vec<u32> = (0..node_ids.len())
                .map(|v| {
                    if out[v].is_empty() {
                        return prev[v];
                    }
                    let mut children: Vec<u32> = out[v].iter().map(|&c| prev[c]).collect();
                    children.sort_unstable();
                    self.dict.intern(Key::Augmented(prev[v], children))
                })
                .collect();
            iterations.push(next);
        }
        WlLabeling {
            node_ids,
            iterations,
        }
    }

    pub fn feature_map(&mut self, g: &OmniGraph, h: usize) -> WlFeatureMap {
        self.relabel(g, h).feature_map()
    }
}

/// Relabel every graph against one shared dictionary.
pub fn wl_relabel(
    graphs: &[&OmniGraph],
    h: usize,
    mask: KindMask,
) -> (WlDictionary, Vec<WlLabeling>) {
    let mut ctx = WlContext::new(mask);
    let labelings = graphs.iter().map(|g| ctx.relabel(g, h)).collect();
    (ctx.dict, labelings)
}

/// WL subtree kernel summed over iterations `0..=h`.
pub fn wl_kernel(g1: &OmniGraph, g2: &OmniGraph, h: usize, mask: KindMask) -> f64 {
    let mut ctx = WlContext::new(mask);
    let a = ctx.feature_map(g1, h);
    let b = ctx.feature_map(g2, h);
    a.dot(&b) as f64
}

/// Explicit feature map with uncompressed label strings.
pub fn wl_feature_map(g: &OmniGraph, h: usize, mask: KindMask) -> ExplicitFeatureMap {
    let mut ctx = WlContext::new(mask);
    let map = ctx.feature_map(g, h);
    map.explicit(&ctx.dict.label_strings())
}

/// Feature maps of every instance's union graph under one dictionary.
pub fn instance_feature_maps(
    instances: &[Instance],
    h: usize,
    mask: KindMask,
) -> (WlContext, Vec<WlFeatureMap>) {
    let mut ctx = WlContext::new(mask);
    let maps = instances
        .iter()
        .map(|inst| ctx.feature_map(&inst.union_graph(), h))
        .collect();
    (ctx, maps)
}

/// Gram matrix of the WL kernel at depth `h` over instance union graphs.
pub fn wl_gram(instances: &[Instance], h: usize, mask: KindMask) -> KernelMatrix {
    let (_, maps) = instance_feature_maps(instances, h, mask);
    let ids = instances.iter().map(Instance::id).collect();
    KernelMatrix::from_fn(ids, |i, j| maps[i].dot(&maps[j]) as f64)
}

/// Gram matrices for every depth `0..=h_max`; entry `d` equals
/// `wl_gram(instances, d, mask)`.
pub fn wl_gram_by_depth(instances: &[Instance], h_max: usize, mask: KindMask) -> Vec<KernelMatrix> {
    let (_, maps) = instance_feature_maps(instances, h_max, mask);
    let ids: Vec<String> = instances.iter().map(Instance::id).collect();
    let mut out: Vec<KernelMatrix> = Vec::with_capacity(h_max + 1);
    for d in 0..=h_max {
        let layer = KernelMatrix::from_fn(ids.clone(), |i, j| maps[i].dot_at(&maps[j], d) as f64);
        let cumulative = match out.last() {
            Some(prev) => KernelMatrix::weighted_sum(&[prev, &layer], &[1.0, 1.0]),
            None => layer,
        };
        out.push(cumulative);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    /// Reconstruction of the toy pair: G has a 0-node pointing at a 1-node
    /// plus a second 1-node pointing at the first; G' has a 0-node pointing
    /// at a 1-node plus an isolated 2-node.
    pub(crate) fn toy_pair() -> (OmniGraph, OmniGraph) {
        let mut g = GraphBuilder::new("G");
        let a = g.add_node(NodeKind::FrameName, "0");
        let b = g.add_node(NodeKind::FrameName, "1");
        let c = g.add_node(NodeKind::FrameName, "1");
        g.connect(a, b).unwrap();
        g.connect(c, b).unwrap();
        let mut h = GraphBuilder::new("G'");
        let u = h.add_node(NodeKind::FrameName, "0");
        let v = h.add_node(NodeKind::FrameName, "1");
        h.add_node(NodeKind::FrameName, "2");
        h.connect(u, v).unwrap();
        (g.finish(), h.finish())
    }

    #[test]
    fn toy_iteration_sums() {
        let (g, h) = toy_pair();
        let mut ctx = WlContext::new(KindMask::all());
        let a = ctx.feature_map(&g, 1);
        let b = ctx.feature_map(&h, 1);
        assert_eq!(a.dot_at(&b, 0), 3);
        assert_eq!(a.dot_at(&b, 1), 2);
        assert_eq!(wl_kernel(&g, &h, 1, KindMask::all()), 5.0);
    }

    #[test]
    fn isolated_node_keeps_label() {
        let mut b = GraphBuilder::new("s");
        b.add_node(NodeKind::FrameName, "X");
        let g = b.finish();
        let map = wl_feature_map(&g, 2, KindMask::all());
        assert_eq!(map.iterations(), 3);
        for i in 0..3 {
            assert_eq!(map.0[&i].get("FrameName:X"), Some(&1));
        }
    }

    #[test]
    fn self_kernel_at_depth_zero_is_sum_of_squares() {
        let (g, _) = toy_pair();
        assert_eq!(wl_kernel(&g, &g, 0, KindMask::all()), 1.0 + 4.0);
    }

    #[test]
    fn disjoint_labels_give_zero() {
        let mut a = GraphBuilder::new("a");
        a.add_node(NodeKind::FrameName, "A");
        let mut b = GraphBuilder::new("b");
        b.add_node(NodeKind::FrameName, "B");
        let (a, b) = (a.finish(), b.finish());
        for h in 0..4 {
            assert_eq!(wl_kernel(&a, &b, h, KindMask::all()), 0.0);
        }
    }

    #[test]
    fn label_strings_escape_specials() {
        let mut b = GraphBuilder::new("s");
        let fe = b.add_node(NodeKind::FrameElement, "F.E");
        let f = b.add_node(NodeKind::FrameName, "F");
        let li = b.add_node(NodeKind::LexicalItem, "a,{b}");
        b.connect(fe, f).unwrap();
        b.connect(li, fe).unwrap();
        let map = wl_feature_map(&b.finish(), 1, KindMask::all());
        assert!(map.0[&1].contains_key("LexicalItem:a\\,\\{b\\}{FrameElement:F.E}"));
        assert!(map.0[&1].contains_key("FrameElement:F.E{FrameName:F}"));
    }

    #[test]
    fn masked_kind_is_deleted() {
        let (g, h) = toy_pair();
        let mask = KindMask::all().with_node(NodeKind::FrameName, false);
        assert_eq!(wl_kernel(&g, &h, 2, mask), 0.0);
    }

    #[test]
    fn gram_by_depth_matches_direct() {
        use crate::graph::{Instance, Label};
        use chrono::NaiveDate;
        let (g, h) = toy_pair();
        let d = NaiveDate::from_ymd_opt(2010, 1, 4).unwrap();
        let insts = vec![
            Instance::new("a", d, Label::Positive, vec![g.clone()]).unwrap(),
            Instance::new("b", d, Label::Negative, vec![h.clone(), g]).unwrap(),
        ];
        let by_depth = wl_gram_by_depth(&insts, 2, KindMask::all());
        for (d, m) in by_depth.iter().enumerate() {
            assert_eq!(m, &wl_gram(&insts, d, KindMask::all()));
        }
    }
}
