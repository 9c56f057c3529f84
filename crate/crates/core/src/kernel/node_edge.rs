//! Node-edge-weighting (NEW) graph kernel.
//!
//! Nodes match through a weighted delta on `(kind, label)`, edges through a
//! weighted delta on their ordered endpoint kinds. The degree-`p` basis
//! kernel sums, over every pair of directed walks with `p` edges (one walk
//! per graph), the product of all `p + 1` aligned node kernels and all `p`
//! aligned edge kernels. It is evaluated by dynamic programming over pairs of
//! matching nodes, so only node pairs with a non-zero node kernel are ever
//! visited.
//!
//! Basis kernels are normalized by the larger of the two self-similarities
//! and mixed with the `alphas` of the [`WeightConfig`].

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::KernelMatrix;
use crate::graph::{ConfigError, EdgeKind, Instance, Node, NodeKind, OmniGraph, WalkOrigin, WeightConfig};

/// `w(kind)` when kind and label both match, else 0.
pub fn node_kernel(a: &Node, b: &Node, cfg: &WeightConfig) -> f64 {
    if a.kind == b.kind && a.label == b.label {
        cfg.node_weight(a.kind)
    } else {
        0.0
    }
}

/// Ordered endpoint kinds of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EdgeSignature {
    pub from: NodeKind,
    pub to: NodeKind,
}

impl EdgeSignature {
    pub fn new(from: NodeKind, to: NodeKind) -> Self {
        EdgeSignature { from, to }
    }
}

/// Weight of the edge kind when both ordered endpoint-kind pairs agree.
/// Labels of the endpoints play no part.
pub fn edge_kernel(a: EdgeSignature, b: EdgeSignature, cfg: &WeightConfig) -> f64 {
    if a != b {
        return 0.0;
    }
    EdgeKind::for_endpoints(a.from, a.to)
        .map(|k| cfg.edge_weight(k))
        .unwrap_or(0.0)
}

/// `raw / max(self1, self2)`, 0 when both self-values vanish, clamped to
/// `[0, 1]`.
pub fn normalize_basis(raw: f64, self1: f64, self2: f64) -> f64 {
    let denom = self1.max(self2);
    if denom <= 0.0 || raw <= 0.0 {
        return 0.0;
    }
    (raw / denom).min(1.0)
}

/// Interns `(kind, label)` pairs so graphs can be compared by integer class.
#[derive(Debug, Default, Clone)]
pub struct LabelInterner {
    ids: HashMap<(NodeKind, String), u32>,
}

impl LabelInterner {
    pub fn new() -> Self {
        Self::default()
    }

    fn intern(&mut self, kind: NodeKind, label: &str) -> u32 {
        if let Some(&id) = self.ids.get(&(kind, label.to_string())) {
            return id;
        }
        let id = self.ids.len() as u32;
        self.ids.insert((kind, label.to_string()), id);
        id
    }
}

/// A graph prepared for walk comparison: zero-weight nodes and edges are
/// dropped and labels are interned.
#[derive(Debug, Clone)]
pub struct WalkGraph {
    class: Vec<u32>,
    kind: Vec<NodeKind>,
    weight: Vec<f64>,
    /// Out-edges as `(target, edge kind)`.
    out: Vec<Vec<(u32, EdgeKind)>>,
    /// `(class, node)` sorted by class, for pairing nodes across graphs.
    by_class: Vec<(u32, u32)>,
}

impl WalkGraph {
    pub fn prepare(g: &OmniGraph, cfg: &WeightConfig, interner: &mut LabelInterner) -> Self {
        let mut pos: HashMap<u32, u32> = HashMap::with_capacity(g.node_count());
        let mut class = Vec::new();
        let mut kind = Vec::new();
        let mut weight = Vec::new();
        for n in g.nodes() {
            let w = cfg.node_weight(n.kind);
            if w <= 0.0 || pos.contains_key(&n.id) {
                continue;
            }
            pos.insert(n.id, class.len() as u32);
            class.push(interner.intern(n.kind, &n.label));
            kind.push(n.kind);
            weight.push(w);
        }
        let mut out = vec![Vec::new(); class.len()];
        for e in g.edges() {
            if cfg.edge_weight(e.kind) <= 0.0 {
                continue;
            }
            if let (Some(&a), Some(&b)) = (pos.get(&e.from), pos.get(&e.to)) {
                out[a as usize].push((b, e.kind));
            }
        }
        let mut by_class: Vec<(u32, u32)> = class
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i as u32))
            .collect();
        by_class.sort_unstable();
        WalkGraph {
            class,
            kind,
            weight,
            out,
            by_class,
        }
    }

    pub fn node_count(&self) -> usize {
        self.class.len()
    }
}

/// Raw basis kernels `k^0..=k^p_max` between two prepared graphs.
pub fn walk_basis(
    a: &WalkGraph,
    b: &WalkGraph,
    p_max: usize,
    cfg: &WeightConfig,
) -> Vec<f64> {
    let mut result = vec![0.0; p_max + 1];
    let nb = b.node_count();
    if a.node_count() == 0 || nb == 0 {
        return result;
    }

    // Matching node pairs and their node-kernel values.
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.by_class.len() && j < b.by_class.len() {
        let (ca, cb) = (a.by_class[i].0, b.by_class[j].0);
        if ca < cb {
            i += 1;
        } else if ca > cb {
            j += 1;
        } else {
            let i_end = i + a.by_class[i..].iter().take_while(|x| x.0 == ca).count();
            let j_end = j + b.by_class[j..].iter().take_while(|x| x.0 == cb).count();
            for &(_, u) in &a.by_class[i..i_end] {
                for &(_, v) in &b.by_class[j..j_end] {
                    pairs.push((u, v));
                }
            }
            i = i_end;
            j = j_end;
        }
    }
    if pairs.is_empty() {
        return result;
    }
    let node_k: Vec<f64> = pairs.iter().map(|&(u, _)| a.weight[u as usize]).collect();
    let anchored = cfg.walk_origin == WalkOrigin::DesignatedEntity;
    let is_origin: Vec<bool> = pairs
        .iter()
        .map(|&(u, _)| !anchored || a.kind[u as usize] == NodeKind::DesignatedEntity)
        .collect();

    result[0] = node_k.iter().sum();
    if p_max == 0 {
        return result;
    }

    let mut index = vec![u32::MAX; a.node_count() * nb];
    for (m, &(u, v)) in pairs.iter().enumerate() {
        index[u as usize * nb + v as usize] = m as u32;
    }
    // Successor pairs with the aligned edge kernel.
    let mut succ: Vec<Vec<(u32, f64)>> = Vec::with_capacity(pairs.len());
    for &(u, v) in &pairs {
        let mut s = Vec::new();
        for &(u2, ka) in &a.out[u as usize] {
            for &(v2, kb) in &b.out[v as usize] {
                let m2 = index[u2 as usize * nb + v2 as usize];
                if m2 == u32::MAX {
                    continue;
                }
                let sig_a = EdgeSignature::new(a.kind[u as usize], a.kind[u2 as usize]);
                let sig_b = EdgeSignature::new(b.kind[v as usize], b.kind[v2 as usize]);
                if ka != kb || sig_a != sig_b {
                    continue;
                }
                let w = cfg.edge_weight(ka);
                if w > 0.0 {
                    s.push((m2, w));
                }
            }
        }
        succ.push(s);
    }

    // walks[m] = weighted count of aligned walk pairs of the current length
    // starting at pair m.
    let mut walks = node_k.clone();
    let mut next = vec![0.0; pairs.len()];
    for p in 1..=p_max {
        let mut total = 0.0;
        for m in 0..pairs.len() {
            let mut acc = 0.0;
            for &(m2, w) in &succ[m] {
                acc += w * walks[m2 as usize];
            }
            let v = node_k[m] * acc;
            next[m] = v;
            if is_origin[m] {
                total += v;
            }
        }
        result[p] = total;
        std::mem::swap(&mut walks, &mut next);
    }
    result
}

/// Raw degree-`p` basis kernel.
pub fn basis_kernel(g1: &OmniGraph, g2: &OmniGraph, p: usize, cfg: &WeightConfig) -> f64 {
    basis_kernels(g1, g2, p, cfg)[p]
}

/// Raw basis kernels for degrees `0..=p_max`.
pub fn basis_kernels(g1: &OmniGraph, g2: &OmniGraph, p_max: usize, cfg: &WeightConfig) -> Vec<f64> {
    let mut interner = LabelInterner::new();
    let a = WalkGraph::prepare(g1, cfg, &mut interner);
    let b = WalkGraph::prepare(g2, cfg, &mut interner);
    walk_basis(&a, &b, p_max, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeReport {
    pub degree: usize,
    pub raw: f64,
    pub self_first: f64,
    pub self_second: f64,
    pub normalized: f64,
}

/// Per-degree breakdown of one kernel evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisKernelReport {
    pub degrees: Vec<DegreeReport>,
    pub alphas: Vec<f64>,
    pub value: f64,
}

pub fn explain(g1: &OmniGraph, g2: &OmniGraph, cfg: &WeightConfig) -> Result<BasisKernelReport, ConfigError> {
    cfg.validate()?;
    let mut interner = LabelInterner::new();
    let a = WalkGraph::prepare(g1, cfg, &mut interner);
    let b = WalkGraph::prepare(g2, cfg, &mut interner);
    let p = cfg.max_depth;
    let raw = walk_basis(&a, &b, p, cfg);
    let s1 = walk_basis(&a, &a, p, cfg);
    let s2 = walk_basis(&b, &b, p, cfg);
    let degrees: Vec<DegreeReport> = (0..=p)
        .map(|d| DegreeReport {
            degree: d,
            raw: raw[d],
            self_first: s1[d],
            self_second: s2[d],
            normalized: normalize_basis(raw[d], s1[d], s2[d]),
        })
        .collect();
    let value = degrees
        .iter()
        .zip(&cfg.alphas)
        .map(|(d, a)| a * d.normalized)
        .sum();
    Ok(BasisKernelReport {
        degrees,
        alphas: cfg.alphas.clone(),
        value,
    })
}

/// `sum_p alpha_p * normalized k^p`.
pub fn new_kernel(g1: &OmniGraph, g2: &OmniGraph, cfg: &WeightConfig) -> Result<f64, ConfigError> {
    explain(g1, g2, cfg).map(|r| r.value)
}

/// Normalized basis Gram matrices for degrees `0..=cfg.max_depth`. Alphas
/// are ignored; mix the result with [`KernelMatrix::weighted_sum`].
pub fn new_basis_grams(instances: &[Instance], cfg: &WeightConfig) -> Vec<KernelMatrix> {
    let mut interner = LabelInterner::new();
    let prepared: Vec<WalkGraph> = instances
        .iter()
        .map(|inst| WalkGraph::prepare(&inst.union_graph(), cfg, &mut interner))
        .collect();
    let p = cfg.max_depth;
    let n = prepared.len();
    let selfs: Vec<Vec<f64>> = prepared
        .par_iter()
        .map(|g| walk_basis(g, g, p, cfg))
        .collect();
    let raw: Vec<Vec<Vec<f64>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| {
                    if i == j {
                        selfs[i].clone()
                    } else {
                        walk_basis(&prepared[i], &prepared[j], p, cfg)
                    }
                })
                .collect()
        })
        .collect();
    let ids: Vec<String> = instances.iter().map(Instance::id).collect();
    (0..=p)
        .map(|d| {
            KernelMatrix::from_fn(ids.clone(), |i, j| {
                let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
                normalize_basis(raw[lo][hi - lo][d], selfs[lo][d], selfs[hi][d])
            })
        })
        .collect()
}

/// Gram matrix of the interpolated NEW kernel over instance union graphs.
pub fn new_gram(instances: &[Instance], cfg: &WeightConfig) -> Result<KernelMatrix, ConfigError> {
    cfg.validate()?;
    let grams = new_basis_grams(instances, cfg);
    let refs: Vec<&KernelMatrix> = grams.iter().collect();
    Ok(KernelMatrix::weighted_sum(&refs, &cfg.alphas))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    fn toy_config() -> WeightConfig {
        WeightConfig::uniform(3)
            .with_node_weight(NodeKind::DesignatedEntity, 0.3)
            .with_node_weight(NodeKind::FrameElement, 0.7)
            .with_node_weight(NodeKind::FrameName, 0.9)
            .with_edge_weight(EdgeKind::FillsRole, 0.4)
            .with_edge_weight(EdgeKind::ElementOf, 0.6)
    }

    fn chain(name: &str) -> OmniGraph {
        let mut b = GraphBuilder::new(name);
        let de = b.add_node(NodeKind::DesignatedEntity, "");
        let msg = b.add_node(NodeKind::FrameElement, "Convey_importance.Message");
        let fname = b.add_node(NodeKind::FrameName, "Convey_importance");
        b.connect(de, msg).unwrap();
        b.connect(msg, fname).unwrap();
        b.finish()
    }

    #[test]
    fn node_kernel_cases() {
        let cfg = toy_config();
        let de = Node { id: 0, kind: NodeKind::DesignatedEntity, label: "Designated_Entity".into() };
        assert_eq!(node_kernel(&de, &de, &cfg), 0.3);
        let a = Node { id: 1, kind: NodeKind::FrameName, label: "A".into() };
        let b = Node { id: 2, kind: NodeKind::FrameName, label: "B".into() };
        assert_eq!(node_kernel(&a, &b, &cfg), 0.0);
        let c = Node { id: 3, kind: NodeKind::FrameTarget, label: "A".into() };
        assert_eq!(node_kernel(&a, &c, &cfg), 0.0);
    }

    #[test]
    fn edge_kernel_cases() {
        let cfg = toy_config();
        let fill = EdgeSignature::new(NodeKind::DesignatedEntity, NodeKind::FrameElement);
        let elem = EdgeSignature::new(NodeKind::FrameElement, NodeKind::FrameName);
        let rev = EdgeSignature::new(NodeKind::FrameElement, NodeKind::DesignatedEntity);
        assert_eq!(edge_kernel(fill, fill, &cfg), 0.4);
        assert_eq!(edge_kernel(fill, elem, &cfg), 0.0);
        assert_eq!(edge_kernel(fill, rev, &cfg), 0.0);
    }

    #[test]
    fn normalize_cases() {
        assert_eq!(normalize_basis(1.0, 2.0, 4.0), 0.25);
        assert_eq!(normalize_basis(0.0, 2.0, 4.0), 0.0);
        assert_eq!(normalize_basis(0.0, 0.0, 0.0), 0.0);
        assert_eq!(normalize_basis(3.0, 3.0, 3.0), 1.0);
    }

    #[test]
    fn chain_against_itself() {
        let g = chain("g");
        let k = basis_kernels(&g, &g, 3, &toy_config());
        assert!((k[0] - 1.9).abs() < 1e-12);
        // DE->Msg and Msg->ConImp both match at degree 1.
        assert!((k[1] - (0.3 * 0.4 * 0.7 + 0.7 * 0.6 * 0.9)).abs() < 1e-12);
        assert!((k[2] - 0.3 * 0.4 * 0.7 * 0.6 * 0.9).abs() < 1e-12);
        assert_eq!(k[3], 0.0);
    }

    #[test]
    fn anchored_walks_start_at_entity() {
        let g = chain("g");
        let cfg = toy_config().with_walk_origin(WalkOrigin::DesignatedEntity);
        let k = basis_kernels(&g, &g, 3, &cfg);
        assert!((k[0] - 1.9).abs() < 1e-12);
        assert!((k[1] - 0.084).abs() < 1e-12);
    }

    #[test]
    fn empty_graph_gives_zero() {
        let g = chain("g");
        let e = OmniGraph::empty("e");
        assert_eq!(basis_kernels(&g, &e, 3, &toy_config()), vec![0.0; 4]);
    }

    #[test]
    fn identical_graphs_score_one() {
        let g = chain("g");
        let cfg = WeightConfig::uniform(2);
        assert!((new_kernel(&g, &g, &cfg).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bad_alphas_rejected() {
        let g = chain("g");
        let mut cfg = WeightConfig::uniform(1);
        cfg.alphas = vec![0.7, 0.7];
        assert!(new_kernel(&g, &g, &cfg).is_err());
    }
}
