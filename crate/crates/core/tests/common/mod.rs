//! Fixtures and slow reference implementations shared by the integration
//! tests. Nothing here calls into the kernel or solver code it checks.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use omnigraph::graph::OTHER_ENTITY_LABEL;
use omnigraph::ingest::{build_graph, match_entities, pair_records, EntityLexicon};
use omnigraph::{
    EdgeKind, GraphBuilder, Instance, KindMask, Label, NodeKind, OmniGraph, WalkOrigin, WeightConfig,
};

pub fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(rel)
}

pub fn read(rel: &str) -> String {
    std::fs::read_to_string(data(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn day(offset: i64) -> NaiveDate {
    NaiveDate::from_ymd_opt(2012, 1, 2).unwrap() + chrono::Duration::days(offset)
}

/// The one-sentence Humana example, built for designated entity HUM.
pub fn humana_graph() -> OmniGraph {
    let records = pair_records(
        &read("humana.conll"),
        "humana.conll",
        &read("humana.frames.jsonl"),
        "humana.frames.jsonl",
    )
    .expect("fixture parses");
    assert_eq!(records.len(), 1);
    let lexicon: EntityLexicon = serde_json::from_str(&read("lexicon.json")).unwrap();
    let r = &records[0];
    let mentions = match_entities(&r.parse.forms(), &lexicon);
    let built = build_graph(&r.sentence_id, &r.parse, &r.frames, &mentions, "HUM");
    assert!(built.has_designated);
    built.graph
}

/// DE -> Convey_importance.Message -> Convey_importance.
pub fn fig5_chain(name: &str) -> OmniGraph {
    let mut b = GraphBuilder::new(name);
    let de = b.add_node(NodeKind::DesignatedEntity, "");
    let msg = b.add_node(NodeKind::FrameElement, "Convey_importance.Message");
    let fname = b.add_node(NodeKind::FrameName, "Convey_importance");
    b.connect(de, msg).unwrap();
    b.connect(msg, fname).unwrap();
    b.finish()
}

pub fn fig5_config() -> WeightConfig {
    WeightConfig::uniform(3)
        .with_node_weight(NodeKind::DesignatedEntity, 0.3)
        .with_node_weight(NodeKind::FrameElement, 0.7)
        .with_node_weight(NodeKind::FrameName, 0.9)
        .with_edge_weight(EdgeKind::FillsRole, 0.4)
        .with_edge_weight(EdgeKind::ElementOf, 0.6)
        .with_walk_origin(WalkOrigin::DesignatedEntity)
}

/// Two small graphs whose WL iteration sums are 3 and 2.
pub fn fig4_pair() -> (OmniGraph, OmniGraph) {
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

/// A graph of up to `max_nodes` nodes with kinds, labels and edges drawn at
/// random. Labels come from a tiny pool so that matches are common. The
/// result is kind-consistent but not necessarily valid.
pub fn random_graph(rng: &mut ChaCha8Rng, max_nodes: usize, name: &str) -> OmniGraph {
    let n = rng.random_range(1..=max_nodes);
    let mut b = GraphBuilder::new(name);
    let mut kinds = Vec::with_capacity(n);
    for _ in 0..n {
        let kind = NodeKind::ALL[rng.random_range(0..NodeKind::ALL.len())];
        let label = match kind {
            NodeKind::OtherEntity => OTHER_ENTITY_LABEL.to_string(),
            _ => ["a", "b"][rng.random_range(0..2)].to_string(),
        };
        b.add_node(kind, label);
        kinds.push(kind);
    }
    let density: f64 = rng.random_range(0.2..0.9);
    for i in 0..n {
        for j in 0..n {
            if i != j && EdgeKind::for_endpoints(kinds[i], kinds[j]).is_some() && rng.random_bool(density) {
                b.connect(i as u32, j as u32).unwrap();
            }
        }
    }
    b.finish()
}

/// Node and edge weights drawn from {0, 1, uniform(0, 1)}.
pub fn random_config(rng: &mut ChaCha8Rng, depth: usize) -> WeightConfig {
    let mut cfg = WeightConfig::uniform(depth);
    let draw = |rng: &mut ChaCha8Rng| match rng.random_range(0..4) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.random_range(0.05..1.0),
    };
    for k in NodeKind::ALL {
        cfg = cfg.with_node_weight(k, draw(rng));
    }
    for k in EdgeKind::ALL {
        cfg = cfg.with_edge_weight(k, draw(rng));
    }
    if rng.random_bool(0.5) {
        cfg = cfg.with_walk_origin(WalkOrigin::DesignatedEntity);
    }
    cfg
}

/// `n` instances of 1..=3 random sentence graphs with random labels.
pub fn random_corpus(seed: u64, n: usize, max_nodes: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let k = rng.random_range(1..=3);
            let graphs = (0..k).map(|s| random_graph(&mut rng, max_nodes, &format!("s{i}-{s}"))).collect();
            let label = if rng.random_bool(0.5) { Label::Positive } else { Label::Negative };
            Instance::new(format!("E{}", i % 4), day(i as i64), label, graphs).unwrap()
        })
        .collect()
}

fn walks(g: &OmniGraph, len: usize) -> Vec<Vec<usize>> {
    let pos = g.position_map();
    let mut out: Vec<Vec<usize>> = (0..g.node_count()).map(|i| vec![i]).collect();
    for _ in 0..len {
        let mut next = Vec::new();
        for w in &out {
            let last = g.nodes()[*w.last().unwrap()].id;
            for e in g.out_edges(last) {
                let mut w2 = w.clone();
                w2.push(pos[&e.to]);
                next.push(w2);
            }
        }
        out = next;
    }
    out
}

/// Raw degree-`p` basis kernel by enumerating every pair of walks with `p`
/// edges. Walks of length 0 may start anywhere; longer ones obey the
/// configured origin.
pub fn brute_basis(g1: &OmniGraph, g2: &OmniGraph, p: usize, cfg: &WeightConfig) -> f64 {
    let (n1, n2) = (g1.nodes(), g2.nodes());
    let kn = |a: usize, b: usize| {
        let (x, y) = (&n1[a], &n2[b]);
        if x.kind == y.kind && x.label == y.label {
            cfg.node_weight(x.kind)
        } else {
            0.0
        }
    };
    let edge_kind = |g: &OmniGraph, a: usize, b: usize| {
        let ids = (g.nodes()[a].id, g.nodes()[b].id);
        g.edges().iter().find(|e| (e.from, e.to) == ids).unwrap().kind
    };
    let mut total = 0.0;
    for w1 in walks(g1, p) {
        if p > 0 && cfg.walk_origin == WalkOrigin::DesignatedEntity && n1[w1[0]].kind != NodeKind::DesignatedEntity {
            continue;
        }
        for w2 in walks(g2, p) {
            let mut v = 1.0;
            for t in 0..=p {
                v *= kn(w1[t], w2[t]);
            }
            for t in 0..p {
                let s1 = (n1[w1[t]].kind, n1[w1[t + 1]].kind);
                let s2 = (n2[w2[t]].kind, n2[w2[t + 1]].kind);
                let (k1, k2) = (edge_kind(g1, w1[t], w1[t + 1]), edge_kind(g2, w2[t], w2[t + 1]));
                v *= if s1 == s2 && k1 == k2 { cfg.edge_weight(k1) } else { 0.0 };
            }
            total += v;
        }
    }
    total
}

/// Interpolated, max-normalized NEW kernel from brute-force basis values.
pub fn brute_new(g1: &OmniGraph, g2: &OmniGraph, cfg: &WeightConfig) -> f64 {
    (0..=cfg.max_depth)
        .map(|p| {
            let raw = brute_basis(g1, g2, p, cfg);
            let m = brute_basis(g1, g1, p, cfg).max(brute_basis(g2, g2, p, cfg));
            let norm = if m > 0.0 { raw / m } else { 0.0 };
            cfg.alphas[p] * norm
        })
        .sum()
}

/// Canonical string of the depth-`i` out-neighborhood tree of each node,
/// after removing masked kinds. A node without out-neighbors is its own
/// tree at every depth.
fn trees(g: &OmniGraph, i: usize, mask: KindMask) -> Vec<String> {
    let keep: Vec<usize> = (0..g.node_count()).filter(|&v| mask.node(g.nodes()[v].kind)).collect();
    let pos = g.position_map();
    let mut children: HashMap<usize, Vec<usize>> = HashMap::new();
    for e in g.edges() {
        let (a, b) = (pos[&e.from], pos[&e.to]);
        if mask.edge(e.kind) && mask.node(g.nodes()[a].kind) && mask.node(g.nodes()[b].kind) {
            children.entry(a).or_default().push(b);
        }
    }
    fn canon(g: &OmniGraph, children: &HashMap<usize, Vec<usize>>, v: usize, d: usize) -> String {
        let n = &g.nodes()[v];
        let base = format!("{}:{}", n.kind.as_str(), n.label);
        match children.get(&v) {
            Some(cs) if d > 0 => {
                let mut sub: Vec<String> = cs.iter().map(|&c| canon(g, children, c, d - 1)).collect();
                sub.sort();
                format!("({}|{})", canon(g, children, v, d - 1), sub.join(","))
            }
            _ => base,
        }
    }
    keep.iter().map(|&v| canon(g, &children, v, i)).collect()
}

/// WL subtree kernel as a count of node pairs with equal trees, summed over
/// depths `0..=h`.
pub fn tree_wl(g1: &OmniGraph, g2: &OmniGraph, h: usize, mask: KindMask) -> u64 {
    (0..=h)
        .map(|i| {
            let mut counts: BTreeMap<String, u64> = BTreeMap::new();
            for t in trees(g1, i, mask) {
                *counts.entry(t).or_default() += 1;
            }
            trees(g2, i, mask).iter().map(|t| counts.get(t).copied().unwrap_or(0)).sum::<u64>()
        })
        .sum()
}

/// Maximum of the C-SVM dual found by solving the stationarity system on
/// every face of the box (each variable at 0, at C, or free) and keeping
/// the best feasible point.
pub fn brute_dual(k: &[f64], y: &[f64], c: f64) -> f64 {
    let n = y.len();
    let q = |i: usize, j: usize| y[i] * y[j] * k[i * n + j];
    let objective = |a: &[f64]| {
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += a[i] * a[j] * q(i, j);
            }
        }
        a.iter().sum::<f64>() - 0.5 * quad
    };
    let mut best = f64::NEG_INFINITY;
    let faces = 3usize.pow(n as u32);
    for code in 0..faces {
        let mut state = vec![0u8; n];
        let mut x = code;
        for s in state.iter_mut() {
            *s = (x % 3) as u8;
            x /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut alpha: Vec<f64> = state.iter().map(|&s| if s == 1 { c } else { 0.0 }).collect();
        if !free.is_empty() {
            // [Q_FF y_F; y_F^T 0] [a_F; nu] = [1 - Q_FB a_B; -y_B^T a_B]
            let m = free.len();
            let mut a = DMatrix::<f64>::zeros(m + 1, m + 1);
            let mut rhs = DVector::<f64>::zeros(m + 1);
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    a[(r, s)] = q(i, j);
                }
                a[(r, m)] = y[i];
                a[(m, r)] = y[i];
                rhs[r] = 1.0 - (0..n).filter(|j| state[*j] != 2).map(|j| q(i, j) * alpha[j]).sum::<f64>();
            }
            rhs[m] = -(0..n).filter(|j| state[*j] != 2).map(|j| y[j] * alpha[j]).sum::<f64>();
            let svd = a.clone().svd(true, true);
            let Ok(sol) = svd.solve(&rhs, 1e-10) else { continue };
            if (&a * &sol - &rhs).norm() > 1e-8 {
                continue;
            }
            for (r, &i) in free.iter().enumerate() {
                alpha[i] = sol[r];
            }
        }
        let feasible = alpha.iter().all(|&v| (-1e-9..=c + 1e-9).contains(&v))
            && alpha.iter().zip(y).map(|(a, y)| a * y).sum::<f64>().abs() < 1e-9;
        if feasible {
            best = best.max(objective(&alpha));
        }
    }
    best
}
