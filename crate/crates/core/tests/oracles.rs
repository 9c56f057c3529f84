mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use graphviz_rust::dot_structures::{Graph, Stmt};

use omnigraph::analysis::{feature_to_dot, parse_feature, rank_features};
use omnigraph::kernel::node_edge::{basis_kernels, new_kernel};
use omnigraph::kernel::wl::{wl_feature_map, wl_kernel};
use omnigraph::learn::{dual_objective, kkt_residual, train_svm};
use omnigraph::synth::{generate, PlantSpec};
use omnigraph::{EdgeKind, KernelMatrix, KindMask, Label, NodeKind};

use common::*;

#[test]
fn new_dp_matches_walk_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..600 {
        let g1 = random_graph(&mut rng, 6, &format!("a{i}"));
        let g2 = if rng.random_bool(0.2) {
            g1.clone()
        } else {
            random_graph(&mut rng, 6, &format!("b{i}"))
        };
        let p = rng.random_range(0..=3);
        let cfg = random_config(&mut rng, p);
        let dp = basis_kernels(&g1, &g2, p, &cfg);
        for (d, v) in dp.iter().enumerate() {
            let b = brute_basis(&g1, &g2, d, &cfg);
            assert!((v - b).abs() <= 1e-9 * b.abs().max(1.0), "pair {i} degree {d}: {v} vs {b}");
        }
        let k = new_kernel(&g1, &g2, &cfg).unwrap();
        let b = brute_new(&g1, &g2, &cfg);
        assert!((k - b).abs() <= 1e-9, "pair {i}: {k} vs {b}");
    }
}

#[test]
fn new_toy_with_unanchored_walks() {
    let g = fig5_chain("g");
    let cfg = fig5_config().with_walk_origin(omnigraph::WalkOrigin::Any);
    let k = basis_kernels(&g, &g, 3, &cfg);
    for (d, v) in k.iter().enumerate() {
        assert!((v - brute_basis(&g, &g, d, &cfg)).abs() < 1e-12);
    }
    // walks may also start at the frame element
    assert!((k[1] - (0.084 + 0.7 * 0.6 * 0.9)).abs() < 1e-12);
}

#[test]
fn wl_matches_feature_maps_and_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for i in 0..600 {
        let g1 = random_graph(&mut rng, 6, &format!("a{i}"));
        let g2 = random_graph(&mut rng, 6, &format!("b{i}"));
        let h = rng.random_range(0..=3);
        let mut mask = KindMask::all();
        for k in NodeKind::ALL {
            if rng.random_bool(0.15) {
                mask = mask.with_node(k, false);
            }
        }
        for k in EdgeKind::ALL {
            if rng.random_bool(0.15) {
                mask = mask.with_edge(k, false);
            }
        }
        let k = wl_kernel(&g1, &g2, h, mask);
        let explicit = wl_feature_map(&g1, h, mask).dot(&wl_feature_map(&g2, h, mask));
        assert_eq!(k, explicit as f64, "pair {i}");
        assert_eq!(explicit, tree_wl(&g1, &g2, h, mask), "pair {i}");
    }
}

#[test]
fn wl_toy_pair() {
    let (g, h) = fig4_pair();
    assert_eq!(tree_wl(&g, &h, 0, KindMask::all()), 3);
    assert_eq!(tree_wl(&g, &h, 1, KindMask::all()), 5);
    assert_eq!(wl_kernel(&g, &h, 1, KindMask::all()), 5.0);
}

fn random_problem(rng: &mut ChaCha8Rng, n: usize) -> (KernelMatrix, Vec<Label>, f64) {
    let dim = rng.random_range(1..=3);
    let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
    let gamma = rng.random_range(0.1..2.0);
    let rbf = rng.random_bool(0.5);
    let gram = KernelMatrix::from_fn((0..n).map(|i| format!("p{i}")).collect(), |i, j| {
        if rbf {
            let d2: f64 = pts[i].iter().zip(&pts[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            (-gamma * d2).exp()
        } else {
            pts[i].iter().zip(&pts[j]).map(|(a, b)| a * b).sum::<f64>() + 1.0
        }
    });
    let mut labels: Vec<Label> = (0..n)
        .map(|_| if rng.random_bool(0.5) { Label::Positive } else { Label::Negative })
        .collect();
    labels[0] = Label::Positive;
    labels[1] = Label::Negative;
    let c = [0.05, 0.5, 1.0, 5.0, 50.0][rng.random_range(0..5)];
    (gram, labels, c)
}

#[test]
fn smo_matches_face_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for round in 0..40 {
        let n = if round < 10 { 4 } else { rng.random_range(2..=6) };
        let (gram, labels, c) = random_problem(&mut rng, n);
        let model = train_svm(&gram, &labels, c).unwrap();
        let ours = dual_objective(&gram, &model.coefficients);
        let y: Vec<f64> = labels.iter().map(|l| l.sign()).collect();
        let best = brute_dual(gram.values(), &y, c);
        assert!((ours - best).abs() <= 1e-3, "round {round}: {ours} vs {best}");
        assert!(kkt_residual(&gram, &labels, &model) <= 1e-3 + 1e-9);
        let balance: f64 = model.coefficients.iter().sum();
        assert!(balance.abs() < 1e-9);
        assert!(model.coefficients.iter().all(|a| a.abs() <= c + 1e-12));
    }
}

fn dot_counts(dot: &str) -> (usize, usize) {
    let g = graphviz_rust::parse(dot).unwrap_or_else(|e| panic!("{e}\n{dot}"));
    let Graph::DiGraph { stmts, .. } = g else {
        panic!("expected a digraph");
    };
    let nodes = stmts.iter().filter(|s| matches!(s, Stmt::Node(_))).count();
    let edges = stmts.iter().filter(|s| matches!(s, Stmt::Edge(_))).count();
    (nodes, edges)
}

#[test]
fn exported_features_are_valid_dot() {
    let corpus = generate(&PlantSpec { seed: 2, ..PlantSpec::default() }, 60).unwrap();
    let ranked = rank_features(&corpus.instances, 3, KindMask::all(), 40, 2);
    assert!(!ranked.is_empty());
    let mut features: Vec<String> = ranked.into_iter().map(|r| r.feature).collect();
    features.push(r#"LexicalItem:say \"hi\"\\{FrameElement:A\,B.C}"#.to_string());
    for f in &features {
        let tree = parse_feature(f).unwrap();
        let dot = feature_to_dot(f).unwrap();
        let (nodes, edges) = dot_counts(&dot);
        assert_eq!(nodes, tree.node_count(), "{f}");
        assert_eq!(edges, tree.node_count() - 1, "{f}");
    }
}
