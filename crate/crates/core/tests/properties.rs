mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use omnigraph::analysis::mutual_information;
use omnigraph::ingest::{
    build_graph, label_from_closes, match_entities, DependencyParse, ElementAnnotation, EntityLexicon,
    FrameAnnotation, LabelOutcome, Span, Token,
};
use omnigraph::kernel::node_edge::{new_gram, new_kernel};
use omnigraph::kernel::wl::{wl_gram, wl_kernel};
use omnigraph::learn::grid::preference;
use omnigraph::learn::{grid_scores, kernel_gram, loo_cv, select_best, stratified_split, GridSpec, KernelKind};
use omnigraph::synth::{generate, generate_null, PlantSpec};
use omnigraph::{EdgeKind, GraphBuilder, KindMask, Label, NodeKind, OmniGraph};

use common::*;

/// The same graph with nodes inserted in a shuffled order.
fn permuted(g: &OmniGraph, rng: &mut ChaCha8Rng) -> OmniGraph {
    let mut order: Vec<usize> = (0..g.node_count()).collect();
    order.shuffle(rng);
    let mut b = GraphBuilder::new(g.sentence_id());
    let mut new_id = vec![0u32; g.node_count()];
    for &i in &order {
        let n = &g.nodes()[i];
        new_id[i] = b.add_node(n.kind, n.label.clone());
    }
    let pos = g.position_map();
    let mut edges: Vec<_> = g.edges().to_vec();
    edges.shuffle(rng);
    for e in edges {
        b.add_edge(new_id[pos[&e.from]], new_id[pos[&e.to]], e.kind).unwrap();
    }
    b.finish()
}

fn random_labels(rng: &mut ChaCha8Rng, n: usize) -> Vec<Label> {
    (0..n)
        .map(|_| if rng.random_bool(0.5) { Label::Positive } else { Label::Negative })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernels_are_symmetric_and_bounded(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g1 = random_graph(&mut rng, 7, "a");
        let g2 = random_graph(&mut rng, 7, "b");
        let h = rng.random_range(0..4);
        prop_assert_eq!(wl_kernel(&g1, &g2, h, KindMask::all()), wl_kernel(&g2, &g1, h, KindMask::all()));
        let cfg = random_config(&mut rng, h);
        let k12 = new_kernel(&g1, &g2, &cfg).unwrap();
        let k21 = new_kernel(&g2, &g1, &cfg).unwrap();
        prop_assert!((k12 - k21).abs() < 1e-12);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&k12));
    }

    #[test]
    fn kernels_ignore_node_order(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g1 = random_graph(&mut rng, 7, "a");
        let g2 = random_graph(&mut rng, 7, "b");
        let p1 = permuted(&g1, &mut rng);
        let h = rng.random_range(0..4);
        prop_assert_eq!(wl_kernel(&g1, &g2, h, KindMask::all()), wl_kernel(&p1, &g2, h, KindMask::all()));
        let cfg = random_config(&mut rng, h);
        let a = new_kernel(&g1, &g2, &cfg).unwrap();
        let b = new_kernel(&p1, &g2, &cfg).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn wl_grows_with_depth(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g1 = random_graph(&mut rng, 7, "a");
        let g2 = random_graph(&mut rng, 7, "b");
        let mut prev = 0.0;
        for h in 0..5 {
            let k = wl_kernel(&g1, &g2, h, KindMask::all());
            prop_assert!(k >= prev);
            prev = k;
        }
    }

    #[test]
    fn mi_ignores_label_and_presence_flips(seed in any::<u64>(), n in 2usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels = random_labels(&mut rng, n);
        let presence: Vec<bool> = (0..n).map(|_| rng.random_bool(0.4)).collect();
        let mi = mutual_information(&presence, &labels);
        let flipped: Vec<Label> = labels.iter().map(|l| l.flip()).collect();
        let absent: Vec<bool> = presence.iter().map(|p| !p).collect();
        prop_assert!((mi - mutual_information(&presence, &flipped)).abs() < 1e-12);
        prop_assert!((mi - mutual_information(&absent, &labels)).abs() < 1e-12);
        prop_assert!(mi >= 0.0 && mi <= 1.0 + 1e-12);
    }

    #[test]
    fn split_is_stratified(seed in any::<u64>(), n in 1usize..120, frac in 0.05f64..0.95) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels = random_labels(&mut rng, n);
        let s = stratified_split(&labels, frac, seed);
        let all: BTreeSet<usize> = s.train.iter().chain(&s.test).copied().collect();
        prop_assert_eq!(all.len(), n);
        prop_assert_eq!(s.train.len() + s.test.len(), n);
        for class in [Label::Positive, Label::Negative] {
            let total = labels.iter().filter(|l| **l == class).count();
            let test = s.test.iter().filter(|&&i| labels[i] == class).count();
            prop_assert_eq!(test, (frac * total as f64).round() as usize);
        }
        prop_assert_eq!(s, stratified_split(&labels, frac, seed));
    }

    #[test]
    fn up_and_down_moves_get_opposite_labels(close in 1.0f64..500.0, r in 0.0f64..0.5, th in 0.001f64..0.2) {
        let up = label_from_closes(close, close * (1.0 + r), th);
        let down = label_from_closes(close, close * (1.0 - r), th);
        match (up, down) {
            (LabelOutcome::Labeled(a), LabelOutcome::Labeled(b)) => {
                prop_assert_eq!(a, Label::Positive);
                prop_assert_eq!(b, a.flip());
            }
            (LabelOutcome::Excluded(_), LabelOutcome::Excluded(_)) => prop_assert!(r < th * 1.000001),
            _ => prop_assert!((r - th).abs() < 1e-9 * th.max(1.0)),
        }
    }

    #[test]
    fn mentions_never_overlap(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vocab = ["acme", "corp", "beta", "group", "the", "Acme's", "BETA", "said"];
        let tokens: Vec<String> = (0..rng.random_range(0..25))
            .map(|_| vocab[rng.random_range(0..vocab.len())].to_string())
            .collect();
        let lex = EntityLexicon::new()
            .with("A", &["Acme", "Acme Corp"])
            .with("B", &["Beta", "Beta Group", "corp beta"]);
        let ms = match_entities(&tokens, &lex);
        for w in ms.windows(2) {
            prop_assert!(w[0].span.end < w[1].span.start);
        }
        for m in &ms {
            prop_assert!(m.span.end < tokens.len());
        }
    }

    #[test]
    fn frame_dependencies_follow_target_heads(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(2..14);
        // random tree: each token in a shuffled order attaches to an earlier one
        let mut order: Vec<usize> = (1..=n).collect();
        order.shuffle(&mut rng);
        let mut heads = vec![0usize; n + 1];
        for k in 1..n {
            heads[order[k]] = order[rng.random_range(0..k)];
        }
        let words = ["Acme", "rose", "said", "Beta", "shares", "the"];
        let dep = DependencyParse {
            sent_id: None,
            tokens: (1..=n)
                .map(|i| Token {
                    index: i,
                    form: words[rng.random_range(0..words.len())].to_string(),
                    head: heads[i],
                    relation: "dep".into(),
                })
                .collect(),
        };
        let span = |rng: &mut ChaCha8Rng| {
            let s = rng.random_range(0..n);
            let e = (s + rng.random_range(0..3)).min(n - 1);
            Span::new(s, e)
        };
        let frames: Vec<FrameAnnotation> = (0..rng.random_range(1..5))
            .map(|f| FrameAnnotation {
                frame_name: format!("F{f}"),
                target: span(&mut rng),
                elements: (0..rng.random_range(0..3))
                    .map(|e| ElementAnnotation { name: format!("E{e}"), span: span(&mut rng) })
                    .collect(),
            })
            .collect();
        let lex = EntityLexicon::new().with("A", &["Acme"]).with("B", &["Beta"]);
        let mentions = match_entities(&dep.forms(), &lex);
        let built = build_graph("s", &dep, &frames, &mentions, "A");
        prop_assert!(built.graph.is_valid(), "{:?}", built.graph.validate());

        let head_of = |s: Span| {
            (s.start..=s.end)
                .find(|&t| {
                    let h = dep.tokens[t].head;
                    h == 0 || !(s.start..=s.end).contains(&(h - 1))
                })
                .unwrap_or(s.end)
        };
        let mut expected = BTreeSet::new();
        for (i, a) in frames.iter().enumerate() {
            for (j, b) in frames.iter().enumerate() {
                if i != j && dep.tokens[head_of(a.target)].head == head_of(b.target) + 1 {
                    expected.insert((format!("F{i}"), format!("F{j}")));
                }
            }
        }
        let g = &built.graph;
        let label = |id| g.node(id).unwrap().label.clone();
        let got: BTreeSet<(String, String)> = g
            .edges()
            .iter()
            .filter(|e| e.kind == EdgeKind::FrameDependency)
            .map(|e| (label(e.from), label(e.to)))
            .collect();
        prop_assert_eq!(got, expected);

        let des = g.nodes_of_kind(NodeKind::DesignatedEntity).count();
        prop_assert_eq!(des, usize::from(mentions.iter().any(|m| m.entity_id == "A")));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn synthetic_corpora_are_valid(seed in any::<u64>(), n in 4usize..40, frac in 0.2f64..0.8) {
        let spec = PlantSpec { seed, positive_fraction: frac, ..PlantSpec::default() };
        let c = generate(&spec, n).unwrap();
        prop_assert_eq!(c.instances.len(), n);
        for inst in &c.instances {
            prop_assert!(inst.validate().is_ok());
            prop_assert!(inst.graphs.len() >= spec.sentences.0 && inst.graphs.len() <= spec.sentences.1);
            for g in &inst.graphs {
                prop_assert_eq!(g.nodes_of_kind(NodeKind::DesignatedEntity).count(), 1);
            }
        }
        let pos = c.instances.iter().filter(|i| i.label == Label::Positive).count();
        prop_assert_eq!(pos, c.manifest.n_positive);
        prop_assert_eq!(pos, (frac * n as f64).round() as usize);
        prop_assert_eq!(&c, &generate(&spec, n).unwrap());
        let ids: BTreeSet<String> = c.instances.iter().map(|i| i.id()).collect();
        prop_assert_eq!(ids.len(), n);

        let null = generate_null(&spec, n).unwrap();
        prop_assert!(null.instances.iter().all(|i| i.validate().is_ok()));
    }

    #[test]
    fn gram_diagonal_is_one_for_new(seed in any::<u64>()) {
        let corpus = random_corpus(seed, 8, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = random_config(&mut rng, 2);
        let k = new_gram(&corpus, &cfg).unwrap();
        prop_assert!(k.max_asymmetry() == 0.0);
        let w = wl_gram(&corpus, 2, KindMask::all());
        prop_assert!(w.max_asymmetry() == 0.0);
        for i in 0..corpus.len() {
            let g = corpus[i].union_graph();
            let selfs = omnigraph::kernel::node_edge::basis_kernels(&g, &g, 2, &cfg);
            if selfs.iter().all(|v| *v > 0.0) {
                prop_assert!((k.get(i, i) - 1.0).abs() < 1e-9);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn pruned_grid_finds_the_exhaustive_winner(seed in any::<u64>(), new in any::<bool>()) {
        let corpus = generate(&PlantSpec { seed, p_plus: 0.7, p_minus: 0.3, ..PlantSpec::default() }, 26).unwrap();
        let spec = GridSpec {
            depths: vec![0, 1, 2],
            alpha_step: 0.5,
            cs: vec![0.1, 10.0],
            ..GridSpec::default()
        };
        let kernel = if new { KernelKind::New } else { KernelKind::Wl };
        let train: Vec<usize> = (0..corpus.instances.len()).collect();
        let scores = grid_scores(&corpus.instances, &train, &spec, kernel).unwrap();
        let best = select_best(&scores).unwrap();
        prop_assert!(!best.pruned);

        let labels: Vec<Label> = corpus.instances.iter().map(|i| i.label).collect();
        let mut exhaustive = scores.clone();
        for s in exhaustive.iter_mut() {
            let k = kernel_gram(&corpus.instances, kernel, &s.config).unwrap();
            let r = loo_cv(&k, &labels, s.c);
            if !s.pruned {
                prop_assert_eq!(s.correct, r.correct);
            } else {
                prop_assert!(r.correct <= s.correct);
                prop_assert!(r.correct < best.correct);
            }
            s.correct = r.correct;
            s.accuracy = r.accuracy;
            s.pruned = false;
        }
        let truth = exhaustive.iter().min_by(|a, b| preference(a, b)).unwrap();
        prop_assert_eq!(&truth.config, &best.config);
        prop_assert_eq!(truth.c, best.c);
        prop_assert_eq!(truth.correct, best.correct);
    }
}
