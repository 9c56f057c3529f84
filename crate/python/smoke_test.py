"""Smoke test for the pyomnigraph extension.

Build and install first:
    pip install maturin
    cd crates/py && maturin develop --release
or
    pip install --no-build-isolation ./crates/py
"""

import json
import math
import os
import tempfile

import pyomnigraph as og


def chain():
    nodes = [
        {"id": 0, "kind": "DesignatedEntity", "label": "Designated_Entity"},
        {"id": 1, "kind": "FrameElement", "label": "Convey_importance.Message"},
        {"id": 2, "kind": "FrameName", "label": "Convey_importance"},
    ]
    edges = [
        {"from": 0, "to": 1, "kind": "FillsRole"},
        {"from": 1, "to": 2, "kind": "ElementOf"},
    ]
    return og.Graph.from_json(json.dumps({"sentence_id": "toy", "nodes": nodes, "edges": edges}))


def main():
    g = chain()
    assert g.is_valid(), g.violations()
    assert (g.node_count(), g.edge_count()) == (3, 2)

    config = {
        "node_weights": {
            "FrameName": 0.9, "FrameTarget": 1.0, "FrameElement": 0.7,
            "DesignatedEntity": 0.3, "OtherEntity": 1.0, "LexicalItem": 1.0,
        },
        "edge_weights": {
            "TargetEvokes": 1.0, "ElementOf": 0.6, "FillsRole": 0.4,
            "FrameDependency": 1.0, "LexicalFill": 1.0,
        },
        "max_depth": 3,
        "alphas": [0.25, 0.25, 0.25, 0.25],
        "walk_origin": "designated_entity",
    }
    k = og.basis_kernels(g, g, 3, json.dumps(config))
    for got, want in zip(k, [1.9, 0.084, 0.04536, 0.0]):
        assert abs(got - want) < 1e-12, k
    # degree 3 has no self-walks, so its normalized term is 0
    assert abs(og.new_kernel(g, g, json.dumps(config)) - 0.75) < 1e-12
    assert og.wl_kernel(g, g, 1) == 6.0

    assert abs(og.mi_from_counts(3, 1, 1, 3) - 0.1887) < 1e-4
    dot = og.feature_to_dot(og.PLANTED_FEATURE)
    assert dot.startswith("digraph") and dot.count("->") == 1

    corpus = og.Corpus.synth(60, seed=1)
    assert len(corpus) == 60
    labels = corpus.labels()
    assert set(labels) == {1, -1}
    gram = corpus.gram("wl", depth=1)
    assert len(gram) == 60 and all(len(r) == 60 for r in gram)
    assert all(gram[i][j] == gram[j][i] for i in range(60) for j in range(60))
    acc = og.loo_accuracy(gram, labels, 1.0)
    assert 0.0 <= acc <= 1.0

    report = json.loads(corpus.evaluate("wl", c=1.0, seed=1))
    assert report["n_test"] == 12

    top = corpus.rank(depth=2, top_k=3)
    assert top[0][0] == og.PLANTED_FEATURE, top

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "corpus.jsonl")
        corpus.save(path)
        again = og.Corpus.load(path)
        assert again.ids() == corpus.ids()

    try:
        corpus.gram("rbf")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown kernel accepted")

    print(f"ok: loo accuracy {acc:.3f}, held-out accuracy {report['accuracy']:.3f}, "
          f"top feature MI {top[0][2]:.3f}")
    assert not math.isnan(acc)


if __name__ == "__main__":
    main()
