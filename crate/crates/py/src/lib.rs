//! Python bindings. Structured results (configs, reports) cross the boundary
//! as JSON strings; matrices as lists of lists.

use std::path::PathBuf;

use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;

use omnigraph::analysis;
use omnigraph::kernel::{node_edge, wl};
use omnigraph::learn::{self, KernelKind};
use omnigraph::synth::{self, PlantSpec};
use omnigraph::{io, Instance, KernelMatrix, KindMask, Label, OmniGraph, WeightConfig};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn config_from(config: Option<&str>, depth: usize) -> PyResult<WeightConfig> {
    match config {
        Some(text) => serde_json::from_str(text).map_err(value_err),
        None => Ok(WeightConfig::uniform(depth)),
    }
}

fn to_rows(m: &KernelMatrix) -> Vec<Vec<f64>> {
    (0..m.size()).map(|i| m.row(i).to_vec()).collect()
}

/// One sentence graph.
#[pyclass(name = "Graph", module = "pyomnigraph", skip_from_py_object)]
#[derive(Clone)]
struct PyGraph {
    inner: OmniGraph,
}

#[pymethods]
impl PyGraph {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        OmniGraph::from_json(text).map(|inner| PyGraph { inner }).map_err(value_err)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn sentence_id(&self) -> String {
        self.inner.sentence_id().to_string()
    }

    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    /// `(id, kind, label)` per node.
    fn nodes(&self) -> Vec<(u32, String, String)> {
        self.inner
            .nodes()
            .iter()
            .map(|n| (n.id, n.kind.to_string(), n.label.clone()))
            .collect()
    }

    /// `(from, to, kind)` per edge.
    fn edges(&self) -> Vec<(u32, u32, String)> {
        self.inner
            .edges()
            .iter()
            .map(|e| (e.from, e.to, e.kind.to_string()))
            .collect()
    }

    fn is_valid(&self) -> bool {
        self.inner.is_valid()
    }

    fn violations(&self) -> Vec<String> {
        self.inner.validate().violations.iter().map(|v| v.to_string()).collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph({:?}, {} nodes, {} edges)",
            self.inner.sentence_id(),
            self.inner.node_count(),
            self.inner.edge_count()
        )
    }
}

/// A list of labeled instances.
#[pyclass(name = "Corpus", module = "pyomnigraph")]
struct PyCorpus {
    instances: Vec<Instance>,
}

#[pymethods]
impl PyCorpus {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        io::read_instances(&path)
            .map(|instances| PyCorpus { instances })
            .map_err(value_err)
    }

    /// Synthetic corpus with a planted pattern.
    #[staticmethod]
    #[pyo3(signature = (n, seed = 0, p_plus = 0.9, p_minus = 0.1, null = false))]
    fn synth(n: usize, seed: u64, p_plus: f64, p_minus: f64, null: bool) -> PyResult<Self> {
        let spec = PlantSpec {
            seed,
            p_plus,
            p_minus,
            ..PlantSpec::default()
        };
        let corpus = if null {
            synth::generate_null(&spec, n)
        } else {
            synth::generate(&spec, n)
        };
        corpus
            .map(|c| PyCorpus { instances: c.instances })
            .map_err(value_err)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        io::write_instances(&path, &self.instances).map_err(value_err)
    }

    fn __len__(&self) -> usize {
        self.instances.len()
    }

    fn ids(&self) -> Vec<String> {
        self.instances.iter().map(Instance::id).collect()
    }

    /// Labels as +1 / -1.
    fn labels(&self) -> Vec<i64> {
        self.instances.iter().map(|i| i64::from(i.label)).collect()
    }

    fn union_graph(&self, i: usize) -> PyResult<PyGraph> {
        self.instances
            .get(i)
            .map(|inst| PyGraph { inner: inst.union_graph() })
            .ok_or_else(|| PyIndexError::new_err(format!("instance {i} out of range")))
    }

    /// Gram matrix of `kernel` ("wl", "new" or "bow"). `config` is a
    /// WeightConfig in JSON; a uniform config of `depth` otherwise.
    #[pyo3(signature = (kernel, config = None, depth = 1))]
    fn gram(&self, py: Python<'_>, kernel: &str, config: Option<&str>, depth: usize) -> PyResult<Vec<Vec<f64>>> {
        let kind: KernelKind = kernel.parse().map_err(value_err)?;
        let cfg = config_from(config, depth)?;
        let m = py
            .detach(|| learn::kernel_gram(&self.instances, kind, &cfg))
            .map_err(value_err)?;
        Ok(to_rows(&m))
    }

    /// Best grid configuration as JSON, using the default grid unless a
    /// GridSpec JSON is given.
    #[pyo3(signature = (kernel, seed = 0, grid = None))]
    fn grid_search(&self, py: Python<'_>, kernel: &str, seed: u64, grid: Option<&str>) -> PyResult<String> {
        let kind: KernelKind = kernel.parse().map_err(value_err)?;
        let spec: learn::GridSpec = match grid {
            Some(text) => serde_json::from_str(text).map_err(value_err)?,
            None => learn::GridSpec::default(),
        };
        let out = py
            .detach(|| learn::grid_search(&self.instances, &spec, kind, seed))
            .map_err(value_err)?;
        serde_json::to_string(&out.best).map_err(value_err)
    }

    /// Held-out evaluation report as JSON.
    #[pyo3(signature = (kernel, config = None, c = 1.0, seed = 0, test_fraction = 0.2, depth = 1))]
    fn evaluate(
        &self,
        py: Python<'_>,
        kernel: &str,
        config: Option<&str>,
        c: f64,
        seed: u64,
        test_fraction: f64,
        depth: usize,
    ) -> PyResult<String> {
        let kind: KernelKind = kernel.parse().map_err(value_err)?;
        let cfg = config_from(config, depth)?;
        let report = py
            .detach(|| learn::evaluate(&self.instances, &cfg, c, kind, seed, test_fraction))
            .map_err(value_err)?;
        serde_json::to_string(&report).map_err(value_err)
    }

    /// Top WL features by mutual information: `(feature, depth, mi)`.
    #[pyo3(signature = (depth = 3, top_k = 20, min_support = 2))]
    fn rank(&self, depth: usize, top_k: usize, min_support: usize) -> Vec<(String, usize, f64)> {
        analysis::rank_features(&self.instances, depth, KindMask::all(), top_k, min_support)
            .into_iter()
            .map(|r| (r.feature, r.depth, r.mi))
            .collect()
    }
}

#[pyfunction]
fn wl_kernel(g1: &PyGraph, g2: &PyGraph, h: usize) -> f64 {
    wl::wl_kernel(&g1.inner, &g2.inner, h, KindMask::all())
}

#[pyfunction]
#[pyo3(signature = (g1, g2, config = None, depth = 1))]
fn new_kernel(g1: &PyGraph, g2: &PyGraph, config: Option<&str>, depth: usize) -> PyResult<f64> {
    let cfg = config_from(config, depth)?;
    node_edge::new_kernel(&g1.inner, &g2.inner, &cfg).map_err(value_err)
}

/// Raw basis kernels for degrees `0..=p`.
#[pyfunction]
#[pyo3(signature = (g1, g2, p, config = None))]
fn basis_kernels(g1: &PyGraph, g2: &PyGraph, p: usize, config: Option<&str>) -> PyResult<Vec<f64>> {
    let cfg = config_from(config, p)?;
    Ok(node_edge::basis_kernels(&g1.inner, &g2.inner, p, &cfg))
}

/// MI in bits from the 2x2 counts (present & +1, present & -1, absent &
/// +1, absent & -1).
#[pyfunction]
fn mi_from_counts(n11: usize, n10: usize, n01: usize, n00: usize) -> f64 {
    analysis::mi_from_counts(n11, n10, n01, n00)
}

#[pyfunction]
fn feature_to_dot(feature: &str) -> PyResult<String> {
    analysis::feature_to_dot(feature).map_err(value_err)
}

/// LOO accuracy of a C-SVM on a square Gram matrix with +1/-1 labels.
#[pyfunction]
fn loo_accuracy(gram: Vec<Vec<f64>>, labels: Vec<i64>, c: f64) -> PyResult<f64> {
    let n = gram.len();
    if gram.iter().any(|r| r.len() != n) || labels.len() != n {
        return Err(value_err("gram must be square and match the labels"));
    }
    let labels = labels
        .into_iter()
        .map(Label::try_from)
        .collect::<Result<Vec<_>, _>>()
        .map_err(value_err)?;
    let m = KernelMatrix::new((0..n).map(|i| i.to_string()).collect(), gram.concat()).map_err(value_err)?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(value_err("C must be positive"));
    }
    Ok(learn::loo_cv(&m, &labels, c).accuracy)
}

#[pymodule]
fn pyomnigraph(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyCorpus>()?;
    m.add_function(wrap_pyfunction!(wl_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(new_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(basis_kernels, m)?)?;
    m.add_function(wrap_pyfunction!(mi_from_counts, m)?)?;
    m.add_function(wrap_pyfunction!(feature_to_dot, m)?)?;
    m.add_function(wrap_pyfunction!(loo_accuracy, m)?)?;
    m.add("PLANTED_FEATURE", synth::PLANTED_FEATURE)?;
    Ok(())
}
