//! OmniGraph: frame-semantic sentence graphs, graph kernels over them, and
//! the learning and analysis tools built on those kernels.

pub mod analysis;
pub mod graph;
pub mod ingest;
pub mod io;
pub mod kernel;
pub mod learn;
pub mod synth;

pub use graph::{
    disjoint_union, ConfigError, Edge, EdgeKind, GraphBuilder, GraphError, Instance, Label, Node,
    NodeId, NodeKind, OmniGraph, ValidationReport, Violation, WalkOrigin, WeightConfig,
};
pub use kernel::{KernelMatrix, KindMask};
