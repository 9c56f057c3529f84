//! Graph kernels over OmniGraphs and the Gram-matrix plumbing around them.

pub mod matrix;
pub mod node_edge;
pub mod store;
pub mod wl;

pub use matrix::{KernelMatrix, MatrixError};

use crate::graph::{ConfigError, EdgeKind, NodeKind, WeightConfig};

/// Which node and edge kinds take part in a comparison. Nodes of a disabled
/// kind are deleted together with their incident edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KindMask {
    nodes: [bool; 6],
    edges: [bool; 5],
}

impl KindMask {
    pub fn all() -> Self {
        KindMask {
            nodes: [true; 6],
            edges: [true; 5],
        }
    }

    /// Mask from a 0/1 weight configuration. Fractional weights are rejected.
    pub fn from_config(cfg: &WeightConfig) -> Result<Self, ConfigError> {
        cfg.validate_binary()?;
        Ok(Self::from_nonzero(cfg))
    }

    /// Enables every kind whose weight is positive.
    pub fn from_nonzero(cfg: &WeightConfig) -> Self {
        let mut m = KindMask::all();
        for k in NodeKind::ALL {
            m.nodes[k.index()] = cfg.node_weight(k) > 0.0;
        }
        for k in EdgeKind::ALL {
            m.edges[k.index()] = cfg.edge_weight(k) > 0.0;
        }
        m
    }

    pub fn with_node(mut self, kind: NodeKind, on: bool) -> Self {
        self.nodes[kind.index()] = on;
        self
    }

    pub fn with_edge(mut self, kind: EdgeKind, on: bool) -> Self {
        self.edges[kind.index()] = on;
        self
    }

    #[inline]
    pub fn node(&self, kind: NodeKind) -> bool {
        self.nodes[kind.index()]
    }

    #[inline]
    pub fn edge(&self, kind: EdgeKind) -> bool {
        self.edges[kind.index()]
    }
}

impl Default for KindMask {
    fn default() -> Self {
        KindMask::all()
    }
}
