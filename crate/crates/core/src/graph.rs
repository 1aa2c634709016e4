//! Edge selection by block-norm thresholding and detection metrics.

use std::collections::BTreeSet;

use crate::error::{CoreError, Result};
use crate::matseq::{IndexSet, MatrixSequence};

/// An undirected graph over nodes `0..p` as a set of edges `{i, j}` with
/// `i < j`. No self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSet {
    p: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl EdgeSet {
    /// Builds an edge set; pairs are normalized to `i < j`, self-loops and
    /// out-of-range nodes are rejected.
    pub fn new(p: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(CoreError::InvalidParameter(format!(
                    "self-loop ({a}, {b}) is not a valid edge"
                )));
            }
            if a >= p || b >= p {
                return Err(CoreError::InvalidParameter(format!(
                    "edge ({a}, {b}) out of range for {p} nodes"
                )));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Self { p, edges: set })
    }

    pub fn empty(p: usize) -> Self {
        Self {
            p,
            edges: BTreeSet::new(),
        }
    }

    /// Collapses the off-diagonal part of an ordered index set to
    /// unordered edges.
    pub fn from_index_set(set: &IndexSet) -> Self {
        let edges = set
            .iter()
            .filter(|&(i, j)| i != j)
            .map(|(i, j)| (i.min(j), i.max(j)))
            .collect();
        Self {
            p: set.dim(),
            edges,
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn is_subset_of(&self, other: &EdgeSet) -> bool {
        self.p == other.p && self.edges.is_subset(&other.edges)
    }

    /// Number of unordered node pairs, `p(p-1)/2`.
    pub fn total_pairs(&self) -> usize {
        self.p * (self.p - 1) / 2
    }
}

/// Selects the edges whose estimated inverse-SDM block norm reaches `eta`:
/// `{ {i,j} : i < j, ‖K̂_{i,j}[·]‖ ≥ η }`. The boundary is included; the
/// diagonal never is.
pub fn select_edges(k_hat: &MatrixSequence, eta: f64) -> EdgeSet {
    assert!(eta > 0.0, "selection threshold must be positive");
    let p = k_hat.dim();
    let mut edges = BTreeSet::new();
    for i in 0..p {
        for j in (i + 1)..p {
            if k_hat.block_norm(i, j) >= eta {
                edges.insert((i, j));
            }
        }
    }
    EdgeSet { p, edges }
}

/// Fraction of true edges detected and fraction of non-edges falsely
/// selected, for a single run:
/// `(|Ê ∩ E| / |E|,  |Ê \ E| / (p(p-1)/2 - |E|))`.
pub fn detection_rates(estimated: &EdgeSet, truth: &EdgeSet) -> Result<(f64, f64)> {
    if estimated.p != truth.p {
        return Err(CoreError::DimensionMismatch(format!(
            "edge sets over {} and {} nodes",
            estimated.p, truth.p
        )));
    }
    if truth.is_empty() {
        return Err(CoreError::EmptyEdgeSet);
    }
    let hits = estimated.edges.intersection(&truth.edges).count();
    let false_alarms = estimated.edges.difference(&truth.edges).count();
    let negatives = truth.total_pairs() - truth.len();
    let correct = hits as f64 / truth.len() as f64;
    let fa = if negatives == 0 {
        0.0
    } else {
        false_alarms as f64 / negatives as f64
    };
    Ok((correct, fa))
}
