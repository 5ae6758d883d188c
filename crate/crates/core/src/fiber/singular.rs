//! The deepest singularity of a singular fiber and its minimal zero patterns.

use std::collections::BTreeSet;

use super::summary::CovarianceSummary;
use super::FiberError;
use crate::tree::{Edge, NodeId, TreeTopology};

/// Largest `|V̂| + |Ê|` for the brute-force search of minimal pairs.
pub const MAX_SINGULAR_ITEMS: usize = 20;

/// One defining equation of the deepest singularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularConstraint {
    /// `η_{u,v} = 0`.
    EtaZero(Edge),
    /// `μ̄_v² = 1`.
    MuBarSquaredOne(NodeId),
}

/// A pair `(V₀, E₀)` that alone accounts for every observed zero covariance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimalPair {
    pub nodes: Vec<NodeId>,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeepestSingularity {
    pub constraints: Vec<SingularConstraint>,
    pub minimal_pairs: Vec<MinimalPair>,
}

/// Constraints `η = 0` on `Ê`, `μ̄² = 1` on `V̂`, and the inclusion-minimal
/// pairs `(V₀ ⊆ V̂, E₀ ⊆ Ê)` such that every zero `μ̂_ij` has a node of
/// `V₀` or an edge of `E₀` on the path from `i` to `j`.
pub fn deepest_singularity(
    tree: &TreeTopology,
    isolated: &[Edge],
    degenerate: &[NodeId],
    c: &CovarianceSummary,
) -> Result<DeepestSingularity, FiberError> {
    if degenerate.is_empty() {
        return Err(FiberError::NotSingular);
    }
    let items = degenerate.len() + isolated.len();
    if items > MAX_SINGULAR_ITEMS {
        return Err(FiberError::CapExceeded(items));
    }
    let mut constraints: Vec<SingularConstraint> =
        isolated.iter().map(|&e| SingularConstraint::EtaZero(e)).collect();
    constraints.extend(degenerate.iter().map(|&v| SingularConstraint::MuBarSquaredOne(v)));

    // for each zero pair, the items that lie on its path
    let mut hits: Vec<u32> = Vec::new();
    for (i, j) in c.zero_pairs() {
        let a = tree.leaf(i).expect("leaf");
        let b = tree.leaf(j).expect("leaf");
        let nodes: BTreeSet<NodeId> = tree.path_nodes(a, b)?.into_iter().collect();
        let edges: BTreeSet<Edge> = tree
            .path_edges(a, b)?
            .into_iter()
            .map(|(x, y)| Edge::new(x, y))
            .collect();
        let mut mask = 0u32;
        for (k, v) in degenerate.iter().enumerate() {
            if nodes.contains(v) {
                mask |= 1 << k;
            }
        }
        for (k, e) in isolated.iter().enumerate() {
            if edges.contains(e) {
                mask |= 1 << (degenerate.len() + k);
            }
        }
        hits.push(mask);
    }
    let covers = |s: u32| hits.iter().all(|&h| h & s != 0);
    let mut minimal_pairs = Vec::new();
    let mut masks: Vec<u32> = (0..(1u32 << items)).filter(|&s| covers(s)).collect();
    masks.sort_by_key(|s| (s.count_ones(), *s));
    for s in masks {
        let minimal = (0..items).all(|k| s & (1 << k) == 0 || !covers(s & !(1 << k)));
        if minimal {
            minimal_pairs.push(MinimalPair {
                nodes: (0..degenerate.len())
                    .filter(|k| s & (1 << k) != 0)
                    .map(|k| degenerate[k])
                    .collect(),
                edges: (0..isolated.len())
                    .filter(|k| s & (1 << (degenerate.len() + k)) != 0)
                    .map(|k| isolated[k])
                    .collect(),
            });
        }
    }
    Ok(DeepestSingularity {
        constraints,
        minimal_pairs,
    })
}
