//! Isolated edges, the forest `T̂` and the edge equivalence classes.

use std::collections::BTreeSet;

use super::summary::CovarianceSummary;
use crate::subset;
use crate::tree::{Edge, Forest, NodeId, TreeTopology};

/// Edges `e` such that `μ̂_ij = 0` for every leaf pair whose path uses `e`.
pub fn isolated_edges(tree: &TreeTopology, c: &CovarianceSummary) -> Vec<Edge> {
    let all = tree.all_leaves_mask();
    tree.edges()
        .into_iter()
        .filter(|&e| {
            let side = tree.split(e);
            let other = all & !side;
            subset::labels(side).all(|i| subset::labels(other).all(|j| c.pair(i, j) == 0.0))
        })
        .collect()
}

/// Equivalence classes of edges. Active classes are paths listed from the
/// end nearer the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeClasses {
    pub isolated: Vec<Vec<Edge>>,
    pub active: Vec<Vec<Edge>>,
}

/// Transitive closure of `e ∼ e'`: both in the same category, sharing a node
/// `w` at which every other incident edge is isolated.
pub fn edge_classes(tree: &TreeTopology, isolated: &[Edge]) -> EdgeClasses {
    let iso: BTreeSet<Edge> = isolated.iter().copied().collect();
    let edges = tree.edges();
    let index = |e: Edge| edges.binary_search(&e).expect("edge of the tree");
    let mut parent: Vec<usize> = (0..edges.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for w in tree.nodes() {
        let incident: Vec<Edge> = tree.neighbors(w).iter().map(|&u| Edge::new(u, w)).collect();
        for (a, &e) in incident.iter().enumerate() {
            for &f in &incident[a + 1..] {
                if iso.contains(&e) != iso.contains(&f) {
                    continue;
                }
                let others_isolated = incident
                    .iter()
                    .filter(|&&g| g != e && g != f)
                    .all(|g| iso.contains(g));
                if others_isolated {
                    let (ra, rb) = (find(&mut parent, index(e)), find(&mut parent, index(f)));
                    if ra != rb {
                        parent[ra.max(rb)] = ra.min(rb);
                    }
                }
            }
        }
    }
    let mut groups: Vec<Vec<Edge>> = vec![Vec::new(); edges.len()];
    for (k, &e) in edges.iter().enumerate() {
        let r = find(&mut parent, k);
        groups[r].push(e);
    }
    let mut out = EdgeClasses {
        isolated: Vec::new(),
        active: Vec::new(),
    };
    for group in groups.into_iter().filter(|g| !g.is_empty()) {
        if iso.contains(&group[0]) {
            out.isolated.push(group);
        } else {
            out.active.push(order_path(tree, &group));
        }
    }
    out
}

/// Orders the edges of a path starting from the endpoint nearer the root.
fn order_path(tree: &TreeTopology, edges: &[Edge]) -> Vec<Edge> {
    if edges.len() == 1 {
        return edges.to_vec();
    }
    let mut count = std::collections::BTreeMap::new();
    for e in edges {
        let (a, b) = e.ends();
        *count.entry(a).or_insert(0) += 1;
        *count.entry(b).or_insert(0) += 1;
    }
    let start = count
        .iter()
        .filter(|(_, &c)| c == 1)
        .map(|(&v, _)| v)
        .min_by_key(|&v| (tree.depth(v), v))
        .expect("a path has two endpoints");
    let mut remaining: Vec<Edge> = edges.to_vec();
    let mut ordered = Vec::with_capacity(edges.len());
    let mut at = start;
    while let Some(pos) = remaining.iter().position(|e| e.touches(at)) {
        let e = remaining.swap_remove(pos);
        at = e.other(at).expect("edge touches the current node");
        ordered.push(e);
    }
    ordered
}

/// Endpoints `(x, y)` of an ordered active class, `x` nearer the root.
pub fn path_endpoints(tree: &TreeTopology, path: &[Edge]) -> (NodeId, NodeId) {
    let first = path[0];
    let last = path[path.len() - 1];
    if path.len() == 1 {
        return tree.orient(first);
    }
    let second = path[1];
    let x = if second.touches(first.ends().0) {
        first.ends().1
    } else {
        first.ends().0
    };
    let before_last = path[path.len() - 2];
    let y = if before_last.touches(last.ends().0) {
        last.ends().1
    } else {
        last.ends().0
    };
    (x, y)
}

/// `T̂ = T ∖ Ê` and the degenerate nodes `V̂`: inner nodes of degree below two in `T̂`.
pub fn p_forest_and_degenerates(tree: &TreeTopology, isolated: &[Edge]) -> (Forest, Vec<NodeId>) {
    let forest = tree
        .remove_edges(isolated)
        .expect("isolated edges are edges of the tree");
    let degenerate = tree
        .nodes()
        .filter(|&v| !tree.is_leaf(v) && forest.degree(v) < 2)
        .collect();
    (forest, degenerate)
}
