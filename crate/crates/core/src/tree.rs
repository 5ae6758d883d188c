//! Leaf-labelled tree topologies and the structural operations on them.
//!
//! A [`TreeTopology`] stores explicit adjacency. Rooting is metadata: the
//! root fixes the orientation of edges (parent → child) used by the
//! parameter charts, but the undirected structure is what the
//! combinatorics consumes.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::subset::{self, MAX_LEAVES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Undirected edge; the smaller id is stored first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge(NodeId, NodeId);

impl Edge {
    pub fn new(a: NodeId, b: NodeId) -> Edge {
        if a <= b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn ends(self) -> (NodeId, NodeId) {
        (self.0, self.1)
    }

    pub fn touches(self, v: NodeId) -> bool {
        self.0 == v || self.1 == v
    }

    pub fn other(self, v: NodeId) -> Option<NodeId> {
        if self.0 == v {
            Some(self.1)
        } else if self.1 == v {
            Some(self.0)
        } else {
            None
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.0, self.1)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("node {0} does not exist")]
    UnknownNode(NodeId),
    #[error("no node named {0:?}")]
    UnknownName(String),
    #[error("edge {0} is not an edge of the tree")]
    UnknownEdge(Edge),
    #[error("not a tree: {0}")]
    NotATree(String),
    #[error("leaf {0} carries no leaf label")]
    UnlabeledLeaf(NodeId),
    #[error("inner node {0} carries leaf label {1}")]
    LabeledInnerNode(NodeId, usize),
    #[error("leaf label {0} is used more than once")]
    DuplicateLabel(usize),
    #[error("leaf labels must be exactly 1..={n}, label {missing} is missing")]
    MissingLabel { n: usize, missing: usize },
    #[error("at least two leaves are required, found {0}")]
    TooFewLeaves(usize),
    #[error("at most {max} leaves are supported, found {0}", max = MAX_LEAVES)]
    TooManyLeaves(usize),
    #[error("node set must not be empty")]
    EmptyNodeSet,
    #[error("node sets overlap at {0}")]
    OverlappingSets(NodeId),
    #[error("path endpoints coincide at {0}")]
    SameEndpoints(NodeId),
    #[error("contraction would merge labelled leaves {0} and {1}")]
    MergesLeaves(usize, usize),
    #[error("contraction would absorb leaf {0} into an inner node")]
    AbsorbsLeaf(usize),
}

/// Minimal connected subgraph of a tree spanned on a node set, in the
/// node ids of the parent tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubTree {
    nodes: Vec<NodeId>,
    edges: Vec<Edge>,
    degree: BTreeMap<NodeId, usize>,
    root: NodeId,
}

impl SubTree {
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// `r(W)`: the node of the subtree closest to the root of the parent tree.
    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.degree.contains_key(&v)
    }

    /// Degree within the subtree (0 for nodes outside it).
    pub fn degree(&self, v: NodeId) -> usize {
        self.degree.get(&v).copied().unwrap_or(0)
    }
}

/// Forest left after deleting edges from a tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Forest {
    node_count: usize,
    edges: Vec<Edge>,
    components: Vec<Vec<NodeId>>,
    component_of: Vec<usize>,
}

impl Forest {
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn components(&self) -> &[Vec<NodeId>] {
        &self.components
    }

    pub fn component_of(&self, v: NodeId) -> usize {
        self.component_of[v.0]
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.edges.iter().filter(|e| e.touches(v)).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeTopology {
    adjacency: Vec<Vec<NodeId>>,
    names: Vec<Option<String>>,
    labels: Vec<Option<usize>>,
    leaves: Vec<NodeId>,
    root: NodeId,
    parent: Vec<Option<NodeId>>,
    preorder: Vec<NodeId>,
    depth: Vec<usize>,
}

/// Incremental construction of a [`TreeTopology`].
#[derive(Debug, Default, Clone)]
pub struct TreeBuilder {
    names: Vec<Option<String>>,
    labels: Vec<Option<usize>>,
    edges: Vec<(NodeId, NodeId)>,
}

impl TreeBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn leaf(&mut self, label: usize) -> NodeId {
        self.names.push(None);
        self.labels.push(Some(label));
        NodeId(self.names.len() - 1)
    }

    pub fn inner(&mut self, name: Option<&str>) -> NodeId {
        self.names.push(name.map(str::to_string));
        self.labels.push(None);
        NodeId(self.names.len() - 1)
    }

    pub fn edge(&mut self, a: NodeId, b: NodeId) -> &mut Self {
        self.edges.push((a, b));
        self
    }

    pub fn build(self, root: NodeId) -> Result<TreeTopology, TreeError> {
        TreeTopology::from_parts(self.names, self.labels, &self.edges, root)
    }
}

impl TreeTopology {
    /// Builds and validates a tree. `labels[v]` is the leaf label of node `v`.
    pub fn from_parts(
        names: Vec<Option<String>>,
        labels: Vec<Option<usize>>,
        edges: &[(NodeId, NodeId)],
        root: NodeId,
    ) -> Result<TreeTopology, TreeError> {
        let count = names.len();
        if labels.len() != count {
            return Err(TreeError::NotATree("names and labels differ in length".into()));
        }
        if count == 0 {
            return Err(TreeError::EmptyNodeSet);
        }
        if root.0 >= count {
            return Err(TreeError::UnknownNode(root));
        }
        if edges.len() + 1 != count {
            return Err(TreeError::NotATree(format!(
                "{} nodes need {} edges, got {}",
                count,
                count - 1,
                edges.len()
            )));
        }
        let mut adjacency = vec![Vec::new(); count];
        let mut seen = BTreeSet::new();
        for &(a, b) in edges {
            for v in [a, b] {
                if v.0 >= count {
                    return Err(TreeError::UnknownNode(v));
                }
            }
            if a == b {
                return Err(TreeError::NotATree(format!("self loop at {a}")));
            }
            if !seen.insert(Edge::new(a, b)) {
                return Err(TreeError::NotATree(format!("duplicate edge {}", Edge::new(a, b))));
            }
            adjacency[a.0].push(b);
            adjacency[b.0].push(a);
        }
        for adj in adjacency.iter_mut() {
            adj.sort();
        }

        let mut parent = vec![None; count];
        let mut depth = vec![usize::MAX; count];
        let mut preorder = Vec::with_capacity(count);
        depth[root.0] = 0;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            preorder.push(v);
            for &u in adjacency[v.0].iter().rev() {
                if depth[u.0] == usize::MAX {
                    depth[u.0] = depth[v.0] + 1;
                    parent[u.0] = Some(v);
                    stack.push(u);
                }
            }
        }
        if preorder.len() != count {
            return Err(TreeError::NotATree("graph is disconnected".into()));
        }

        let mut by_label: BTreeMap<usize, NodeId> = BTreeMap::new();
        for v in 0..count {
            let id = NodeId(v);
            let deg = adjacency[v].len();
            match labels[v] {
                Some(l) if deg != 1 => return Err(TreeError::LabeledInnerNode(id, l)),
                Some(l) => {
                    if l == 0 {
                        return Err(TreeError::MissingLabel { n: 0, missing: 0 });
                    }
                    if by_label.insert(l, id).is_some() {
                        return Err(TreeError::DuplicateLabel(l));
                    }
                }
                None if deg == 1 => return Err(TreeError::UnlabeledLeaf(id)),
                None => {}
            }
        }
        let n = by_label.len();
        if n < 2 {
            return Err(TreeError::TooFewLeaves(n));
        }
        if n > MAX_LEAVES {
            return Err(TreeError::TooManyLeaves(n));
        }
        let mut leaves = Vec::with_capacity(n);
        for k in 1..=n {
            match by_label.get(&k) {
                Some(&v) => leaves.push(v),
                None => return Err(TreeError::MissingLabel { n, missing: k }),
            }
        }
        Ok(TreeTopology {
            adjacency,
            names,
            labels,
            leaves,
            root,
            parent,
            preorder,
            depth,
        })
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.len() - 1
    }

    /// Number of leaves `n`.
    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    /// Mask of the full leaf set `[n]`.
    pub fn all_leaves_mask(&self) -> u32 {
        if self.leaves.len() == 32 {
            u32::MAX
        } else {
            (1u32 << self.leaves.len()) - 1
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.adjacency.len()).map(NodeId)
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v.0 < self.adjacency.len()
    }

    fn check(&self, v: NodeId) -> Result<(), TreeError> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(TreeError::UnknownNode(v))
        }
    }

    /// All edges, sorted.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out: Vec<Edge> = self
            .nodes()
            .filter_map(|v| self.parent[v.0].map(|p| Edge::new(p, v)))
            .collect();
        out.sort();
        out
    }

    /// Edges as `(parent, child)` pairs in preorder of the child.
    pub fn directed_edges(&self) -> Vec<(NodeId, NodeId)> {
        self.preorder
            .iter()
            .filter_map(|&v| self.parent[v.0].map(|p| (p, v)))
            .collect()
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adjacency[v.0]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adjacency[v.0].len()
    }

    pub fn is_leaf(&self, v: NodeId) -> bool {
        self.labels[v.0].is_some()
    }

    pub fn leaf_label(&self, v: NodeId) -> Option<usize> {
        self.labels[v.0]
    }

    /// Node carrying leaf label `label` (1-based).
    pub fn leaf(&self, label: usize) -> Option<NodeId> {
        label.checked_sub(1).and_then(|k| self.leaves.get(k)).copied()
    }

    /// Leaf nodes ordered by label.
    pub fn leaves(&self) -> &[NodeId] {
        &self.leaves
    }

    pub fn inner_nodes(&self) -> Vec<NodeId> {
        self.nodes().filter(|&v| !self.is_leaf(v)).collect()
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.parent[v.0]
    }

    pub fn children(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        let p = self.parent[v.0];
        self.adjacency[v.0].iter().copied().filter(move |&u| Some(u) != p)
    }

    pub fn depth(&self, v: NodeId) -> usize {
        self.depth[v.0]
    }

    /// Nodes in depth-first preorder from the root.
    pub fn preorder(&self) -> &[NodeId] {
        &self.preorder
    }

    pub fn max_inner_degree(&self) -> usize {
        self.nodes()
            .filter(|&v| !self.is_leaf(v))
            .map(|v| self.degree(v))
            .max()
            .unwrap_or(0)
    }

    /// The Newick name of an inner node, if it had one.
    pub fn raw_name(&self, v: NodeId) -> Option<&str> {
        self.names[v.0].as_deref()
    }

    /// Display name: leaf label, inner-node name, or `#id`.
    pub fn name(&self, v: NodeId) -> String {
        if let Some(l) = self.labels[v.0] {
            l.to_string()
        } else if let Some(n) = &self.names[v.0] {
            n.clone()
        } else {
            v.to_string()
        }
    }

    /// Resolves a display name as produced by [`TreeTopology::name`].
    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        if let Ok(l) = name.parse::<usize>() {
            if let Some(v) = self.leaf(l) {
                return Some(v);
            }
        }
        if let Some(v) = self
            .nodes()
            .find(|v| self.labels[v.0].is_none() && self.names[v.0].as_deref() == Some(name))
        {
            return Some(v);
        }
        name.strip_prefix('#')
            .and_then(|s| s.parse::<usize>().ok())
            .map(NodeId)
            .filter(|&v| self.contains(v))
    }

    pub fn resolve(&self, name: &str) -> Result<NodeId, TreeError> {
        self.node_by_name(name)
            .ok_or_else(|| TreeError::UnknownName(name.to_string()))
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.contains(a) && self.adjacency[a.0].binary_search(&b).is_ok()
    }

    /// Orients an edge away from the root: `(parent, child)`.
    pub fn orient(&self, e: Edge) -> (NodeId, NodeId) {
        let (a, b) = e.ends();
        if self.parent[b.0] == Some(a) {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// Same tree with a different root.
    pub fn rerooted(&self, root: NodeId) -> Result<TreeTopology, TreeError> {
        self.check(root)?;
        let edges: Vec<(NodeId, NodeId)> = self.edges().iter().map(|e| e.ends()).collect();
        TreeTopology::from_parts(self.names.clone(), self.labels.clone(), &edges, root)
    }

    /// Leaves in the component containing `to` after deleting the edge `{from, to}`.
    pub fn side_leaves(&self, from: NodeId, to: NodeId) -> u32 {
        let mut mask = 0u32;
        let mut stack = vec![(from, to)];
        while let Some((prev, v)) = stack.pop() {
            if let Some(l) = self.labels[v.0] {
                mask |= subset::leaf_bit(l);
            }
            for &u in &self.adjacency[v.0] {
                if u != prev {
                    stack.push((v, u));
                }
            }
        }
        mask
    }

    /// Leaf masks of the components of `T \ v`, one per neighbour of `v` (ascending neighbour id).
    pub fn branches(&self, v: NodeId) -> Vec<u32> {
        self.adjacency[v.0].iter().map(|&u| self.side_leaves(v, u)).collect()
    }

    /// Edge split induced by removing `e`: the leaves on the child side.
    pub fn split(&self, e: Edge) -> u32 {
        let (p, c) = self.orient(e);
        self.side_leaves(p, c)
    }

    /// Nodes on the unique path from `u` to `v`, both included.
    pub fn path_nodes(&self, u: NodeId, v: NodeId) -> Result<Vec<NodeId>, TreeError> {
        self.check(u)?;
        self.check(v)?;
        let mut up = vec![u];
        let mut down = vec![v];
        let (mut a, mut b) = (u, v);
        while self.depth[a.0] > self.depth[b.0] {
            a = self.parent[a.0].expect("deeper node has a parent");
            up.push(a);
        }
        while self.depth[b.0] > self.depth[a.0] {
            b = self.parent[b.0].expect("deeper node has a parent");
            down.push(b);
        }
        while a != b {
            a = self.parent[a.0].expect("non-root node has a parent");
            b = self.parent[b.0].expect("non-root node has a parent");
            up.push(a);
            down.push(b);
        }
        down.pop();
        up.extend(down.into_iter().rev());
        Ok(up)
    }

    /// Ordered edges `(x, y)` walking from `u` to `v`.
    pub fn path_edges(&self, u: NodeId, v: NodeId) -> Result<Vec<(NodeId, NodeId)>, TreeError> {
        if u == v {
            return Err(TreeError::SameEndpoints(u));
        }
        let nodes = self.path_nodes(u, v)?;
        Ok(nodes.windows(2).map(|w| (w[0], w[1])).collect())
    }

    /// `T(W)` together with its local root `r(W)`.
    pub fn spanning_subtree(&self, w: &[NodeId]) -> Result<SubTree, TreeError> {
        if w.is_empty() {
            return Err(TreeError::EmptyNodeSet);
        }
        for &v in w {
            self.check(v)?;
        }
        let count = self.node_count();
        let mut wanted = vec![false; count];
        for &v in w {
            wanted[v.0] = true;
        }
        let mut alive = vec![true; count];
        let mut deg: Vec<usize> = self.adjacency.iter().map(Vec::len).collect();
        let mut stack: Vec<NodeId> = self
            .nodes()
            .filter(|v| !wanted[v.0] && deg[v.0] <= 1)
            .collect();
        while let Some(v) = stack.pop() {
            if !alive[v.0] || wanted[v.0] || deg[v.0] > 1 {
                continue;
            }
            alive[v.0] = false;
            for &u in &self.adjacency[v.0] {
                if alive[u.0] {
                    deg[u.0] -= 1;
                    if deg[u.0] <= 1 && !wanted[u.0] {
                        stack.push(u);
                    }
                }
            }
        }
        let nodes: Vec<NodeId> = self.nodes().filter(|v| alive[v.0]).collect();
        let edges: Vec<Edge> = nodes
            .iter()
            .filter_map(|&v| {
                self.parent[v.0]
                    .filter(|p| alive[p.0])
                    .map(|p| Edge::new(p, v))
            })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let degree = nodes.iter().map(|&v| (v, deg[v.0])).collect();
        let root = *nodes
            .iter()
            .min_by_key(|v| (self.depth[v.0], v.0))
            .expect("spanning subtree is non-empty");
        Ok(SubTree {
            nodes,
            edges,
            degree,
            root,
        })
    }

    /// `T(I)` for a leaf mask `I`.
    pub fn leaf_subtree(&self, mask: u32) -> Result<SubTree, TreeError> {
        let nodes: Vec<NodeId> = subset::labels(mask)
            .map(|l| self.leaf(l).ok_or(TreeError::MissingLabel { n: self.leaf_count(), missing: l }))
            .collect::<Result<_, _>>()?;
        self.spanning_subtree(&nodes)
    }

    /// `T / E'`.
    pub fn contract_edges(&self, es: &[Edge]) -> Result<TreeTopology, TreeError> {
        self.contract_edges_with_map(es).map(|(t, _)| t)
    }

    /// `T / E'` plus the map sending each old node to its merged node.
    pub fn contract_edges_with_map(
        &self,
        es: &[Edge],
    ) -> Result<(TreeTopology, Vec<NodeId>), TreeError> {
        for &e in es {
            let (a, b) = e.ends();
            if !self.has_edge(a, b) {
                return Err(TreeError::UnknownEdge(e));
            }
        }
        let count = self.node_count();
        let mut uf: Vec<usize> = (0..count).collect();
        fn find(uf: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while uf[r] != r {
                r = uf[r];
            }
            let mut y = x;
            while uf[y] != r {
                let next = uf[y];
                uf[y] = r;
                y = next;
            }
            r
        }
        let contracted: BTreeSet<Edge> = es.iter().copied().collect();
        for e in &contracted {
            let (a, b) = e.ends();
            let (ra, rb) = (find(&mut uf, a.0), find(&mut uf, b.0));
            if ra != rb {
                uf[ra.max(rb)] = ra.min(rb);
            }
        }
        // classes get new ids in order of their smallest member
        let mut class_id = vec![usize::MAX; count];
        let mut members: Vec<Vec<NodeId>> = Vec::new();
        for v in 0..count {
            let r = find(&mut uf, v);
            if class_id[r] == usize::MAX {
                class_id[r] = members.len();
                members.push(Vec::new());
            }
            class_id[v] = class_id[r];
            members[class_id[v]].push(NodeId(v));
        }
        let map: Vec<NodeId> = (0..count).map(|v| NodeId(class_id[v])).collect();

        let mut new_edges = Vec::new();
        for e in self.edges() {
            if contracted.contains(&e) {
                continue;
            }
            let (a, b) = e.ends();
            new_edges.push((map[a.0], map[b.0]));
        }
        let mut new_degree = vec![0usize; members.len()];
        for &(a, b) in &new_edges {
            new_degree[a.0] += 1;
            new_degree[b.0] += 1;
        }
        let mut names = Vec::with_capacity(members.len());
        let mut labels = Vec::with_capacity(members.len());
        for (c, group) in members.iter().enumerate() {
            let mut label = None;
            for &v in group {
                if let Some(l) = self.labels[v.0] {
                    if let Some(prev) = label {
                        return Err(TreeError::MergesLeaves(prev, l));
                    }
                    label = Some(l);
                }
            }
            if let Some(l) = label {
                if new_degree[c] != 1 {
                    return Err(TreeError::AbsorbsLeaf(l));
                }
            }
            let top = group
                .iter()
                .copied()
                .filter(|v| self.names[v.0].is_some())
                .min_by_key(|v| (self.depth[v.0], v.0));
            names.push(top.and_then(|v| self.names[v.0].clone()));
            labels.push(label);
        }
        let tree = TreeTopology::from_parts(names, labels, &new_edges, map[self.root.0])?;
        Ok((tree, map))
    }

    /// Removes every inner node of degree two by contracting one of its edges.
    pub fn suppress_degree_two(&self) -> TreeTopology {
        let mut current = self.clone();
        loop {
            let mut picks = BTreeSet::new();
            for v in current.nodes() {
                if current.is_leaf(v) || current.degree(v) != 2 {
                    continue;
                }
                let other = match current.parent(v) {
                    Some(p) => p,
                    None => current.children(v).min().expect("degree-two root has children"),
                };
                picks.insert(Edge::new(v, other));
            }
            if picks.is_empty() {
                return current;
            }
            let es: Vec<Edge> = picks.into_iter().collect();
            current = current
                .contract_edges(&es)
                .expect("contracting edges at degree-two nodes keeps a valid tree");
        }
    }

    /// Smallest leaf label below each node (rooted view).
    fn min_label_below(&self) -> Vec<usize> {
        let mut out = vec![usize::MAX; self.node_count()];
        for &v in self.preorder.iter().rev() {
            let own = self.labels[v.0].unwrap_or(usize::MAX);
            let below = self.children(v).map(|c| out[c.0]).min().unwrap_or(usize::MAX);
            out[v.0] = own.min(below);
        }
        out
    }

    /// A trivalent expansion `T*` and the set `E'` of new inner edges with `T*/E' = T`.
    ///
    /// Every inner node of degree above three repeatedly hands its two
    /// lowest child subtrees (by smallest leaf label) to a fresh child node.
    /// Original nodes keep their ids; new nodes are appended.
    pub fn trivalent_expansion(&self) -> Result<(TreeTopology, Vec<Edge>), TreeError> {
        let n = self.leaf_count();
        if n < 3 {
            return Err(TreeError::TooFewLeaves(n));
        }
        let mut min_label = self.min_label_below();
        let mut children: Vec<Vec<NodeId>> =
            self.nodes().map(|v| self.children(v).collect()).collect();
        let mut names = self.names.clone();
        let mut labels = self.labels.clone();
        for &v in &self.preorder {
            let parent_edges = usize::from(self.parent[v.0].is_some());
            while children[v.0].len() + parent_edges > 3 {
                let mut kids = children[v.0].clone();
                kids.sort_by_key(|c| (min_label[c.0], c.0));
                let (a, b) = (kids[0], kids[1]);
                let w = NodeId(names.len());
                names.push(None);
                labels.push(None);
                min_label.push(min_label[a.0].min(min_label[b.0]));
                children.push(vec![a, b]);
                children[v.0].retain(|&c| c != a && c != b);
                children[v.0].push(w);
            }
        }
        let edges: Vec<(NodeId, NodeId)> = children
            .iter()
            .enumerate()
            .flat_map(|(p, cs)| cs.iter().map(move |&c| (NodeId(p), c)))
            .collect();
        let original = self.node_count();
        let mut new_edges: Vec<Edge> = edges
            .iter()
            .filter(|(_, c)| c.0 >= original)
            .map(|&(p, c)| Edge::new(p, c))
            .collect();
        new_edges.sort();
        let expanded = TreeTopology::from_parts(names, labels, &edges, self.root)?;
        Ok((expanded, new_edges))
    }

    /// True iff every path from a node of `a` to a node of `b` passes through `c`.
    pub fn separates(&self, a: &[NodeId], b: &[NodeId], c: &[NodeId]) -> Result<bool, TreeError> {
        let count = self.node_count();
        let mut tag = vec![0u8; count];
        for (bit, set) in [(1u8, a), (2, b), (4, c)] {
            for &v in set {
                self.check(v)?;
                if tag[v.0] != 0 && tag[v.0] != bit {
                    return Err(TreeError::OverlappingSets(v));
                }
                tag[v.0] = bit;
            }
        }
        let mut seen = vec![false; count];
        let mut queue: VecDeque<NodeId> = a.iter().copied().collect();
        for &v in a {
            seen[v.0] = true;
        }
        while let Some(v) = queue.pop_front() {
            if tag[v.0] == 2 {
                return Ok(false);
            }
            for &u in &self.adjacency[v.0] {
                if !seen[u.0] && tag[u.0] != 4 {
                    seen[u.0] = true;
                    queue.push_back(u);
                }
            }
        }
        Ok(true)
    }

    /// `T \ E'`.
    pub fn remove_edges(&self, es: &[Edge]) -> Result<Forest, TreeError> {
        for &e in es {
            let (a, b) = e.ends();
            if !self.has_edge(a, b) {
                return Err(TreeError::UnknownEdge(e));
            }
        }
        let removed: BTreeSet<Edge> = es.iter().copied().collect();
        let kept: Vec<Edge> = self.edges().into_iter().filter(|e| !removed.contains(e)).collect();
        let count = self.node_count();
        let mut component_of = vec![usize::MAX; count];
        let mut components = Vec::new();
        for start in 0..count {
            if component_of[start] != usize::MAX {
                continue;
            }
            let id = components.len();
            let mut members = Vec::new();
            let mut stack = vec![NodeId(start)];
            component_of[start] = id;
            while let Some(v) = stack.pop() {
                members.push(v);
                for &u in &self.adjacency[v.0] {
                    if component_of[u.0] == usize::MAX && !removed.contains(&Edge::new(u, v)) {
                        component_of[u.0] = id;
                        stack.push(u);
                    }
                }
            }
            members.sort();
            components.push(members);
        }
        Ok(Forest {
            node_count: count,
            edges: kept,
            components,
            component_of,
        })
    }

    /// Canonical Newick text: children sorted by smallest leaf label, inner names kept.
    pub fn to_newick(&self) -> String {
        let min_label = self.min_label_below();
        let mut out = String::new();
        self.write_newick(self.root, None, &min_label, true, &mut out);
        out.push(';');
        out
    }

    fn write_newick(
        &self,
        v: NodeId,
        from: Option<NodeId>,
        min_label: &[usize],
        with_names: bool,
        out: &mut String,
    ) {
        let mut kids: Vec<NodeId> = self.adjacency[v.0]
            .iter()
            .copied()
            .filter(|&u| Some(u) != from)
            .collect();
        kids.sort_by_key(|c| (min_label[c.0], c.0));
        if !kids.is_empty() {
            out.push('(');
            for (k, &c) in kids.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                self.write_newick(c, Some(v), min_label, with_names, out);
            }
            out.push(')');
        }
        if let Some(l) = self.labels[v.0] {
            out.push_str(&l.to_string());
        } else if with_names {
            if let Some(name) = &self.names[v.0] {
                out.push_str(name);
            }
        }
    }

    /// Root-independent, name-independent canonical form (rooted at leaf 1).
    pub fn canonical_form(&self) -> String {
        let anchor = self.leaves[0];
        let rerooted = self.rerooted(anchor).expect("leaf 1 exists");
        let min_label = rerooted.min_label_below();
        let mut out = String::new();
        rerooted.write_newick(anchor, None, &min_label, false, &mut out);
        out
    }

    /// Leaf-label preserving isomorphism of the unrooted topologies.
    pub fn is_isomorphic(&self, other: &TreeTopology) -> bool {
        self.leaf_count() == other.leaf_count()
            && self.node_count() == other.node_count()
            && self.canonical_form() == other.canonical_form()
    }
}
