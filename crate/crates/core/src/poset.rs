//! Edge-partition lattices `Π_{T(I)}` and classical set partitions.
//!
//! Elements are found by removing every subset of the edges of `T(I)` and
//! deduplicating the induced leaf partitions. Each element remembers its
//! maximal removal set `Ē_π`; the order is reverse inclusion of those sets.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::OnceLock;

use thiserror::Error;

use crate::subset;
use crate::tree::{Edge, NodeId, TreeError, TreeTopology};

/// Largest `|E(I)|` for which the poset is enumerated.
pub const MAX_POSET_EDGES: usize = 20;

/// Largest ground set for set-partition enumeration.
pub const MAX_SET_PARTITION: usize = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PosetError {
    #[error("leaf set needs at least two leaves, got {0}")]
    TooFewLeaves(usize),
    #[error("T(I) has {0} edges, above the enumeration cap of {max}", max = MAX_POSET_EDGES)]
    TooManyEdges(usize),
    #[error("edge {0} is not an edge of T(I)")]
    EdgeOutside(Edge),
    #[error("no element with index {0}")]
    NotAnElement(usize),
    #[error("set partitions are enumerated for at most {max} elements, got {0}", max = MAX_SET_PARTITION)]
    SetTooLarge(usize),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// A partition of `I` induced by deleting edges of `T(I)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgePartition {
    blocks: Vec<u32>,
    max_edge_set: Vec<Edge>,
}

impl EdgePartition {
    /// Blocks as leaf masks, ordered by smallest element.
    pub fn blocks(&self) -> &[u32] {
        &self.blocks
    }

    /// `Ē_π`, sorted.
    pub fn max_edge_set(&self) -> &[Edge] {
        &self.max_edge_set
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn render(&self) -> String {
        subset::render_blocks(&self.blocks)
    }
}

/// A partition of a finite label set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetPartition {
    blocks: Vec<u32>,
}

impl SetPartition {
    pub fn blocks(&self) -> &[u32] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn render(&self) -> String {
        subset::render_blocks(&self.blocks)
    }
}

fn canonical(mut blocks: Vec<u32>) -> Vec<u32> {
    blocks.retain(|&b| b != 0);
    blocks.sort_by_key(|b| b.trailing_zeros());
    blocks
}

/// `T(I)` with local indices, used to evaluate removals quickly.
#[derive(Debug, Clone)]
struct LocalTree {
    edges: Vec<Edge>,
    ends: Vec<(usize, usize)>,
    leaf_bits: Vec<u32>,
}

impl LocalTree {
    fn new(tree: &TreeTopology, leaf_set: u32) -> Result<Self, PosetError> {
        let size = subset::size(leaf_set);
        if size < 2 {
            return Err(PosetError::TooFewLeaves(size));
        }
        let sub = tree.leaf_subtree(leaf_set)?;
        let local: HashMap<NodeId, usize> =
            sub.nodes().iter().enumerate().map(|(k, &v)| (v, k)).collect();
        let ends = sub
            .edges()
            .iter()
            .map(|e| {
                let (a, b) = e.ends();
                (local[&a], local[&b])
            })
            .collect();
        let leaf_bits = sub
            .nodes()
            .iter()
            .map(|&v| match tree.leaf_label(v) {
                Some(l) if leaf_set & subset::leaf_bit(l) != 0 => subset::leaf_bit(l),
                _ => 0,
            })
            .collect();
        Ok(LocalTree {
            edges: sub.edges().to_vec(),
            ends,
            leaf_bits,
        })
    }

    fn all_edges(&self) -> u32 {
        if self.edges.len() == 32 {
            u32::MAX
        } else {
            (1u32 << self.edges.len()) - 1
        }
    }

    fn blocks(&self, removed: u32) -> Vec<u32> {
        let count = self.leaf_bits.len();
        let mut parent: Vec<usize> = (0..count).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (k, &(a, b)) in self.ends.iter().enumerate() {
            if removed & (1 << k) == 0 {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra] = rb;
                }
            }
        }
        let mut acc = vec![0u32; count];
        for v in 0..count {
            let r = find(&mut parent, v);
            acc[r] |= self.leaf_bits[v];
        }
        canonical(acc)
    }

    fn edge_index(&self, e: Edge) -> Option<usize> {
        self.edges.iter().position(|&f| f == e)
    }

    fn edge_list(&self, mask: u32) -> Vec<Edge> {
        (0..self.edges.len())
            .filter(|k| mask & (1 << k) != 0)
            .map(|k| self.edges[k])
            .collect()
    }
}

/// Partition of `I` obtained by removing `removed` from `T(I)`, with its maximal edge set.
pub fn induced_partition(
    tree: &TreeTopology,
    leaf_set: u32,
    removed: &[Edge],
) -> Result<EdgePartition, PosetError> {
    let local = LocalTree::new(tree, leaf_set)?;
    let mut mask = 0u32;
    for &e in removed {
        let k = local.edge_index(e).ok_or(PosetError::EdgeOutside(e))?;
        mask |= 1 << k;
    }
    let blocks = local.blocks(mask);
    // an edge may be removed without changing the partition iff it lies
    // outside the spanning subtrees of all blocks
    let mut kept = 0u32;
    for &b in &blocks {
        if subset::size(b) < 2 {
            continue;
        }
        let sub = tree.leaf_subtree(b)?;
        for &e in sub.edges() {
            kept |= 1 << local.edge_index(e).expect("block subtree lies inside T(I)");
        }
    }
    let max_edge_set = local.edge_list(local.all_edges() & !kept);
    Ok(EdgePartition {
        blocks,
        max_edge_set,
    })
}

/// The lattice `Π_{T(I)}`.
///
/// Elements are stored in a linear extension of the order: index 0 is the
/// minimum `1|2|…`, the last index is the maximum `I`.
#[derive(Debug, Clone)]
pub struct EdgePartitionPoset {
    leaf_set: u32,
    local: LocalTree,
    elements: Vec<EdgePartition>,
    ebar: Vec<u32>,
    index: HashMap<Vec<u32>, usize>,
    mobius_top: Vec<i64>,
    rows: Vec<OnceLock<Vec<i64>>>,
}

/// Builds `Π_{T(I)}` by exhaustive edge removal.
pub fn build_poset(tree: &TreeTopology, leaf_set: u32) -> Result<EdgePartitionPoset, PosetError> {
    EdgePartitionPoset::new(tree, leaf_set)
}

impl EdgePartitionPoset {
    pub fn new(tree: &TreeTopology, leaf_set: u32) -> Result<Self, PosetError> {
        let local = LocalTree::new(tree, leaf_set)?;
        let m = local.edges.len();
        if m > MAX_POSET_EDGES {
            return Err(PosetError::TooManyEdges(m));
        }
        let mut found: HashMap<Vec<u32>, u32> = HashMap::new();
        for removed in 0..=local.all_edges() {
            *found.entry(local.blocks(removed)).or_insert(0) |= removed;
        }
        let mut pairs: Vec<(Vec<u32>, u32)> = found.into_iter().collect();
        pairs.sort_by(|a, b| {
            b.1.count_ones()
                .cmp(&a.1.count_ones())
                .then(a.1.cmp(&b.1))
        });
        let ebar: Vec<u32> = pairs.iter().map(|p| p.1).collect();
        let elements: Vec<EdgePartition> = pairs
            .iter()
            .map(|(blocks, e)| EdgePartition {
                blocks: blocks.clone(),
                max_edge_set: local.edge_list(*e),
            })
            .collect();
        let index = pairs
            .into_iter()
            .enumerate()
            .map(|(k, (blocks, _))| (blocks, k))
            .collect();
        let size = elements.len();
        let mut poset = EdgePartitionPoset {
            leaf_set,
            local,
            elements,
            ebar,
            index,
            mobius_top: Vec::new(),
            rows: (0..size).map(|_| OnceLock::new()).collect(),
        };
        poset.mobius_top = poset.compute_mobius_top();
        Ok(poset)
    }

    fn compute_mobius_top(&self) -> Vec<i64> {
        let size = self.elements.len();
        let mut m = vec![0i64; size];
        m[size - 1] = 1;
        for p in (0..size - 1).rev() {
            m[p] = -((p + 1)..size)
                .filter(|&d| self.leq_unchecked(p, d))
                .map(|d| m[d])
                .sum::<i64>();
        }
        m
    }

    pub fn leaf_set(&self) -> u32 {
        self.leaf_set
    }

    /// Edges of `T(I)`.
    pub fn edges(&self) -> &[Edge] {
        &self.local.edges
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[EdgePartition] {
        &self.elements
    }

    pub fn element(&self, p: usize) -> Result<&EdgePartition, PosetError> {
        self.elements.get(p).ok_or(PosetError::NotAnElement(p))
    }

    /// Index of the minimum `1|2|…|k`.
    pub fn bottom(&self) -> usize {
        0
    }

    /// Index of the maximum `I`.
    pub fn top(&self) -> usize {
        self.elements.len() - 1
    }

    /// Index of the element with the given blocks (any block order).
    pub fn find(&self, blocks: &[u32]) -> Option<usize> {
        self.index.get(&canonical(blocks.to_vec())).copied()
    }

    fn check(&self, p: usize) -> Result<(), PosetError> {
        if p < self.elements.len() {
            Ok(())
        } else {
            Err(PosetError::NotAnElement(p))
        }
    }

    fn leq_unchecked(&self, p: usize, q: usize) -> bool {
        self.ebar[q] & !self.ebar[p] == 0
    }

    /// `p ≤ q` iff `Ē_p ⊇ Ē_q`.
    pub fn leq(&self, p: usize, q: usize) -> Result<bool, PosetError> {
        self.check(p)?;
        self.check(q)?;
        Ok(self.leq_unchecked(p, q))
    }

    fn from_removal(&self, removed: u32) -> usize {
        self.index[&self.local.blocks(removed)]
    }

    pub fn meet(&self, p: usize, q: usize) -> Result<usize, PosetError> {
        self.check(p)?;
        self.check(q)?;
        Ok(self.from_removal(self.ebar[p] | self.ebar[q]))
    }

    pub fn join(&self, p: usize, q: usize) -> Result<usize, PosetError> {
        self.check(p)?;
        self.check(q)?;
        Ok(self.from_removal(self.ebar[p] & self.ebar[q]))
    }

    /// `m(p, 1̂)` for every element, by index.
    pub fn mobius_to_top(&self) -> &[i64] {
        &self.mobius_top
    }

    fn row(&self, p: usize) -> &[i64] {
        self.rows[p].get_or_init(|| {
            let size = self.elements.len();
            let mut m = vec![0i64; size];
            m[p] = 1;
            for v in (p + 1)..size {
                if !self.leq_unchecked(p, v) {
                    continue;
                }
                m[v] = -(p..v)
                    .filter(|&d| self.leq_unchecked(p, d) && self.leq_unchecked(d, v))
                    .map(|d| m[d])
                    .sum::<i64>();
            }
            m
        })
    }

    /// Möbius function `m(p, q)`; zero unless `p ≤ q`.
    pub fn mobius(&self, p: usize, q: usize) -> Result<i64, PosetError> {
        self.check(p)?;
        self.check(q)?;
        Ok(self.row(p)[q])
    }

    /// Cover relations, one `lower < upper` pair per line.
    pub fn hasse_dump(&self) -> String {
        let size = self.elements.len();
        let mut out = String::new();
        for p in 0..size {
            for q in (p + 1)..size {
                if !self.leq_unchecked(p, q) {
                    continue;
                }
                let covered = ((p + 1)..q)
                    .all(|d| !(self.leq_unchecked(p, d) && self.leq_unchecked(d, q)));
                if covered {
                    let _ = writeln!(
                        out,
                        "{} < {}",
                        self.elements[p].render(),
                        self.elements[q].render()
                    );
                }
            }
        }
        out
    }
}

/// `(−1)^{k−1}(k−1)!` for a partition with `k` blocks.
pub fn classical_mobius_top(p: &SetPartition) -> i64 {
    classical_mobius_for_blocks(p.block_count())
}

pub(crate) fn classical_mobius_for_blocks(k: usize) -> i64 {
    let fact: i64 = (1..k as i64).product();
    if k % 2 == 1 {
        fact
    } else {
        -fact
    }
}

/// All set partitions of `leaf_set`, in restricted-growth-string order.
pub fn enumerate_set_partitions(leaf_set: u32) -> Result<Vec<SetPartition>, PosetError> {
    let items: Vec<usize> = subset::labels(leaf_set).collect();
    if items.len() > MAX_SET_PARTITION {
        return Err(PosetError::SetTooLarge(items.len()));
    }
    let mut out = Vec::new();
    if items.is_empty() {
        out.push(SetPartition { blocks: Vec::new() });
        return Ok(out);
    }
    let mut rgs = vec![0usize; items.len()];
    loop {
        let k = rgs.iter().max().map_or(0, |&m| m + 1);
        let mut blocks = vec![0u32; k];
        for (pos, &b) in rgs.iter().enumerate() {
            blocks[b] |= subset::leaf_bit(items[pos]);
        }
        out.push(SetPartition { blocks });
        // next restricted growth string
        let mut pos = items.len() - 1;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            let prefix_max = rgs[..pos].iter().max().copied().unwrap_or(0);
            if rgs[pos] <= prefix_max {
                rgs[pos] += 1;
                for r in rgs.iter_mut().skip(pos + 1) {
                    *r = 0;
                }
                break;
            }
            pos -= 1;
        }
    }
}
