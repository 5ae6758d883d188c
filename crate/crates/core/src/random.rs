//! Seeded generators for trees, parameters and distributions.
//!
//! All generators take the caller's RNG so a single seed reproduces a whole
//! run; [`rng_from_seed`] gives the ChaCha stream used throughout.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::moments::ProbabilityTable;
use crate::params::ThetaParams;
use crate::subset;
use crate::tree::{Edge, NodeId, TreeBuilder, TreeTopology};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random tree on leaves `1..=n` rooted at a random inner node.
///
/// Leaves are added one at a time, either by subdividing a random edge or,
/// unless `trivalent` is set, by hanging the leaf off a random inner node.
/// `n = 2` gives the two-leaf tree rooted at leaf 1.
pub fn random_tree<R: Rng>(rng: &mut R, n: usize, trivalent: bool) -> TreeTopology {
    assert!(n >= 2, "random trees need at least two leaves");
    let mut b = TreeBuilder::new();
    if n == 2 {
        let one = b.leaf(1);
        let two = b.leaf(2);
        b.edge(one, two);
        return b.build(one).expect("two-leaf tree");
    }
    let hub = b.inner(None);
    let mut inner = vec![hub];
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(rng);
    for &label in &order[..3] {
        let l = b.leaf(label);
        edges.push((hub, l));
    }
    for &label in &order[3..] {
        let leaf = b.leaf(label);
        if !trivalent && rng.gen_bool(0.4) {
            let u = *inner.choose(rng).expect("at least one inner node");
            edges.push((u, leaf));
        } else {
            let k = rng.gen_range(0..edges.len());
            let (u, v) = edges[k];
            let w = b.inner(None);
            inner.push(w);
            edges[k] = (u, w);
            edges.push((w, v));
            edges.push((w, leaf));
        }
    }
    for (u, v) in edges {
        b.edge(u, v);
    }
    let root = *inner.choose(rng).expect("at least one inner node");
    b.build(root).expect("generated tree is valid")
}

/// Random tree with between `min` and `max` leaves.
pub fn random_tree_between<R: Rng>(rng: &mut R, min: usize, max: usize, trivalent: bool) -> TreeTopology {
    let n = rng.gen_range(min..=max);
    random_tree(rng, n, trivalent)
}

/// Conditional probabilities drawn uniformly from `[0.02, 0.98]`.
pub fn random_theta<R: Rng>(rng: &mut R, tree: &TreeTopology) -> ThetaParams<f64> {
    let root = rng.gen_range(0.02..0.98);
    let cond = (0..tree.node_count())
        .map(|_| (rng.gen_range(0.02..0.98), rng.gen_range(0.02..0.98)))
        .collect();
    ThetaParams::new(tree.clone(), root, cond).expect("one pair per node")
}

/// Parameters away from the boundary: `|θ_{1|1} − θ_{1|0}| ≥ 0.2` on every
/// edge and the root probability in `[0.15, 0.85]`.
pub fn random_interior_theta<R: Rng>(rng: &mut R, tree: &TreeTopology) -> ThetaParams<f64> {
    let root = rng.gen_range(0.15..0.85);
    let cond = (0..tree.node_count())
        .map(|_| loop {
            let a: f64 = rng.gen_range(0.05..0.95);
            let b: f64 = rng.gen_range(0.05..0.95);
            if (a - b).abs() >= 0.2 {
                break (a, b);
            }
        })
        .collect();
    ThetaParams::new(tree.clone(), root, cond).expect("one pair per node")
}

/// Strictly positive table, normalized.
pub fn random_probability_table<R: Rng>(rng: &mut R, n: usize) -> ProbabilityTable<f64> {
    let mut values: Vec<f64> = (0..1usize << n).map(|_| rng.gen_range(0.01..1.0)).collect();
    let total: f64 = values.iter().sum();
    values.iter_mut().for_each(|v| *v /= total);
    ProbabilityTable::new(n, values).expect("table size matches n")
}

/// `p_A ⊗ p_B` for a leaf bipartition `A | B` given by `a_mask`.
pub fn product_distribution(
    n: usize,
    a_mask: u32,
    p_a: &ProbabilityTable<f64>,
    p_b: &ProbabilityTable<f64>,
) -> ProbabilityTable<f64> {
    let all = (1u32 << n) - 1;
    let b_mask = all & !a_mask;
    let compress = |x: u32, mask: u32| {
        subset::labels(mask)
            .enumerate()
            .fold(0u32, |acc, (k, l)| acc | (((x >> (l - 1)) & 1) << k))
    };
    let values = (0..=all)
        .map(|x| p_a.get(compress(x, a_mask)) * p_b.get(compress(x, b_mask)))
        .collect();
    ProbabilityTable::new(n, values).expect("table size matches n")
}

/// A random edge of `tree` with a product distribution across its split.
pub fn random_split_product<R: Rng>(rng: &mut R, tree: &TreeTopology) -> (Edge, ProbabilityTable<f64>) {
    let edges = tree.edges();
    let e = *edges.choose(rng).expect("trees have edges");
    let n = tree.leaf_count();
    let a_mask = tree.split(e);
    let size_a = subset::size(a_mask);
    let p_a = random_probability_table(rng, size_a);
    let p_b = random_probability_table(rng, n - size_a);
    (e, product_distribution(n, a_mask, &p_a, &p_b))
}
