//! Closed-form recovery of squared parameters from second and third moments.

use super::classes::{path_endpoints, EdgeClasses};
use super::summary::CovarianceSummary;
use super::FiberError;
use crate::subset;
use crate::tolerance::close_relative;
use crate::tree::{Edge, Forest, NodeId, TreeTopology};

/// Quantities determined by one separated triple of leaves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tripod {
    /// `μ̄_h²`.
    pub mu_bar_sq: f64,
    /// `η_{h,i}², η_{h,j}², η_{h,k}²`.
    pub eta_sq: [f64; 3],
    /// `Var(H_h)`.
    pub variance: f64,
    /// `μ̂_ijk² + 4μ̂_ijμ̂_ikμ̂_jk`.
    pub discriminant: f64,
}

/// Tripod formulas for the center of the leaves `i, j, k`.
pub fn recover_tripod(c: &CovarianceSummary, i: usize, j: usize, k: usize) -> Result<Tripod, FiberError> {
    let (ij, ik, jk) = (c.pair(i, j), c.pair(i, k), c.pair(j, k));
    let prod = ij * ik * jk;
    let what = || format!("triple ({i},{j},{k})");
    if prod == 0.0 {
        return Err(FiberError::ZeroDenominator(what()));
    }
    if prod < 0.0 {
        return Err(FiberError::OffModel(format!(
            "{}: product of pairwise moments is negative ({prod:e})",
            what()
        )));
    }
    let t = c.triple(i, j, k);
    let d = t * t + 4.0 * prod;
    Ok(Tripod {
        mu_bar_sq: t * t / d,
        eta_sq: [d / (jk * jk), d / (ik * ik), d / (ij * ij)],
        variance: prod / d,
        discriminant: d,
    })
}

/// `η_{u,v}² = (μ̂_il²/μ̂_ij²)·(μ̂_ijk² + 4μ̂_ijμ̂_ikμ̂_jk)/(μ̂_ikl² + 4μ̂_ikμ̂_ilμ̂_kl)` for an
/// inner edge with `i, j` on the side of `u` and `k, l` on the side of `v`.
pub fn inner_edge_eta_sq(
    c: &CovarianceSummary,
    i: usize,
    j: usize,
    k: usize,
    l: usize,
) -> Result<f64, FiberError> {
    let first = recover_tripod(c, i, j, k)?;
    let second = recover_tripod(c, i, k, l)?;
    let (il, ij) = (c.pair(i, l), c.pair(i, j));
    Ok(il * il / (ij * ij) * first.discriminant / second.discriminant)
}

/// Squared path covariance along an active class whose interior nodes are unidentified.
#[derive(Debug, Clone, PartialEq)]
pub struct PathInvariant {
    /// Endpoint nearer the root.
    pub from: NodeId,
    pub to: NodeId,
    pub edges: Vec<Edge>,
    /// `μ_{xy}² = Cov(Y_x, Y_y)²`.
    pub cov_sq: f64,
    /// `η_{x,y}² = μ_{xy}² / Var(Y_x)²`.
    pub eta_sq: f64,
}

/// Squared parameters that are constant on the fiber.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredSquares {
    /// `μ̄_v²` by node; `None` where the fiber does not determine it.
    pub mu_bar_sq: Vec<Option<f64>>,
    /// `η²` on the edge entering each node; `None` at the root and on undetermined edges.
    pub eta_sq: Vec<Option<f64>>,
    /// Classes of length at least two.
    pub path_invariants: Vec<PathInvariant>,
    /// Separated triple used for each identified inner node.
    pub triples: Vec<Option<[usize; 3]>>,
}

impl RecoveredSquares {
    /// `Var(Y_v) = (1 − μ̄_v²)/4` where known.
    pub fn variance(&self, v: NodeId) -> Option<f64> {
        self.mu_bar_sq[v.0].map(|m| (1.0 - m) / 4.0)
    }
}

/// Leaf triples `i < j < k` lying in three distinct masks of `branches`
/// with non-vanishing pairwise moments, in lexicographic order.
fn separated_triples(c: &CovarianceSummary, branches: &[u32], required: Option<usize>) -> Vec<[usize; 3]> {
    let n = c.n();
    let branch_of = |l: usize| branches.iter().position(|&b| b & subset::leaf_bit(l) != 0);
    let mut out = Vec::new();
    for i in 1..=n {
        for j in (i + 1)..=n {
            for k in (j + 1)..=n {
                if let Some(r) = required {
                    if r != i && r != j && r != k {
                        continue;
                    }
                }
                let (bi, bj, bk) = (branch_of(i), branch_of(j), branch_of(k));
                let distinct = matches!((bi, bj, bk), (Some(a), Some(b), Some(c)) if a != b && b != c && a != c);
                if distinct && c.pair(i, j) != 0.0 && c.pair(i, k) != 0.0 && c.pair(j, k) != 0.0 {
                    out.push([i, j, k]);
                    if out.len() == 2 {
                        return out;
                    }
                }
            }
        }
    }
    out
}

fn agree(what: impl Fn() -> String, a: f64, b: f64, tol: f64) -> Result<(), FiberError> {
    if close_relative(a, b, tol) {
        Ok(())
    } else {
        Err(FiberError::Inconsistent {
            what: what(),
            first: a,
            second: b,
        })
    }
}

struct Recovery<'a> {
    tree: &'a TreeTopology,
    c: &'a CovarianceSummary,
    tol: f64,
    variance: Vec<Option<f64>>,
}

impl Recovery<'_> {
    /// `Cov(X_i, Y_x)²` for a leaf `i` and a node `x` with known variance.
    fn leaf_node_cov_sq(&self, i: usize, x: NodeId) -> Result<f64, FiberError> {
        let tree = self.tree;
        if tree.leaf_label(x) == Some(i) {
            let v = self.c.variance(i);
            return Ok(v * v);
        }
        let triples = separated_triples(self.c, &tree.branches(x), Some(i));
        let value = |t: [usize; 3]| -> Result<f64, FiberError> {
            let others: Vec<usize> = t.iter().copied().filter(|&l| l != i).collect();
            let (j, k) = (others[0], others[1]);
            let tri = recover_tripod(self.c, i, j, k)?;
            let (ij, ik) = (self.c.pair(i, j), self.c.pair(i, k));
            Ok(ij * ij * ik * ik / tri.discriminant)
        };
        let first = *triples.first().ok_or_else(|| {
            FiberError::NoAdmissibleChoice(format!("covariance of leaf {i} with node {}", tree.name(x)))
        })?;
        let a = value(first)?;
        if let Some(&second) = triples.get(1) {
            let b = value(second)?;
            agree(|| format!("covariance of leaf {i} with node {}", tree.name(x)), a, b, self.tol)?;
        }
        Ok(a)
    }

    /// `Cov(Y_x, Y_y)²` for the endpoints of an active path.
    fn path_cov_sq(&self, path: &[Edge]) -> Result<(NodeId, NodeId, f64), FiberError> {
        let tree = self.tree;
        let (x, y) = path_endpoints(tree, path);
        let x_next = path[0].other(x).expect("path starts at x");
        let y_prev = path[path.len() - 1].other(y).expect("path ends at y");
        let x_side = tree.side_leaves(x_next, x);
        let y_side = tree.side_leaves(y_prev, y);
        let name = || format!("path {}–{}", tree.name(x), tree.name(y));
        let (vx, vy) = match (self.variance[x.0], self.variance[y.0]) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(FiberError::NoAdmissibleChoice(name())),
        };
        let mut candidates = Vec::new();
        'outer: for i in subset::labels(x_side) {
            for l in subset::labels(y_side) {
                if self.c.pair(i, l) != 0.0 {
                    candidates.push((i, l));
                    if candidates.len() == 2 {
                        break 'outer;
                    }
                }
            }
        }
        let value = |(i, l): (usize, usize)| -> Result<f64, FiberError> {
            let il = self.c.pair(i, l);
            let cx = self.leaf_node_cov_sq(i, x)?;
            let cy = self.leaf_node_cov_sq(l, y)?;
            Ok(il * il * vx * vx * vy * vy / (cx * cy))
        };
        let first = *candidates
            .first()
            .ok_or_else(|| FiberError::NoAdmissibleChoice(name()))?;
        let a = value(first)?;
        if let Some(&second) = candidates.get(1) {
            agree(name, a, value(second)?, self.tol)?;
        }
        Ok((x, y, a))
    }
}

/// Recovers every squared parameter that is constant on the fiber.
///
/// Node variances come from separated triples, path covariances from a leaf
/// on each side of the path. Each value is cross-checked against the next
/// admissible choice when one exists.
pub fn recover_parameters(
    tree: &TreeTopology,
    c: &CovarianceSummary,
    forest: &Forest,
    isolated: &[Edge],
    classes: &EdgeClasses,
    tol: f64,
) -> Result<RecoveredSquares, FiberError> {
    let count = tree.node_count();
    let mut mu_bar_sq = vec![None; count];
    let mut variance = vec![None; count];
    let mut triples = vec![None; count];
    for v in tree.nodes() {
        if let Some(l) = tree.leaf_label(v) {
            let m = c.mu_bar(l);
            mu_bar_sq[v.0] = Some(m * m);
            variance[v.0] = Some(c.variance(l));
            continue;
        }
        if forest.degree(v) < 3 {
            continue;
        }
        let candidates = separated_triples(c, &tree.branches(v), None);
        let first = *candidates
            .first()
            .ok_or_else(|| FiberError::NoAdmissibleChoice(format!("node {}", tree.name(v))))?;
        let t = recover_tripod(c, first[0], first[1], first[2])?;
        if let Some(&second) = candidates.get(1) {
            let u = recover_tripod(c, second[0], second[1], second[2])?;
            agree(|| format!("mean offset of node {}", tree.name(v)), t.mu_bar_sq, u.mu_bar_sq, tol)
                .or_else(|e| {
                    if close_relative(t.variance, u.variance, tol) {
                        Ok(())
                    } else {
                        Err(e)
                    }
                })?;
        }
        if t.mu_bar_sq > 1.0 + tol {
            return Err(FiberError::OffModel(format!(
                "node {} would need a squared mean offset of {}",
                tree.name(v),
                t.mu_bar_sq
            )));
        }
        mu_bar_sq[v.0] = Some(t.mu_bar_sq.min(1.0));
        variance[v.0] = Some(t.variance);
        triples[v.0] = Some(first);
    }

    let mut eta_sq = vec![None; count];
    for &e in isolated {
        let (_, child) = tree.orient(e);
        eta_sq[child.0] = Some(0.0);
    }
    let rec = Recovery {
        tree,
        c,
        tol,
        variance,
    };
    let mut path_invariants = Vec::new();
    for path in &classes.active {
        let (x, y, cov_sq) = rec.path_cov_sq(path)?;
        let vx = rec.variance[x.0].expect("endpoint variance known");
        if path.len() == 1 {
            let (parent, child) = tree.orient(path[0]);
            let vp = rec.variance[parent.0].expect("endpoint variance known");
            eta_sq[child.0] = Some(cov_sq / (vp * vp));
        } else {
            path_invariants.push(PathInvariant {
                from: x,
                to: y,
                edges: path.clone(),
                cov_sq,
                eta_sq: cov_sq / (vx * vx),
            });
        }
    }
    Ok(RecoveredSquares {
        mu_bar_sq,
        eta_sq,
        path_invariants,
        triples,
    })
}
