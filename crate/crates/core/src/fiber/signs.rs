//! Signs of the square roots: a point of the fiber consistent with the data.

use super::recover::RecoveredSquares;
use super::summary::CovarianceSummary;
use super::FiberError;
use crate::params::OmegaParams;
use crate::tree::{Edge, NodeId, TreeTopology};

/// Signs chosen for `η` (per child node) and `μ̄` (per node); `0` marks a zero value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignAssignment {
    pub edge_signs: Vec<i8>,
    pub node_signs: Vec<i8>,
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Solves `A x = b` over GF(2); rows are `(coefficients, rhs)`. Free variables are set to 0.
fn solve_gf2(mut rows: Vec<(u128, bool)>, vars: usize) -> Option<Vec<bool>> {
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut r = 0;
    for col in 0..vars {
        let bit = 1u128 << col;
        let Some(p) = (r..rows.len()).find(|&k| rows[k].0 & bit != 0) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r];
        for (k, row) in rows.iter_mut().enumerate() {
            if k != r && row.0 & bit != 0 {
                row.0 ^= pivot.0;
                row.1 ^= pivot.1;
            }
        }
        pivots.push((r, col));
        r += 1;
    }
    if rows[r..].iter().any(|row| row.0 == 0 && row.1) {
        return None;
    }
    let mut x = vec![false; vars];
    for &(row, col) in &pivots {
        x[col] = rows[row].1;
    }
    Some(x)
}

/// One point `ω` with the recovered squares whose signs reproduce the signs
/// of every non-zero `μ̂_ij` and of the triple moments used for the nodes.
pub fn consistent_sign_assignment(
    tree: &TreeTopology,
    c: &CovarianceSummary,
    squares: &RecoveredSquares,
) -> Result<(SignAssignment, OmegaParams), FiberError> {
    let count = tree.node_count();
    // unknown per edge with non-zero η, keyed by child node
    let mut var_of = vec![usize::MAX; count];
    let mut vars = 0;
    for v in tree.nodes() {
        if tree.parent(v).is_some() {
            let sq = squares.eta_sq[v.0].ok_or_else(|| {
                FiberError::NoAdmissibleChoice(format!("edge entering {}", tree.name(v)))
            })?;
            if sq != 0.0 {
                var_of[v.0] = vars;
                vars += 1;
            }
        }
    }
    if vars > 127 {
        return Err(FiberError::CapExceeded(vars));
    }
    let path_bits = |a: NodeId, b: NodeId| -> Result<u128, FiberError> {
        let mut bits = 0u128;
        for (x, y) in tree.path_edges(a, b)? {
            let (_, child) = tree.orient(Edge::new(x, y));
            if var_of[child.0] == usize::MAX {
                return Err(FiberError::OffModel(format!(
                    "non-zero moment across the zero edge entering {}",
                    tree.name(child)
                )));
            }
            bits ^= 1u128 << var_of[child.0];
        }
        Ok(bits)
    };
    let n = tree.leaf_count();
    let mut rows = Vec::new();
    for i in 1..=n {
        for j in (i + 1)..=n {
            let m = c.pair(i, j);
            if m != 0.0 {
                let (a, b) = (tree.leaf(i).expect("leaf"), tree.leaf(j).expect("leaf"));
                rows.push((path_bits(a, b)?, m < 0.0));
            }
        }
    }
    let negative = solve_gf2(rows, vars).ok_or(FiberError::NoConsistentSigns)?;

    let mut edge_signs = vec![0i8; count];
    let mut eta = vec![0.0; count];
    for v in tree.nodes() {
        if var_of[v.0] != usize::MAX {
            let s = if negative[var_of[v.0]] { -1 } else { 1 };
            edge_signs[v.0] = s;
            eta[v.0] = f64::from(s) * squares.eta_sq[v.0].expect("checked above").sqrt();
        }
    }

    let mut node_signs = vec![0i8; count];
    let mut mu_bar = vec![0.0; count];
    for v in tree.nodes() {
        if let Some(l) = tree.leaf_label(v) {
            mu_bar[v.0] = c.mu_bar(l);
            node_signs[v.0] = sign(mu_bar[v.0]);
            continue;
        }
        let sq = squares.mu_bar_sq[v.0]
            .ok_or_else(|| FiberError::NoAdmissibleChoice(format!("node {}", tree.name(v))))?;
        let [i, j, k] = squares.triples[v.0]
            .ok_or_else(|| FiberError::NoAdmissibleChoice(format!("node {}", tree.name(v))))?;
        let t = c.triple(i, j, k);
        let mut s = sign(t);
        for l in [i, j, k] {
            for (x, y) in tree.path_edges(v, tree.leaf(l).expect("leaf"))? {
                let (_, child) = tree.orient(Edge::new(x, y));
                s *= edge_signs[child.0];
            }
        }
        node_signs[v.0] = s;
        mu_bar[v.0] = f64::from(s) * sq.max(0.0).sqrt();
    }
    let omega = OmegaParams::new(tree.clone(), mu_bar, eta)?;
    Ok((
        SignAssignment {
            edge_signs,
            node_signs,
        },
        omega,
    ))
}
