//! Brute-force reference computations.
//!
//! Nothing here shares code with the elimination routines in `params`: the
//! joint is a literal product over every assignment, and independence is
//! tested both through moment identities and through the definition.

use thiserror::Error;

use crate::joint::FullJoint;
use crate::moments::{lambda_to_mu, p_to_lambda, CentralMoments, ProbabilityTable};
use crate::params::{ParamError, ThetaParams, MAX_JOINT_NODES};
use crate::scalar::Scalar;
use crate::subset;
use crate::tree::{NodeId, TreeTopology};

/// Default tolerance for the independence checks.
pub const INDEPENDENCE_TOL: f64 = 1e-12;

/// Above this many nodes the global Markov check only conditions on
/// single nodes and on the set of all inner nodes.
pub const EXHAUSTIVE_MARKOV_NODES: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("{0} nodes exceed the limit of {MAX_JOINT_NODES}")]
    TooManyNodes(usize),
    #[error("node #{0} is not in the joint table")]
    NodeOutOfRange(usize),
    #[error("node sets overlap at #{0}")]
    Overlap(usize),
    #[error("conditioning variable #{0} is degenerate")]
    DegenerateConditioning(usize),
    #[error("joint table has {joint} nodes but the tree has {tree}")]
    SizeMismatch { joint: usize, tree: usize },
    #[error(transparent)]
    Param(#[from] ParamError),
}

/// `P(X_V = x) = θ^{(r)}_{x_r} Π_{v≠r} θ^{(v)}_{x_v|x_{pa(v)}}`, one assignment at a time.
pub fn joint_by_enumeration<T: Scalar>(theta: &ThetaParams<T>) -> Result<FullJoint<T>, OracleError> {
    let tree = theta.tree();
    let count = tree.node_count();
    if count > MAX_JOINT_NODES {
        return Err(OracleError::TooManyNodes(count));
    }
    let state = |a: usize, v: NodeId| a & (1 << v.0) != 0;
    let mut values = Vec::with_capacity(1 << count);
    for a in 0..1usize << count {
        let mut p = theta.root_prob(state(a, tree.root()));
        for v in tree.nodes() {
            if let Some(u) = tree.parent(v) {
                p = p * theta.prob(v, state(a, v), state(a, u));
            }
        }
        values.push(p);
    }
    Ok(FullJoint::new(count, values)?)
}

fn check_nodes(j: &FullJoint, sets: &[&[NodeId]]) -> Result<(), OracleError> {
    let mut seen = 0u32;
    for set in sets {
        for v in set.iter() {
            if v.0 >= j.node_count() {
                return Err(OracleError::NodeOutOfRange(v.0));
            }
            if seen & (1 << v.0) != 0 {
                return Err(OracleError::Overlap(v.0));
            }
            seen |= 1 << v.0;
        }
    }
    Ok(())
}

/// Central moments of the listed nodes; node `nodes[k]` plays leaf `k+1`.
fn node_moments(j: &FullJoint, nodes: &[NodeId]) -> CentralMoments {
    let p = ProbabilityTable::new(nodes.len(), j.marginal(nodes)).expect("marginal size");
    lambda_to_mu(&p_to_lambda(&p))
}

/// Central moment `μ_S` with the convention `μ_∅ = 1` and `μ_i = 0`.
fn mu(m: &CentralMoments, mask: u32) -> f64 {
    if subset::size(mask) == 1 {
        0.0
    } else {
        *m.get(mask)
    }
}

/// `X_A ⫫ X_B` through `μ_{IJ} = μ_I μ_J` for all non-empty `I ⊆ A`, `J ⊆ B`.
pub fn check_independence(j: &FullJoint, a: &[NodeId], b: &[NodeId]) -> Result<bool, OracleError> {
    check_independence_tol(j, a, b, INDEPENDENCE_TOL)
}

pub fn check_independence_tol(
    j: &FullJoint,
    a: &[NodeId],
    b: &[NodeId],
    tol: f64,
) -> Result<bool, OracleError> {
    check_nodes(j, &[a, b])?;
    let nodes: Vec<NodeId> = a.iter().chain(b).copied().collect();
    let m = node_moments(j, &nodes);
    let a_mask = (1u32 << a.len()) - 1;
    let b_mask = ((1u32 << b.len()) - 1) << a.len();
    for i in subset::submasks(a_mask).filter(|&i| i != 0) {
        for jj in subset::submasks(b_mask).filter(|&jj| jj != 0) {
            if (mu(&m, i | jj) - mu(&m, i) * mu(&m, jj)).abs() > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `X_A ⫫ X_B` through `P(x_A, x_B) = P(x_A) P(x_B)`.
pub fn check_independence_direct(
    j: &FullJoint,
    a: &[NodeId],
    b: &[NodeId],
    tol: f64,
) -> Result<bool, OracleError> {
    check_conditional_direct(j, a, b, &[], tol)
}

/// `X_A ⫫ X_B | H_h` through the moment identities
/// `μ_{IJ} = μ_I μ_J + λ_h(1−λ_h) η_{h,I} η_{h,J}` and
/// `η_{h,IJ} = μ_I η_{h,J} + η_{h,I} μ_J + (1−2λ_h) η_{h,I} η_{h,J}`.
pub fn check_conditional_independence(
    j: &FullJoint,
    a: &[NodeId],
    b: &[NodeId],
    h: NodeId,
) -> Result<bool, OracleError> {
    check_conditional_independence_tol(j, a, b, h, INDEPENDENCE_TOL)
}

pub fn check_conditional_independence_tol(
    j: &FullJoint,
    a: &[NodeId],
    b: &[NodeId],
    h: NodeId,
    tol: f64,
) -> Result<bool, OracleError> {
    check_nodes(j, &[a, b, &[h]])?;
    let nodes: Vec<NodeId> = a.iter().chain(b).chain([&h]).copied().collect();
    let m = node_moments(j, &nodes);
    let h_bit = 1u32 << (a.len() + b.len());
    let lambda = m.means()[a.len() + b.len()];
    let var = lambda * (1.0 - lambda);
    if var <= tol {
        return Err(OracleError::DegenerateConditioning(h.0));
    }
    let eta = |s: u32| *m.get(s | h_bit) / var;
    let a_mask = (1u32 << a.len()) - 1;
    let b_mask = ((1u32 << b.len()) - 1) << a.len();
    for i in subset::submasks(a_mask).filter(|&i| i != 0) {
        for jj in subset::submasks(b_mask).filter(|&jj| jj != 0) {
            let first = mu(&m, i) * mu(&m, jj) + var * eta(i) * eta(jj);
            let second =
                mu(&m, i) * eta(jj) + eta(i) * mu(&m, jj) + (1.0 - 2.0 * lambda) * eta(i) * eta(jj);
            if (mu(&m, i | jj) - first).abs() > tol || (eta(i | jj) - second).abs() > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `X_A ⫫ X_B | X_C` through `P(a,b,c) P(c) = P(a,c) P(b,c)`.
pub fn check_conditional_direct(
    j: &FullJoint,
    a: &[NodeId],
    b: &[NodeId],
    c: &[NodeId],
    tol: f64,
) -> Result<bool, OracleError> {
    check_nodes(j, &[a, b, c])?;
    let nodes: Vec<NodeId> = a.iter().chain(b).chain(c).copied().collect();
    let p = j.marginal(&nodes);
    let (na, nb, nc) = (a.len(), b.len(), c.len());
    let a_part = (1usize << na) - 1;
    let b_part = ((1usize << nb) - 1) << na;
    let c_part = ((1usize << nc) - 1) << (na + nb);
    let mut p_c = vec![0.0; 1 << (na + nb + nc)];
    let mut p_ac = p_c.clone();
    let mut p_bc = p_c.clone();
    for (x, v) in p.iter().enumerate() {
        p_c[x & c_part] += v;
        p_ac[x & (a_part | c_part)] += v;
        p_bc[x & (b_part | c_part)] += v;
    }
    for (x, v) in p.iter().enumerate() {
        let lhs = v * p_c[x & c_part];
        let rhs = p_ac[x & (a_part | c_part)] * p_bc[x & (b_part | c_part)];
        if (lhs - rhs).abs() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Connected components of the tree once the nodes in `cut` are deleted.
fn components_without(tree: &TreeTopology, cut: u32) -> Vec<Vec<NodeId>> {
    let mut seen = cut;
    let mut out = Vec::new();
    for start in tree.nodes() {
        if seen & (1 << start.0) != 0 {
            continue;
        }
        seen |= 1 << start.0;
        let mut comp = vec![start];
        let mut k = 0;
        while k < comp.len() {
            for &w in tree.neighbors(comp[k]) {
                if seen & (1 << w.0) == 0 {
                    seen |= 1 << w.0;
                    comp.push(w);
                }
            }
            k += 1;
        }
        comp.sort();
        out.push(comp);
    }
    out
}

/// Checks that the components of `T ∖ C` are mutually independent given
/// `X_C`. Every separation statement with that `C` follows from these.
fn markov_given(tree: &TreeTopology, j: &FullJoint, cut: u32, tol: f64) -> Result<bool, OracleError> {
    let c: Vec<NodeId> = tree.nodes().filter(|v| cut & (1 << v.0) != 0).collect();
    let comps = components_without(tree, cut);
    for k in 0..comps.len().saturating_sub(1) {
        let rest: Vec<NodeId> = comps[k + 1..].iter().flatten().copied().collect();
        if !check_conditional_direct(j, &comps[k], &rest, &c, tol)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Every separation `A ⊥_T B | C` of the tree holds as a conditional
/// independence in `j`. All `C` are tried for small trees; larger trees
/// use single nodes and the set of inner nodes.
pub fn global_markov_check(tree: &TreeTopology, j: &FullJoint) -> Result<bool, OracleError> {
    global_markov_check_tol(tree, j, INDEPENDENCE_TOL)
}

pub fn global_markov_check_tol(tree: &TreeTopology, j: &FullJoint, tol: f64) -> Result<bool, OracleError> {
    let count = tree.node_count();
    if j.node_count() != count {
        return Err(OracleError::SizeMismatch {
            joint: j.node_count(),
            tree: count,
        });
    }
    if count > MAX_JOINT_NODES {
        return Err(OracleError::TooManyNodes(count));
    }
    let cuts: Vec<u32> = if count <= EXHAUSTIVE_MARKOV_NODES {
        (0..1u32 << count).collect()
    } else {
        let inner = tree.inner_nodes().iter().fold(0u32, |m, v| m | (1 << v.0));
        tree.nodes().map(|v| 1u32 << v.0).chain([inner]).collect()
    };
    for cut in cuts {
        if !markov_given(tree, j, cut, tol)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::newick::parse_newick;
    use crate::params::markov_joint;

    #[test]
    fn agrees_with_markov_joint() {
        let th = fixtures::quartet_theta();
        let a = joint_by_enumeration(&th).unwrap();
        let b = markov_joint(&th).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn fair_copy_tripod_has_two_atoms() {
        let t = parse_newick("(1,2,3)h;").unwrap();
        let th = ThetaParams::new(t.clone(), 0.5, vec![(0.0, 1.0); 4]).unwrap();
        let j = joint_by_enumeration(&th).unwrap();
        assert_eq!(j.support(), vec![0, 0b1111]);
        let p = j.leaf_marginal(&t);
        assert_eq!(*p.get(0), 0.5);
        assert_eq!(*p.get(0b111), 0.5);
    }

    #[test]
    fn independence_of_products_and_copies() {
        let t = fixtures::tripod_tree();
        let h = t.root();
        let l = |k| t.leaf(k).unwrap();
        let ind = joint_by_enumeration(&fixtures::tripod_independent_theta()).unwrap();
        assert!(check_independence(&ind, &[l(1)], &[l(2), l(3)]).unwrap());
        let th = ThetaParams::new(t.clone(), 0.5, vec![(0.0, 1.0); 4]).unwrap();
        let copy = joint_by_enumeration(&th).unwrap();
        assert!(!check_independence(&copy, &[l(1)], &[l(2)]).unwrap());
        let gen = joint_by_enumeration(&fixtures::tripod_theta()).unwrap();
        assert!(check_conditional_independence(&gen, &[l(1)], &[l(2)], h).unwrap());
        assert!(!check_independence(&gen, &[l(1)], &[l(2)]).unwrap());
        assert!(matches!(
            check_independence(&gen, &[l(1)], &[l(1)]),
            Err(OracleError::Overlap(_))
        ));
        assert!(matches!(
            check_conditional_independence(&copy, &[l(1)], &[l(2)], l(3)),
            Ok(true)
        ));
    }

    #[test]
    fn degenerate_conditioning_is_an_error() {
        let t = fixtures::tripod_tree();
        let th = ThetaParams::new(t.clone(), 1.0, vec![(0.2, 0.7); 4]).unwrap();
        let j = joint_by_enumeration(&th).unwrap();
        let l = |k| t.leaf(k).unwrap();
        assert!(matches!(
            check_conditional_independence(&j, &[l(1)], &[l(2)], t.root()),
            Err(OracleError::DegenerateConditioning(_))
        ));
    }

    #[test]
    fn markov_check_detects_perturbation() {
        let th = fixtures::tripod_theta();
        let j = markov_joint(&th).unwrap();
        assert!(global_markov_check(th.tree(), &j).unwrap());
        let mut values = j.values().to_vec();
        values[3] += 0.01;
        let total: f64 = values.iter().sum();
        values.iter_mut().for_each(|v| *v /= total);
        let bad = FullJoint::new(j.node_count(), values).unwrap();
        assert!(!global_markov_check(th.tree(), &bad).unwrap());
    }

    #[test]
    fn large_trees_use_restricted_cuts() {
        let th = fixtures::seven_leaf_theta();
        let j = markov_joint(&th).unwrap();
        assert!(j.node_count() > EXHAUSTIVE_MARKOV_NODES);
        assert!(global_markov_check(th.tree(), &j).unwrap());
    }
}
