//! The Markov process on a rooted tree and its leaf marginal `f_T`.

use super::{ParamError, ThetaParams};
use crate::joint::FullJoint;
use crate::moments::ProbabilityTable;
use crate::scalar::Scalar;
use crate::subset::{self, MAX_DENSE_LEAVES};

/// Largest node count for a full joint table.
pub const MAX_JOINT_NODES: usize = 20;

/// `p_α(θ) = Π_v θ^{(v)}_{α_v|α_{pa(v)}}` over all node assignments.
///
/// Built top-down: each node splits the mass of every partial assignment
/// of its ancestors according to its conditional distribution.
pub fn markov_joint<T: Scalar>(theta: &ThetaParams<T>) -> Result<FullJoint<T>, ParamError> {
    let tree = theta.tree();
    let count = tree.node_count();
    if count > MAX_JOINT_NODES {
        return Err(ParamError::TooManyNodes(count));
    }
    let mut values = vec![T::zero(); 1 << count];
    let root = tree.root();
    values[0] = theta.root_prob(false);
    values[1 << root.0] = theta.root_prob(true);
    let mut assigned = 1usize << root.0;
    for &v in &tree.preorder()[1..] {
        let u = tree.parent(v).expect("non-root node");
        let bit = 1usize << v.0;
        for mask in 0..values.len() {
            if mask & !assigned != 0 {
                continue;
            }
            let parent_on = mask & (1 << u.0) != 0;
            let mass = values[mask].clone();
            values[mask | bit] = mass.clone() * theta.prob(v, true, parent_on);
            values[mask] = mass * theta.prob(v, false, parent_on);
        }
        assigned |= bit;
    }
    FullJoint::new(count, values)
}

/// `f_T(θ)`: the distribution of the leaves, by leaf-to-root elimination.
///
/// Each node keeps, for both of its states, the probability of every
/// pattern of the leaves below it.
pub fn model_forward<T: Scalar>(theta: &ThetaParams<T>) -> Result<ProbabilityTable<T>, ParamError> {
    let tree = theta.tree();
    let n = tree.leaf_count();
    if n > MAX_DENSE_LEAVES {
        return Err(ParamError::Moment(crate::moments::MomentError::TooManyLeaves(n)));
    }
    // messages[v] = list of (leaf pattern below v, [P(pattern | X_v = 0), P(pattern | X_v = 1)])
    let mut messages: Vec<Vec<(u32, [T; 2])>> = vec![Vec::new(); tree.node_count()];
    for &v in tree.preorder().iter().rev() {
        let mut acc: Vec<(u32, [T; 2])> = match tree.leaf_label(v) {
            Some(l) => vec![
                (0, [T::one(), T::zero()]),
                (subset::leaf_bit(l), [T::zero(), T::one()]),
            ],
            None => vec![(0, [T::one(), T::one()])],
        };
        for c in tree.children(v) {
            let child = std::mem::take(&mut messages[c.0]);
            let lifted: Vec<(u32, [T; 2])> = child
                .into_iter()
                .map(|(pattern, [l0, l1])| {
                    let up = |x: bool| {
                        theta.prob(c, false, x) * l0.clone() + theta.prob(c, true, x) * l1.clone()
                    };
                    (pattern, [up(false), up(true)])
                })
                .collect();
            let mut next = Vec::with_capacity(acc.len() * lifted.len());
            for (pa, [a0, a1]) in &acc {
                for (pb, [b0, b1]) in &lifted {
                    next.push((pa | pb, [a0.clone() * b0.clone(), a1.clone() * b1.clone()]));
                }
            }
            acc = next;
        }
        messages[v.0] = acc;
    }
    let mut values = vec![T::zero(); 1 << n];
    for (pattern, [l0, l1]) in std::mem::take(&mut messages[tree.root().0]) {
        values[pattern as usize] = theta.root_prob(false) * l0 + theta.root_prob(true) * l1;
    }
    Ok(ProbabilityTable::new(n, values)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newick::parse_newick;

    #[test]
    fn copy_tripod_joint() {
        let t = parse_newick("(1,2,3)h;").unwrap();
        let th = ThetaParams::new(t, 0.5, vec![(0.0, 1.0); 4]).unwrap();
        let j = markov_joint(&th).unwrap();
        assert_eq!(*j.get(0), 0.5);
        assert_eq!(*j.get(0b1111), 0.5);
        assert_eq!(j.support(), vec![0, 0b1111]);
        let p = model_forward(&th).unwrap();
        assert_eq!(p.values()[0], 0.5);
        assert_eq!(p.values()[7], 0.5);
        assert_eq!(p.values().iter().filter(|&&x| x != 0.0).count(), 2);
    }

    #[test]
    fn single_edge_margin() {
        let t = parse_newick("(1,2)r;").unwrap();
        let one = t.leaf(1).unwrap();
        let mut cond = vec![(0.5, 0.5); 3];
        cond[one.0] = (0.3, 0.8);
        let th = ThetaParams::new(t.clone(), 0.8, cond).unwrap();
        let j = markov_joint(&th).unwrap();
        let m = j.marginal(&[one]);
        assert!((m[1] - 0.7).abs() < 1e-15);
        assert!((j.total() - 1.0).abs() < 1e-15);
        let p = model_forward(&th).unwrap();
        assert!((p.values()[1] + p.values()[3] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn forward_matches_joint_marginal() {
        let t = parse_newick("((1,2)a,3,((4,5)d,6)c)b;").unwrap();
        let cond: Vec<(f64, f64)> = (0..t.node_count())
            .map(|k| (0.1 + 0.07 * k as f64, 0.9 - 0.05 * k as f64))
            .collect();
        let th = ThetaParams::new(t.clone(), 0.35, cond).unwrap();
        let p = model_forward(&th).unwrap();
        let q = markov_joint(&th).unwrap().leaf_marginal(&t);
        for (a, b) in p.values().iter().zip(q.values()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn root_may_be_a_leaf() {
        let t = parse_newick("((2,3)x)1;").unwrap();
        let th = ThetaParams::new(t.clone(), 0.6, vec![(0.2, 0.7); t.node_count()]).unwrap();
        let p = model_forward(&th).unwrap();
        let q = markov_joint(&th).unwrap().leaf_marginal(&t);
        for (a, b) in p.values().iter().zip(q.values()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((p.values()[1..].iter().step_by(2).sum::<f64>() - 0.6).abs() < 1e-15);
    }
}
