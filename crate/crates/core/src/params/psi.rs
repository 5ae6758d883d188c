//! The monomial parametrization `ψ_T` of tree cumulants in the ω chart.

use super::{OmegaParams, ParamError};
use crate::moments::TreeCumulants;
use crate::scalar::Scalar;
use crate::subset;
use crate::tree::TreeTopology;

fn pow<T: Scalar>(x: &T, k: usize) -> T {
    (0..k).fold(T::one(), |acc, _| acc * x.clone())
}

fn check_degrees(tree: &TreeTopology) -> Result<(), ParamError> {
    for v in tree.nodes() {
        if !tree.is_leaf(v) && tree.degree(v) > 3 {
            return Err(ParamError::DegreeTooHigh {
                node: tree.name(v),
                degree: tree.degree(v),
            });
        }
    }
    Ok(())
}

/// `ψ_T(ω)` for a tree whose inner nodes have degree at most three.
pub fn psi<T: Scalar>(omega: &OmegaParams<T>) -> Result<TreeCumulants<T>, ParamError> {
    check_degrees(omega.tree())?;
    psi_unchecked(omega)
}

/// `κ_I = ¼(1−μ̄_{r(I)}²) Π_{v∈V(I)∖I} μ̄_v^{deg(v)−2} Π_{(u,v)∈E(I)} η_{u,v}` with
/// degrees taken in `T(I)`, evaluated for any inner degrees.
pub fn psi_unchecked<T: Scalar>(omega: &OmegaParams<T>) -> Result<TreeCumulants<T>, ParamError> {
    let tree = omega.tree();
    let n = tree.leaf_count();
    if n > subset::MAX_DENSE_LEAVES {
        return Err(ParamError::Moment(crate::moments::MomentError::TooManyLeaves(n)));
    }
    let quarter = T::from_ratio(1, 4);
    let mut values = vec![T::zero(); 1 << n];
    for (mask, slot) in values.iter_mut().enumerate() {
        let mask = mask as u32;
        if subset::size(mask) < 2 {
            continue;
        }
        let sub = tree.leaf_subtree(mask)?;
        let mr = omega.mu_bar(sub.root()).clone();
        let mut value = quarter.clone() * (T::one() - mr.clone() * mr);
        for &v in sub.nodes() {
            let in_i = tree
                .leaf_label(v)
                .is_some_and(|l| mask & subset::leaf_bit(l) != 0);
            if !in_i {
                value = value * pow(omega.mu_bar(v), sub.degree(v) - 2);
            }
        }
        for &e in sub.edges() {
            let (_, child) = tree.orient(e);
            value = value * omega.eta(child).clone();
        }
        *slot = value;
    }
    let two = T::from_int(2);
    let means = tree
        .leaves()
        .iter()
        .map(|&v| (T::one() - omega.mu_bar(v).clone()) / two.clone())
        .collect();
    Ok(TreeCumulants::new(tree.clone(), means, values)?)
}

/// The point `ω*` on the trivalent expansion `T*`: `η* = 1` on the new edges
/// and `μ̄*` constant on each contracted class. Trivalent input is returned unchanged.
pub fn contracted_omega<T: Scalar>(omega: &OmegaParams<T>) -> Result<OmegaParams<T>, ParamError> {
    let tree = omega.tree();
    if tree.max_inner_degree() <= 3 {
        return Ok(omega.clone());
    }
    let (expanded, _) = tree.trivalent_expansion()?;
    let original = tree.node_count();
    let count = expanded.node_count();
    let mut mu_bar = vec![T::zero(); count];
    let mut eta = vec![T::zero(); count];
    for &v in expanded.preorder() {
        if v.0 < original {
            mu_bar[v.0] = omega.mu_bar(v).clone();
            eta[v.0] = omega.eta(v).clone();
        } else {
            let p = expanded.parent(v).expect("new nodes are never the root");
            mu_bar[v.0] = mu_bar[p.0].clone();
            eta[v.0] = T::one();
        }
    }
    OmegaParams::new(expanded, mu_bar, eta)
}

/// `ψ` for arbitrary inner degrees, evaluated on `T*`.
///
/// The result is expressed on the trivalent expansion: its values are the
/// tree cumulants of `T*`.
pub fn psi_contracted<T: Scalar>(omega: &OmegaParams<T>) -> Result<TreeCumulants<T>, ParamError> {
    psi(&contracted_omega(omega)?)
}
