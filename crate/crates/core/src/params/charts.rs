//! Conversions between the θ, ω and ρ charts and their constraint systems.

use super::{edge_label, OmegaParams, ParamError, RhoParams, ThetaParams, Violation};
use crate::scalar::Scalar;
use crate::subset;

/// `η_{u,v} = θ_{1|1} − θ_{1|0}` and `μ̄_v = 1 − 2λ_v`, propagating `λ` from the root.
pub fn theta_to_omega<T: Scalar>(theta: &ThetaParams<T>) -> OmegaParams<T> {
    let tree = theta.tree();
    let count = tree.node_count();
    let mut lambda = vec![T::zero(); count];
    let mut eta = vec![T::zero(); count];
    for &v in tree.preorder() {
        match tree.parent(v) {
            None => lambda[v.0] = theta.root_p1().clone(),
            Some(u) => {
                let (p10, p11) = theta.cond(v).clone();
                let lu = lambda[u.0].clone();
                lambda[v.0] = lu.clone() * p11.clone() + (T::one() - lu) * p10.clone();
                eta[v.0] = p11 - p10;
            }
        }
    }
    let two = T::from_int(2);
    let mu_bar = lambda.into_iter().map(|l| T::one() - two.clone() * l).collect();
    OmegaParams::new(tree.clone(), mu_bar, eta).expect("vectors sized by the tree")
}

/// Inverse of [`theta_to_omega`]; fails if `ω` violates the constraints by more than `tol`.
pub fn omega_to_theta<T: Scalar>(omega: &OmegaParams<T>, tol: f64) -> Result<ThetaParams<T>, ParamError> {
    let violations = check_omega(omega, tol);
    if !violations.is_empty() {
        return Err(ParamError::Constraint(violations));
    }
    let tree = omega.tree();
    let half = T::half();
    let mut cond = vec![(T::zero(), T::zero()); tree.node_count()];
    for v in tree.nodes() {
        if let Some(u) = tree.parent(v) {
            let base = half.clone() * (T::one() - omega.mu_bar(v).clone());
            let mu_u = omega.mu_bar(u).clone();
            let eta = omega.eta(v).clone();
            let p10 = base.clone() - half.clone() * eta.clone() * (T::one() - mu_u.clone());
            let p11 = base + half.clone() * eta * (T::one() + mu_u);
            cond[v.0] = (p10, p11);
        }
    }
    let root_p1 = half * (T::one() - omega.mu_bar(tree.root()).clone());
    ThetaParams::new(tree.clone(), root_p1, cond)
}

fn push_if<T: Scalar>(
    out: &mut Vec<Violation>,
    location: &str,
    condition: &str,
    lhs: T,
    rhs: T,
    tol: f64,
) {
    let excess = (lhs - rhs).to_f64();
    if excess > tol || excess.is_nan() {
        out.push(Violation {
            location: location.to_string(),
            condition: condition.to_string(),
            amount: excess,
        });
    }
}

/// All θ entries lie in `[0, 1]`.
pub fn check_theta<T: Scalar>(theta: &ThetaParams<T>, tol: f64) -> Vec<Violation> {
    let tree = theta.tree();
    let mut out = Vec::new();
    let mut range = |loc: &str, name: &str, x: &T| {
        push_if(&mut out, loc, &format!("{name} ≥ 0"), -x.clone(), T::zero(), tol);
        push_if(&mut out, loc, &format!("{name} ≤ 1"), x.clone(), T::one(), tol);
    };
    range(&edge_label(tree, tree.root()), "θ_1", theta.root_p1());
    for &v in tree.preorder() {
        if tree.parent(v).is_some() {
            let loc = edge_label(tree, v);
            let (p10, p11) = theta.cond(v);
            range(&loc, "θ_1|0", p10);
            range(&loc, "θ_1|1", p11);
        }
    }
    out
}

/// Root range and the four linear inequalities on every edge.
pub fn check_omega<T: Scalar>(omega: &OmegaParams<T>, tol: f64) -> Vec<Violation> {
    let tree = omega.tree();
    let mut out = Vec::new();
    let root = tree.root();
    let mr = omega.mu_bar(root).clone();
    let loc = edge_label(tree, root);
    push_if(&mut out, &loc, "μ̄_r ≥ -1", -mr.clone(), T::one(), tol);
    push_if(&mut out, &loc, "μ̄_r ≤ 1", mr, T::one(), tol);
    for &v in tree.preorder() {
        let Some(u) = tree.parent(v) else { continue };
        let loc = edge_label(tree, v);
        let (mu, mv, eta) = (omega.mu_bar(u).clone(), omega.mu_bar(v).clone(), omega.eta(v).clone());
        let a = (T::one() - mu.clone()) * eta.clone();
        let b = (T::one() + mu) * eta;
        push_if(&mut out, &loc, "-(1+μ̄_v) ≤ (1-μ̄_u)η", -(T::one() + mv.clone()), a.clone(), tol);
        push_if(&mut out, &loc, "(1-μ̄_u)η ≤ 1-μ̄_v", a, T::one() - mv.clone(), tol);
        push_if(&mut out, &loc, "-(1-μ̄_v) ≤ (1+μ̄_u)η", -(T::one() - mv.clone()), b.clone(), tol);
        push_if(&mut out, &loc, "(1+μ̄_u)η ≤ 1+μ̄_v", b, T::one() + mv, tol);
    }
    out
}

/// `ρ̄_v = 2μ̄_v/√(1−μ̄_v²)` and `ρ_{uv} = √((1−μ̄_u²)/(1−μ̄_v²)) η_{u,v}`.
pub fn omega_to_rho(omega: &OmegaParams<f64>) -> Result<RhoParams, ParamError> {
    let tree = omega.tree();
    let mut scale = vec![0.0; tree.node_count()];
    for v in tree.nodes() {
        let m = *omega.mu_bar(v);
        let s = (1.0 - m * m).sqrt();
        if !(s > 0.0) {
            return Err(ParamError::DegenerateNode(tree.name(v)));
        }
        scale[v.0] = s;
    }
    let rho_bar = tree.nodes().map(|v| 2.0 * omega.mu_bar(v) / scale[v.0]).collect();
    let rho = tree
        .nodes()
        .map(|v| match tree.parent(v) {
            Some(u) => scale[u.0] / scale[v.0] * omega.eta(v),
            None => 0.0,
        })
        .collect();
    RhoParams::new(tree.clone(), rho_bar, rho)
}

/// Inverse of [`omega_to_rho`].
pub fn rho_to_omega(rho: &RhoParams) -> OmegaParams<f64> {
    let tree = rho.tree();
    let mu_bar = rho.rho_bars().iter().map(|rb| rb / (4.0 + rb * rb).sqrt()).collect();
    let eta = tree
        .nodes()
        .map(|v| match tree.parent(v) {
            Some(u) => {
                let (ru, rv) = (rho.rho_bar(u), rho.rho_bar(v));
                ((4.0 + ru * ru) / (4.0 + rv * rv)).sqrt() * rho.rho(v)
            }
            None => 0.0,
        })
        .collect();
    OmegaParams::new(tree.clone(), mu_bar, eta).expect("vectors sized by the tree")
}

/// Edge constraints of the ρ chart in terms of `t_v`.
pub fn check_rho(rho: &RhoParams, tol: f64) -> Vec<Violation> {
    let tree = rho.tree();
    let mut out = Vec::new();
    for &v in tree.preorder() {
        let Some(u) = tree.parent(v) else { continue };
        let loc = edge_label(tree, v);
        let (tu, tv, r) = (rho.t(u), rho.t(v), rho.rho(v));
        push_if(&mut out, &loc, "-t_u t_v ≤ ρ", -tu * tv, r, tol);
        push_if(&mut out, &loc, "ρ ≤ t_u/t_v", r, tu / tv, tol);
        push_if(&mut out, &loc, "-1/(t_u t_v) ≤ ρ", -1.0 / (tu * tv), r, tol);
        push_if(&mut out, &loc, "ρ ≤ t_v/t_u", r, tv / tu, tol);
    }
    out
}

/// `ρ_I = Π_{v∈V(I)∖I} ρ̄_v^{deg(v)−2} Π_{(u,v)∈E(I)} ρ_{uv}`.
pub fn rho_monomial(rho: &RhoParams, mask: u32) -> Result<f64, ParamError> {
    let tree = rho.tree();
    let sub = tree.leaf_subtree(mask)?;
    let mut value = 1.0;
    for &v in sub.nodes() {
        let in_i = tree
            .leaf_label(v)
            .is_some_and(|l| mask & subset::leaf_bit(l) != 0);
        if !in_i {
            value *= rho.rho_bar(v).powi(sub.degree(v) as i32 - 2);
        }
    }
    for &e in sub.edges() {
        let (_, child) = tree.orient(e);
        value *= rho.rho(child);
    }
    Ok(value)
}
