//! Parameter charts of the Markov model on a rooted tree.
//!
//! Edge parameters are stored per child node: the entry of node `v` belongs
//! to the edge from its parent to `v`. The root carries no edge entry.

mod charts;
mod model;
mod psi;

use std::fmt;

use thiserror::Error;

use crate::moments::MomentError;
use crate::scalar::Scalar;
use crate::tree::{NodeId, TreeError, TreeTopology};

pub use charts::{
    check_omega, check_rho, check_theta, omega_to_rho, omega_to_theta, rho_monomial, rho_to_omega,
    theta_to_omega,
};
pub use model::{markov_joint, model_forward, MAX_JOINT_NODES};
pub use psi::{contracted_omega, psi, psi_contracted, psi_unchecked};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("expected {expected} values for {what}, got {got}")]
    WrongLength {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("parameters violate the chart constraints: {}", list(.0))]
    Constraint(Vec<Violation>),
    #[error("node {node} has degree {degree}, evaluation needs inner degrees at most 3")]
    DegreeTooHigh { node: String, degree: usize },
    #[error("node {0} is degenerate (mean offset squared equals 1)")]
    DegenerateNode(String),
    #[error("joint table over {0} nodes exceeds the cap of {max}", max = MAX_JOINT_NODES)]
    TooManyNodes(usize),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Moment(#[from] MomentError),
}

fn list(v: &[Violation]) -> String {
    v.iter().map(Violation::to_string).collect::<Vec<_>>().join("; ")
}

/// One failed inequality of a constraint system.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub location: String,
    pub condition: String,
    pub amount: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} (off by {:.3e})", self.location, self.condition, self.amount)
    }
}

/// Display name of the edge entering `child`.
pub(crate) fn edge_label(tree: &TreeTopology, child: NodeId) -> String {
    match tree.parent(child) {
        Some(p) => format!("edge ({},{})", tree.name(p), tree.name(child)),
        None => format!("root {}", tree.name(child)),
    }
}

fn check_node_vec<T>(tree: &TreeTopology, what: &'static str, v: &[T]) -> Result<(), ParamError> {
    if v.len() != tree.node_count() {
        return Err(ParamError::WrongLength {
            what,
            expected: tree.node_count(),
            got: v.len(),
        });
    }
    Ok(())
}

/// Conditional probabilities `θ^{(r)}_1` and `(θ^{(v)}_{1|0}, θ^{(v)}_{1|1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaParams<T = f64> {
    tree: TreeTopology,
    root_p1: T,
    cond: Vec<(T, T)>,
}

impl<T: Scalar> ThetaParams<T> {
    /// `cond[v]` is read for every non-root node `v`; the root entry is ignored.
    pub fn new(tree: TreeTopology, root_p1: T, mut cond: Vec<(T, T)>) -> Result<Self, ParamError> {
        check_node_vec(&tree, "edge conditionals", &cond)?;
        cond[tree.root().0] = (T::zero(), T::zero());
        Ok(ThetaParams {
            tree,
            root_p1,
            cond,
        })
    }

    pub fn tree(&self) -> &TreeTopology {
        &self.tree
    }

    pub fn root_p1(&self) -> &T {
        &self.root_p1
    }

    /// `(θ_{1|0}, θ_{1|1})` on the edge entering `child`.
    pub fn cond(&self, child: NodeId) -> &(T, T) {
        &self.cond[child.0]
    }

    pub fn conds(&self) -> &[(T, T)] {
        &self.cond
    }

    /// `θ^{(v)}_{x|y}` for a non-root node.
    pub fn prob(&self, v: NodeId, x: bool, parent: bool) -> T {
        let (p10, p11) = &self.cond[v.0];
        let p1 = if parent { p11.clone() } else { p10.clone() };
        if x {
            p1
        } else {
            T::one() - p1
        }
    }

    pub fn root_prob(&self, x: bool) -> T {
        if x {
            self.root_p1.clone()
        } else {
            T::one() - self.root_p1.clone()
        }
    }

    /// Number of free parameters, `2|E| + 1`.
    pub fn dimension(&self) -> usize {
        2 * self.tree.edge_count() + 1
    }

    pub fn to_f64(&self) -> ThetaParams<f64> {
        ThetaParams {
            tree: self.tree.clone(),
            root_p1: self.root_p1.to_f64(),
            cond: self.cond.iter().map(|(a, b)| (a.to_f64(), b.to_f64())).collect(),
        }
    }
}

/// Node mean offsets `μ̄_v` and edge regression coefficients `η_{u,v}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaParams<T = f64> {
    tree: TreeTopology,
    mu_bar: Vec<T>,
    eta: Vec<T>,
}

impl<T: Scalar> OmegaParams<T> {
    /// `eta[v]` belongs to the edge entering `v`; the root entry is ignored.
    pub fn new(tree: TreeTopology, mu_bar: Vec<T>, mut eta: Vec<T>) -> Result<Self, ParamError> {
        check_node_vec(&tree, "node mean offsets", &mu_bar)?;
        check_node_vec(&tree, "edge coefficients", &eta)?;
        eta[tree.root().0] = T::zero();
        Ok(OmegaParams { tree, mu_bar, eta })
    }

    pub fn tree(&self) -> &TreeTopology {
        &self.tree
    }

    pub fn mu_bar(&self, v: NodeId) -> &T {
        &self.mu_bar[v.0]
    }

    /// `η` on the edge entering `child`.
    pub fn eta(&self, child: NodeId) -> &T {
        &self.eta[child.0]
    }

    pub fn mu_bars(&self) -> &[T] {
        &self.mu_bar
    }

    pub fn etas(&self) -> &[T] {
        &self.eta
    }

    pub fn with_values(&self, mu_bar: Vec<T>, eta: Vec<T>) -> Result<Self, ParamError> {
        OmegaParams::new(self.tree.clone(), mu_bar, eta)
    }

    pub fn to_f64(&self) -> OmegaParams<f64> {
        OmegaParams {
            tree: self.tree.clone(),
            mu_bar: self.mu_bar.iter().map(Scalar::to_f64).collect(),
            eta: self.eta.iter().map(Scalar::to_f64).collect(),
        }
    }
}

/// Correlation chart `ρ̄_v`, `ρ_{uv}`, valid away from degenerate nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoParams {
    tree: TreeTopology,
    rho_bar: Vec<f64>,
    rho: Vec<f64>,
}

impl RhoParams {
    pub fn new(tree: TreeTopology, rho_bar: Vec<f64>, mut rho: Vec<f64>) -> Result<Self, ParamError> {
        check_node_vec(&tree, "node correlations", &rho_bar)?;
        check_node_vec(&tree, "edge correlations", &rho)?;
        rho[tree.root().0] = 0.0;
        Ok(RhoParams { tree, rho_bar, rho })
    }

    pub fn tree(&self) -> &TreeTopology {
        &self.tree
    }

    pub fn rho_bar(&self, v: NodeId) -> f64 {
        self.rho_bar[v.0]
    }

    /// `ρ_{uv}` on the edge entering `child`.
    pub fn rho(&self, child: NodeId) -> f64 {
        self.rho[child.0]
    }

    pub fn rho_bars(&self) -> &[f64] {
        &self.rho_bar
    }

    pub fn rhos(&self) -> &[f64] {
        &self.rho
    }

    /// `t_v = √(1 + ρ̄_v²/4) + ρ̄_v/2`.
    pub fn t(&self, v: NodeId) -> f64 {
        let h = self.rho_bar[v.0] / 2.0;
        (1.0 + h * h).sqrt() + h
    }
}
