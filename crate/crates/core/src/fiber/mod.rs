//! Identifiability: the structure of the set of parameters that map to a
//! given distribution.
//!
//! Zeros among the pairwise covariances determine the isolated edges, the
//! forest `T̂` and the degenerate nodes, which in turn decide whether the
//! fiber is finite, a manifold with corners, or singular.

mod classes;
mod recover;
mod signs;
mod singular;
mod summary;

use thiserror::Error;

use crate::moments::{lambda_to_mu, p_to_lambda, CentralMoments, MomentError};
use crate::params::{check_omega, model_forward, omega_to_theta, OmegaParams, ParamError};
use crate::tolerance::Tolerances;
use crate::tree::{Edge, Forest, NodeId, TreeError, TreeTopology};

pub use classes::{edge_classes, isolated_edges, p_forest_and_degenerates, path_endpoints, EdgeClasses};
pub use recover::{
    inner_edge_eta_sq, recover_parameters, recover_tripod, PathInvariant, RecoveredSquares, Tripod,
};
pub use signs::{consistent_sign_assignment, SignAssignment};
pub use singular::{
    deepest_singularity, DeepestSingularity, MinimalPair, SingularConstraint, MAX_SINGULAR_ITEMS,
};
pub use summary::{covariance_summary, CovarianceSummary};

/// Largest number of inner nodes for which the sign orbit is enumerated.
pub const MAX_ORBIT_NODES: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FiberError {
    #[error("leaf {0} has a degenerate margin")]
    DegenerateLeaf(usize),
    #[error("tree has {tree} leaves but the data has {data}")]
    LeafCountMismatch { tree: usize, data: usize },
    #[error("no admissible choice of leaves for {0}")]
    NoAdmissibleChoice(String),
    #[error("zero denominator for {0}")]
    ZeroDenominator(String),
    #[error("input is off the model: {0}")]
    OffModel(String),
    #[error("input is off the model: {what} differs between leaf choices ({first} vs {second})")]
    Inconsistent { what: String, first: f64, second: f64 },
    #[error("input is off the model: no sign pattern matches the signs of the covariances")]
    NoConsistentSigns,
    #[error("input is off the model: recovered point misses the data by {0:e}")]
    Reproduction(f64),
    #[error("{0} is a leaf; sign switches act on inner nodes")]
    LeafSwitch(String),
    #[error("fiber is not singular")]
    NotSingular,
    #[error("enumeration over {0} items exceeds the cap")]
    CapExceeded(usize),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Moment(#[from] MomentError),
}

impl FiberError {
    /// True when the input is not a distribution of the model.
    pub fn is_off_model(&self) -> bool {
        matches!(
            self,
            FiberError::OffModel(_)
                | FiberError::Inconsistent { .. }
                | FiberError::NoConsistentSigns
                | FiberError::Reproduction(_)
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classification {
    /// `2^{|V|−n}` isolated points.
    FiniteSmooth { count: u64 },
    /// Manifold with corners of dimension `2 l₂`.
    ManifoldWithCorners { dimension: usize },
    Singular(DeepestSingularity),
}

impl Classification {
    pub fn tag(&self) -> &'static str {
        match self {
            Classification::FiniteSmooth { .. } => "finite",
            Classification::ManifoldWithCorners { .. } => "manifold",
            Classification::Singular(_) => "singular",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiberReport {
    pub tree: TreeTopology,
    pub isolated: Vec<Edge>,
    pub forest: Forest,
    pub classes: EdgeClasses,
    pub degenerate_nodes: Vec<NodeId>,
    pub classification: Classification,
    pub recovered: Option<RecoveredSquares>,
    pub signs: Option<SignAssignment>,
    pub points: Vec<OmegaParams>,
    pub warnings: Vec<String>,
}

/// Structure of the fiber without recovering parameters.
pub fn classify_fiber(tree: &TreeTopology, c: &CovarianceSummary) -> Result<FiberReport, FiberError> {
    if c.n() != tree.leaf_count() {
        return Err(FiberError::LeafCountMismatch {
            tree: tree.leaf_count(),
            data: c.n(),
        });
    }
    for l in 1..=c.n() {
        if !(c.variance(l) > 0.0) {
            return Err(FiberError::DegenerateLeaf(l));
        }
    }
    let isolated = isolated_edges(tree, c);
    let classes = edge_classes(tree, &isolated);
    let (forest, degenerate) = p_forest_and_degenerates(tree, &isolated);
    let inner = tree.inner_nodes();
    let classification = if !degenerate.is_empty() {
        Classification::Singular(deepest_singularity(tree, &isolated, &degenerate, c)?)
    } else if inner.iter().all(|&v| forest.degree(v) >= 3) {
        let m = inner.len();
        Classification::FiniteSmooth {
            count: if m >= 64 { u64::MAX } else { 1u64 << m },
        }
    } else {
        let l2 = inner.iter().filter(|&&v| forest.degree(v) == 2).count();
        Classification::ManifoldWithCorners { dimension: 2 * l2 }
    };
    Ok(FiberReport {
        tree: tree.clone(),
        isolated,
        forest,
        classes,
        degenerate_nodes: degenerate,
        classification,
        recovered: None,
        signs: None,
        points: Vec::new(),
        warnings: c.warnings().to_vec(),
    })
}

/// Largest deviation between the central moments of `omega` and `m`.
pub fn reproduction_error(omega: &OmegaParams, m: &CentralMoments, tol: f64) -> Result<f64, FiberError> {
    let theta = omega_to_theta(omega, tol)?;
    let p = model_forward(&theta)?;
    let mu = lambda_to_mu(&p_to_lambda(&p));
    let mut worst: f64 = 0.0;
    for (a, b) in mu.values().iter().zip(m.values()) {
        worst = worst.max((a - b).abs());
    }
    for (a, b) in mu.means().iter().zip(m.means()) {
        worst = worst.max((a - b).abs());
    }
    Ok(worst)
}

/// Classification, recovered squares and, for finite fibers, every point.
pub fn analyze_fiber(
    tree: &TreeTopology,
    m: &CentralMoments,
    tol: &Tolerances,
) -> Result<FiberReport, FiberError> {
    let c = covariance_summary(m, tol.zero_eps);
    let mut report = classify_fiber(tree, &c)?;
    if matches!(report.classification, Classification::Singular(_)) {
        return Ok(report);
    }
    let squares = recover_parameters(
        tree,
        &c,
        &report.forest,
        &report.isolated,
        &report.classes,
        tol.recovery,
    )?;
    if matches!(report.classification, Classification::FiniteSmooth { .. }) {
        let (signs, omega) = consistent_sign_assignment(tree, &c, &squares)?;
        let violations = check_omega(&omega, tol.reproduction);
        if !violations.is_empty() {
            return Err(FiberError::OffModel(format!(
                "recovered point violates the constraints: {}",
                violations[0]
            )));
        }
        let err = reproduction_error(&omega, m, tol.reproduction)?;
        if err > tol.reproduction {
            return Err(FiberError::Reproduction(err));
        }
        report.points = enumerate_fiber(&omega)?;
        report.signs = Some(signs);
    }
    report.recovered = Some(squares);
    Ok(report)
}

/// `δ_h`: negates `μ̄_h` and `η` on every edge at `h`.
pub fn local_sign_switch(omega: &OmegaParams, h: NodeId) -> Result<OmegaParams, FiberError> {
    let tree = omega.tree();
    if !tree.contains(h) {
        return Err(FiberError::Tree(TreeError::UnknownNode(h)));
    }
    if tree.is_leaf(h) {
        return Err(FiberError::LeafSwitch(tree.name(h)));
    }
    let mut mu_bar = omega.mu_bars().to_vec();
    let mut eta = omega.etas().to_vec();
    mu_bar[h.0] = -mu_bar[h.0];
    if tree.parent(h).is_some() {
        eta[h.0] = -eta[h.0];
    }
    for c in tree.children(h) {
        eta[c.0] = -eta[c.0];
    }
    Ok(omega.with_values(mu_bar, eta)?)
}

/// The orbit of `omega` under all compositions of local sign switches, without repeats.
pub fn enumerate_fiber(omega: &OmegaParams) -> Result<Vec<OmegaParams>, FiberError> {
    let inner = omega.tree().inner_nodes();
    if inner.len() > MAX_ORBIT_NODES {
        return Err(FiberError::CapExceeded(inner.len()));
    }
    let mut out: Vec<OmegaParams> = Vec::new();
    for mask in 0u32..(1 << inner.len()) {
        let mut point = omega.clone();
        for (k, &h) in inner.iter().enumerate() {
            if mask & (1 << k) != 0 {
                point = local_sign_switch(&point, h)?;
            }
        }
        let same = |a: &OmegaParams, b: &OmegaParams| {
            a.mu_bars() == b.mu_bars() && a.etas() == b.etas()
        };
        if !out.iter().any(|p| same(p, &point)) {
            out.push(point);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::params::{psi, ThetaParams};

    fn moments(theta: &ThetaParams) -> CentralMoments {
        lambda_to_mu(&p_to_lambda(&model_forward(theta).unwrap()))
    }

    fn names(tree: &TreeTopology, edges: &[Edge]) -> Vec<String> {
        let mut out: Vec<String> = edges
            .iter()
            .map(|e| {
                let (p, c) = tree.orient(*e);
                format!("({},{})", tree.name(p), tree.name(c))
            })
            .collect();
        out.sort();
        out
    }

    #[test]
    fn quartet_fiber_has_four_points() {
        let th = fixtures::quartet_theta();
        let m = moments(&th);
        let report = analyze_fiber(th.tree(), &m, &Tolerances::default()).unwrap();
        assert_eq!(report.classification, Classification::FiniteSmooth { count: 4 });
        assert_eq!(report.points.len(), 4);
        let target = psi(&fixtures::quartet_omega()).unwrap();
        for point in &report.points {
            let k = psi(point).unwrap();
            for (a, b) in k.values().iter().zip(target.values()) {
                assert!((a - b).abs() < 1e-10);
            }
            let tuple = fixtures::quartet_tuple(point);
            assert!(fixtures::QUARTET_FIBER
                .iter()
                .any(|f| f.iter().zip(&tuple).all(|(x, y)| (x - y).abs() < 1e-10)));
        }
    }

    #[test]
    fn recovered_squares_match_quartet() {
        let th = fixtures::quartet_theta();
        let report = analyze_fiber(th.tree(), &moments(&th), &Tolerances::default()).unwrap();
        let sq = report.recovered.unwrap();
        let t = th.tree();
        let r = t.node_by_name("r").unwrap();
        let a = t.node_by_name("a").unwrap();
        let one = t.node_by_name("1").unwrap();
        assert!((sq.mu_bar_sq[r.0].unwrap() - 0.36).abs() < 1e-12);
        assert!((sq.eta_sq[one.0].unwrap() - 0.25).abs() < 1e-12);
        assert!((sq.eta_sq[a.0].unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn tripod_fiber_has_two_points() {
        let th = fixtures::tripod_theta();
        let report = analyze_fiber(th.tree(), &moments(&th), &Tolerances::default()).unwrap();
        assert_eq!(report.classification, Classification::FiniteSmooth { count: 2 });
        assert_eq!(report.points.len(), 2);
    }

    #[test]
    fn seven_leaf_zero_pattern() {
        let th = fixtures::seven_leaf_theta();
        let t = th.tree();
        let report = analyze_fiber(t, &moments(&th), &Tolerances::default()).unwrap();
        assert_eq!(
            names(t, &report.isolated),
            ["(b,c)", "(c,d)", "(c,e)", "(e,6)", "(e,7)"]
        );
        let mut active: Vec<Vec<String>> = report.classes.active.iter().map(|c| names(t, c)).collect();
        active.sort();
        assert_eq!(
            active,
            vec![
                vec!["(a,1)".to_string()],
                vec!["(a,2)".to_string()],
                vec!["(b,3)".to_string(), "(b,a)".to_string()],
                vec!["(d,4)".to_string(), "(d,5)".to_string()],
            ]
        );
        assert_eq!(report.classes.isolated.len(), 1);
        let degenerate: Vec<String> = report.degenerate_nodes.iter().map(|&v| t.name(v)).collect();
        assert_eq!(degenerate, ["c", "e"]);
        assert!(matches!(report.classification, Classification::Singular(_)));
    }

    #[test]
    fn quartet_manifold_case() {
        let th = fixtures::quartet_manifold_theta();
        let report = analyze_fiber(th.tree(), &moments(&th), &Tolerances::default()).unwrap();
        assert_eq!(
            report.classification,
            Classification::ManifoldWithCorners { dimension: 4 }
        );
        assert!(report.points.is_empty());
        let sq = report.recovered.unwrap();
        assert_eq!(sq.path_invariants.len(), 2);
        let omega = theta_to_omega_f64(&th);
        for inv in &sq.path_invariants {
            let (eta_sq, cov_sq) = path_values(&omega, inv);
            assert!((inv.eta_sq - eta_sq).abs() < 1e-10);
            assert!((inv.cov_sq - cov_sq).abs() < 1e-10);
        }
    }

    /// `η_{x,y}²` and `μ_{xy}²` computed from the generating parameters.
    fn path_values(omega: &OmegaParams, inv: &PathInvariant) -> (f64, f64) {
        let t = omega.tree();
        let var = |v: NodeId| (1.0 - omega.mu_bar(v).powi(2)) / 4.0;
        let nodes = t.path_nodes(inv.from, inv.to).unwrap();
        let top = *nodes.iter().min_by_key(|&&v| t.depth(v)).unwrap();
        let mut prod = var(top);
        for e in &inv.edges {
            let (_, c) = t.orient(*e);
            prod *= omega.eta(c);
        }
        (prod * prod / var(inv.from).powi(2), prod * prod)
    }

    fn theta_to_omega_f64(th: &ThetaParams) -> OmegaParams {
        crate::params::theta_to_omega(th)
    }

    #[test]
    fn degree_two_path_through_root() {
        let t = crate::newick::parse_newick("((1,2)x,(3,4)y,5)m;").unwrap();
        let th = fixtures::theta_from_names(&t, 0.4, (0.25, 0.8), &[("5", (0.6, 0.6))]);
        let report = analyze_fiber(&t, &moments(&th), &Tolerances::default()).unwrap();
        assert_eq!(
            report.classification,
            Classification::ManifoldWithCorners { dimension: 2 }
        );
        let sq = report.recovered.unwrap();
        let om = theta_to_omega_f64(&th);
        let inv = &sq.path_invariants[0];
        let x = t.node_by_name("x").unwrap();
        let y = t.node_by_name("y").unwrap();
        assert_eq!((inv.from, inv.to), (x, y));
        let (eta_sq, cov_sq) = path_values(&om, inv);
        assert!((inv.eta_sq - eta_sq).abs() < 1e-10);
        assert!((inv.cov_sq - cov_sq).abs() < 1e-10);
    }

    #[test]
    fn independent_tripod_is_singular() {
        let th = fixtures::tripod_independent_theta();
        let report = analyze_fiber(th.tree(), &moments(&th), &Tolerances::default()).unwrap();
        let Classification::Singular(deep) = report.classification else {
            panic!("expected singular");
        };
        assert_eq!(deep.minimal_pairs.len(), 4);
        assert_eq!(deep.constraints.len(), 4);
        assert_eq!(deep.minimal_pairs[0].nodes.len() + deep.minimal_pairs[0].edges.len(), 1);
    }

    #[test]
    fn sign_switch_rejects_leaves_and_is_an_involution() {
        let om = fixtures::quartet_omega();
        let one = om.tree().leaf(1).unwrap();
        assert!(matches!(local_sign_switch(&om, one), Err(FiberError::LeafSwitch(_))));
        let r = om.tree().root();
        let twice = local_sign_switch(&local_sign_switch(&om, r).unwrap(), r).unwrap();
        assert_eq!(twice, om);
    }

    #[test]
    fn off_model_input_is_rejected() {
        let th = fixtures::quartet_theta();
        let m = moments(&th);
        let mut values = m.values().to_vec();
        values[0b0011] *= 1.5;
        let bad = CentralMoments::new(4, m.means().to_vec(), values).unwrap();
        let err = analyze_fiber(th.tree(), &bad, &Tolerances::default()).unwrap_err();
        assert!(err.is_off_model(), "{err}");
    }
}
