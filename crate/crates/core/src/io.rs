//! JSON files for parameters, data and reports, and the CSV table layout.
//!
//! Nodes are keyed by their display names, so files written for one
//! Newick string can be read back against the same string. Numbers are
//! written in the shortest form that reads back to the same `f64`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::fiber::{Classification, FiberReport, SingularConstraint};
use crate::moments::{
    CentralMoments, CorrelationCoords, MomentError, NoncentralMoments, ProbabilityTable, TreeCumulants,
};
use crate::newick::{parse_newick, NewickError};
use crate::params::{
    omega_to_theta, OmegaParams, ParamError, RhoParams, ThetaParams,
};
use crate::subset;
use crate::tree::{Edge, NodeId, TreeTopology};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{what} has no entry for node {node}")]
    MissingEntry { what: &'static str, node: String },
    #[error("{what} names unknown node {node:?}")]
    UnknownNode { what: &'static str, node: String },
    #[error("no tree given: pass one on the command line or in the file")]
    NoTree,
    #[error("tree in the file ({file}) differs from the one given ({given})")]
    TreeMismatch { file: String, given: String },
    #[error(transparent)]
    Newick(#[from] NewickError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Moment(#[from] MomentError),
}

/// Parameter file in one of the three charts. Keys are node names; edge
/// entries are keyed by the child node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "chart", rename_all = "lowercase", deny_unknown_fields)]
pub enum ParamFile {
    Theta {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tree: Option<String>,
        root: f64,
        /// `[θ_{1|0}, θ_{1|1}]`.
        edges: BTreeMap<String, [f64; 2]>,
    },
    Omega {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tree: Option<String>,
        mu_bar: BTreeMap<String, f64>,
        eta: BTreeMap<String, f64>,
    },
    Rho {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tree: Option<String>,
        rho_bar: BTreeMap<String, f64>,
        rho: BTreeMap<String, f64>,
    },
}

/// Parameters after resolving a file against a tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Parameters {
    Theta(ThetaParams),
    Omega(OmegaParams),
    Rho(RhoParams),
}

impl Parameters {
    /// Converts to `θ`, checking constraints in the ω chart.
    pub fn to_theta(&self, tol: f64) -> Result<ThetaParams, ParamError> {
        match self {
            Parameters::Theta(t) => Ok(t.clone()),
            Parameters::Omega(o) => omega_to_theta(o, tol),
            Parameters::Rho(r) => omega_to_theta(&crate::params::rho_to_omega(r), tol),
        }
    }
}

fn node_map(tree: &TreeTopology, values: impl Fn(NodeId) -> Option<f64>) -> BTreeMap<String, f64> {
    tree.nodes()
        .filter_map(|v| values(v).map(|x| (tree.name(v), x)))
        .collect()
}

fn non_root(tree: &TreeTopology, v: NodeId) -> bool {
    tree.parent(v).is_some()
}

impl ParamFile {
    pub fn from_theta(theta: &ThetaParams) -> Self {
        let t = theta.tree();
        ParamFile::Theta {
            tree: Some(t.to_newick()),
            root: *theta.root_p1(),
            edges: t
                .nodes()
                .filter(|&v| non_root(t, v))
                .map(|v| {
                    let (a, b) = *theta.cond(v);
                    (t.name(v), [a, b])
                })
                .collect(),
        }
    }

    pub fn from_omega(omega: &OmegaParams) -> Self {
        let t = omega.tree();
        ParamFile::Omega {
            tree: Some(t.to_newick()),
            mu_bar: node_map(t, |v| Some(*omega.mu_bar(v))),
            eta: node_map(t, |v| non_root(t, v).then(|| *omega.eta(v))),
        }
    }

    pub fn from_rho(rho: &RhoParams) -> Self {
        let t = rho.tree();
        ParamFile::Rho {
            tree: Some(t.to_newick()),
            rho_bar: node_map(t, |v| Some(rho.rho_bar(v))),
            rho: node_map(t, |v| non_root(t, v).then(|| rho.rho(v))),
        }
    }

    pub fn chart(&self) -> &'static str {
        match self {
            ParamFile::Theta { .. } => "theta",
            ParamFile::Omega { .. } => "omega",
            ParamFile::Rho { .. } => "rho",
        }
    }

    pub fn tree_text(&self) -> Option<&str> {
        match self {
            ParamFile::Theta { tree, .. } | ParamFile::Omega { tree, .. } | ParamFile::Rho { tree, .. } => {
                tree.as_deref()
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self, IoError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("parameter files serialize")
    }

    /// Reads the values against `tree`, or against the file's own tree when
    /// `tree` is `None`. Every node (or every non-root node for edge
    /// values) needs an entry.
    pub fn resolve(&self, tree: Option<&TreeTopology>) -> Result<Parameters, IoError> {
        let tree = resolve_tree(self.tree_text(), tree)?;
        match self {
            ParamFile::Theta { root, edges, .. } => {
                let v = read_nodes(&tree, "edges", edges, false)?;
                let cond = v
                    .into_iter()
                    .map(|x| x.map_or((0.0, 0.0), |[a, b]| (a, b)))
                    .collect();
                Ok(Parameters::Theta(ThetaParams::new(tree, *root, cond)?))
            }
            ParamFile::Omega { mu_bar, eta, .. } => {
                let mb = read_nodes(&tree, "mu_bar", mu_bar, true)?;
                let e = read_nodes(&tree, "eta", eta, false)?;
                Ok(Parameters::Omega(OmegaParams::new(
                    tree,
                    mb.into_iter().map(|x| x.unwrap_or(0.0)).collect(),
                    e.into_iter().map(|x| x.unwrap_or(0.0)).collect(),
                )?))
            }
            ParamFile::Rho { rho_bar, rho, .. } => {
                let rb = read_nodes(&tree, "rho_bar", rho_bar, true)?;
                let r = read_nodes(&tree, "rho", rho, false)?;
                Ok(Parameters::Rho(RhoParams::new(
                    tree,
                    rb.into_iter().map(|x| x.unwrap_or(0.0)).collect(),
                    r.into_iter().map(|x| x.unwrap_or(0.0)).collect(),
                )?))
            }
        }
    }
}

/// The tree named in a file, checked against the one given separately.
pub fn resolve_tree(file: Option<&str>, given: Option<&TreeTopology>) -> Result<TreeTopology, IoError> {
    match (file, given) {
        (None, None) => Err(IoError::NoTree),
        (None, Some(t)) => Ok(t.clone()),
        (Some(text), None) => Ok(parse_newick(text)?),
        (Some(text), Some(t)) => {
            let parsed = parse_newick(text)?;
            if parsed.to_newick() != t.to_newick() {
                return Err(IoError::TreeMismatch {
                    file: parsed.to_newick(),
                    given: t.to_newick(),
                });
            }
            Ok(t.clone())
        }
    }
}

fn read_nodes<V: Clone>(
    tree: &TreeTopology,
    what: &'static str,
    map: &BTreeMap<String, V>,
    include_root: bool,
) -> Result<Vec<Option<V>>, IoError> {
    let mut out = vec![None; tree.node_count()];
    for (name, value) in map {
        let v = tree.node_by_name(name).ok_or_else(|| IoError::UnknownNode {
            what,
            node: name.clone(),
        })?;
        if !include_root && !non_root(tree, v) {
            return Err(IoError::UnknownNode {
                what,
                node: format!("{name} (the root has no parent edge)"),
            });
        }
        out[v.0] = Some(value.clone());
    }
    for v in tree.nodes() {
        if out[v.0].is_none() && (include_root || non_root(tree, v)) {
            return Err(IoError::MissingEntry {
                what,
                node: tree.name(v),
            });
        }
    }
    Ok(out)
}

/// Observed data: a probability table, central moments or tree cumulants.
/// Subset-indexed arrays have `2^n` entries, leaf `k` at bit `k−1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DataFile {
    Probabilities {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tree: Option<String>,
        n: usize,
        values: Vec<f64>,
    },
    Moments {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tree: Option<String>,
        means: Vec<f64>,
        values: Vec<f64>,
    },
    Cumulants {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tree: Option<String>,
        means: Vec<f64>,
        values: Vec<f64>,
    },
}

impl DataFile {
    /// Also accepts the output of [`forward_json`], taking its probability table.
    pub fn from_json(text: &str) -> Result<Self, IoError> {
        let value: Value = serde_json::from_str(text)?;
        if value.get("kind").is_none() {
            if let Some(forward) = value.as_object().filter(|o| o.contains_key("p") && o.contains_key("n")) {
                return Ok(DataFile::Probabilities {
                    tree: forward.get("tree").and_then(Value::as_str).map(str::to_string),
                    n: serde_json::from_value(forward["n"].clone())?,
                    values: serde_json::from_value(forward["p"].clone())?,
                });
            }
        }
        Ok(serde_json::from_value(value)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("data files serialize")
    }

    pub fn tree_text(&self) -> Option<&str> {
        match self {
            DataFile::Probabilities { tree, .. } | DataFile::Moments { tree, .. } | DataFile::Cumulants { tree, .. } => {
                tree.as_deref()
            }
        }
    }

    /// Central moments of the data; cumulants are mapped back through `tree`.
    pub fn central_moments(&self, tree: &TreeTopology) -> Result<CentralMoments, IoError> {
        let n = match self {
            DataFile::Probabilities { n, .. } => *n,
            DataFile::Moments { means, .. } | DataFile::Cumulants { means, .. } => means.len(),
        };
        if n != tree.leaf_count() {
            return Err(IoError::Moment(MomentError::LeafCountMismatch {
                tree: tree.leaf_count(),
                coords: n,
            }));
        }
        Ok(match self {
            DataFile::Probabilities { n, values, .. } => {
                let p = ProbabilityTable::new(*n, values.clone())?;
                crate::moments::lambda_to_mu(&crate::moments::p_to_lambda(&p))
            }
            DataFile::Moments { means, values, .. } => CentralMoments::new(n, means.clone(), values.clone())?,
            DataFile::Cumulants { means, values, .. } => {
                let k = TreeCumulants::new(tree.clone(), means.clone(), values.clone())?;
                crate::moments::kappa_to_mu(&k)?
            }
        })
    }

    pub fn probabilities(tree: &TreeTopology, p: &ProbabilityTable) -> Self {
        DataFile::Probabilities {
            tree: Some(tree.to_newick()),
            n: p.n(),
            values: p.values().to_vec(),
        }
    }
}

/// Subset names in mask order, `""` for the empty set.
pub fn subset_names(n: usize) -> Vec<String> {
    (0..1u32 << n)
        .map(|m| subset::labels(m).map(|l| l.to_string()).collect::<Vec<_>>().join(","))
        .collect()
}

/// Everything the forward pipeline produces, as one JSON object.
pub fn forward_json(
    tree: &TreeTopology,
    p: &ProbabilityTable,
    lambda: &NoncentralMoments,
    mu: &CentralMoments,
    kappa: &TreeCumulants,
    rho: Option<&CorrelationCoords>,
) -> Value {
    json!({
        "tree": tree.to_newick(),
        "n": p.n(),
        "subsets": subset_names(p.n()),
        "p": p.values(),
        "lambda": lambda.values(),
        "mu": { "means": mu.means(), "values": mu.values() },
        "kappa": { "means": kappa.means(), "values": kappa.values() },
        "rho": rho.map(|r| json!({ "rho_bar": r.rho_bar(), "values": r.values() })),
    })
}

/// Binary pattern of `mask` with leaf 1 first.
pub fn pattern(n: usize, mask: u32) -> String {
    (0..n).map(|k| if mask & (1 << k) != 0 { '1' } else { '0' }).collect()
}

/// Rows ordered by pattern with leaf 1 as the most significant digit.
pub fn pattern_order(n: usize) -> Vec<u32> {
    (0..1u32 << n)
        .map(|r| (0..n).fold(0u32, |m, k| m | (((r >> (n - 1 - k)) & 1) << k)))
        .collect()
}

/// CSV with columns `alpha,I,p,lambda,kappa`, values to `precision` decimals.
pub fn table_csv(p: &ProbabilityTable, lambda: &NoncentralMoments, kappa: &TreeCumulants, precision: usize) -> String {
    let n = p.n();
    let mut out = String::from("alpha,I,p,lambda,kappa\n");
    for mask in pattern_order(n) {
        let subset: String = subset::labels(mask).map(|l| l.to_string()).collect();
        let k = if subset::size(mask) < 2 { 0.0 } else { *kappa.get(mask) };
        out.push_str(&format!(
            "{},{},{:.prec$},{:.prec$},{:.prec$}\n",
            pattern(n, mask),
            subset,
            fix_zero(*p.get(mask), precision),
            fix_zero(*lambda.get(mask), precision),
            fix_zero(k, precision),
            prec = precision
        ));
    }
    out
}

/// Avoids printing `-0.0000` for tiny negative values.
fn fix_zero(x: f64, precision: usize) -> f64 {
    let scale = 10f64.powi(precision as i32);
    if (x * scale).round() == 0.0 {
        0.0
    } else {
        x
    }
}

/// `(parent,child)` display form of an edge.
pub fn edge_name(tree: &TreeTopology, e: Edge) -> String {
    let (p, c) = tree.orient(e);
    format!("({},{})", tree.name(p), tree.name(c))
}

fn edge_list(tree: &TreeTopology, edges: &[Edge]) -> Value {
    Value::from(edges.iter().map(|&e| edge_name(tree, e)).collect::<Vec<_>>())
}

fn node_list(tree: &TreeTopology, nodes: &[NodeId]) -> Value {
    Value::from(nodes.iter().map(|&v| tree.name(v)).collect::<Vec<_>>())
}

/// Report as JSON; finite fibers carry every point in the ω and θ charts.
pub fn fiber_json(report: &FiberReport, tol: f64) -> Value {
    let t = &report.tree;
    let classification = match &report.classification {
        Classification::FiniteSmooth { count } => json!({ "type": "finite", "count": count }),
        Classification::ManifoldWithCorners { dimension } => {
            json!({ "type": "manifold", "dimension": dimension })
        }
        Classification::Singular(deep) => {
            let constraints: Vec<String> = deep
                .constraints
                .iter()
                .map(|c| match c {
                    SingularConstraint::EtaZero(e) => format!("eta{} = 0", edge_name(t, *e)),
                    SingularConstraint::MuBarSquaredOne(v) => format!("mu_bar({})^2 = 1", t.name(*v)),
                })
                .collect();
            let pairs: Vec<Value> = deep
                .minimal_pairs
                .iter()
                .map(|p| json!({ "nodes": node_list(t, &p.nodes), "edges": edge_list(t, &p.edges) }))
                .collect();
            json!({ "type": "singular", "constraints": constraints, "minimal_pairs": pairs })
        }
    };
    let recovered = report.recovered.as_ref().map(|sq| {
        let mb = node_map(t, |v| sq.mu_bar_sq[v.0]);
        let eta: BTreeMap<String, f64> = t
            .nodes()
            .filter_map(|v| {
                let p = t.parent(v)?;
                sq.eta_sq[v.0].map(|x| (edge_name(t, Edge::new(p, v)), x))
            })
            .collect();
        let paths: Vec<Value> = sq
            .path_invariants
            .iter()
            .map(|inv| {
                json!({
                    "from": t.name(inv.from),
                    "to": t.name(inv.to),
                    "edges": edge_list(t, &inv.edges),
                    "eta_sq": inv.eta_sq,
                    "cov_sq": inv.cov_sq,
                })
            })
            .collect();
        json!({ "mu_bar_sq": mb, "eta_sq": eta, "paths": paths })
    });
    let points: Vec<Value> = report
        .points
        .iter()
        .map(|om| {
            let theta = omega_to_theta(om, tol).ok().map(|th| {
                serde_json::to_value(ParamFile::from_theta(&th)).expect("parameter files serialize")
            });
            json!({
                "omega": serde_json::to_value(ParamFile::from_omega(om)).expect("parameter files serialize"),
                "theta": theta,
            })
        })
        .collect();
    json!({
        "tree": t.to_newick(),
        "classification": classification,
        "isolated": edge_list(t, &report.isolated),
        "classes_isolated": report.classes.isolated.iter().map(|c| edge_list(t, c)).collect::<Vec<_>>(),
        "classes_active": report.classes.active.iter().map(|c| edge_list(t, c)).collect::<Vec<_>>(),
        "degenerate_nodes": node_list(t, &report.degenerate_nodes),
        "recovered": recovered,
        "points": points,
        "warnings": report.warnings,
    })
}
