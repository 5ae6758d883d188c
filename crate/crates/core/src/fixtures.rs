//! Worked examples used by the self-test, the CLI and the test suites.

use crate::newick::parse_newick;
use crate::params::{theta_to_omega, OmegaParams, ThetaParams};
use crate::scalar::{rational_from_decimal, Rational, Scalar};
use crate::tree::TreeTopology;

pub const QUARTET_NEWICK: &str = "(1,2,(3,4)a)r;";
pub const TRIPOD_NEWICK: &str = "(1,2,3)h;";
pub const SEVEN_LEAF_NEWICK: &str = "((1,2)a,3,((4,5)d,(6,7)e)c)b;";

/// One row of the quartet table: pattern, subset, `p_α`, `λ_I`, `κ_I`, each
/// rounded to four decimals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableRow {
    pub pattern: &'static str,
    pub subset: &'static str,
    pub p: &'static str,
    pub lambda: &'static str,
    pub kappa: &'static str,
}

const fn row(
    pattern: &'static str,
    subset: &'static str,
    p: &'static str,
    lambda: &'static str,
    kappa: &'static str,
) -> TableRow {
    TableRow {
        pattern,
        subset,
        p,
        lambda,
        kappa,
    }
}

pub const QUARTET_TABLE: [TableRow; 16] = [
    row("0000", "", "0.0444", "1.0000", "0"),
    row("0001", "4", "0.0307", "0.5800", "0"),
    row("0010", "3", "0.0307", "0.5800", "0"),
    row("0011", "34", "0.0403", "0.3700", "0.0336"),
    row("0100", "2", "0.0346", "0.6200", "0"),
    row("0101", "24", "0.0323", "0.3724", "0.0128"),
    row("0110", "23", "0.0323", "0.3724", "0.0128"),
    row("0111", "234", "0.0547", "0.2422", "-0.0020"),
    row("1000", "1", "0.0482", "0.7000", "0"),
    row("1001", "14", "0.0491", "0.4220", "0.0160"),
    row("1010", "13", "0.0491", "0.4220", "0.0160"),
    row("1011", "134", "0.0875", "0.2750", "-0.0026"),
    row("1100", "12", "0.0828", "0.4660", "0.0320"),
    row("1101", "124", "0.0979", "0.2853", "-0.0038"),
    row("1110", "123", "0.0979", "0.2853", "-0.0038"),
    row("1111", "1234", "0.1875", "0.1875", "0.0006"),
];

impl TableRow {
    /// Subset mask of the row, leaf `k` at bit `k−1`.
    pub fn mask(&self) -> u32 {
        self.subset
            .bytes()
            .map(|b| 1u32 << (b - b'1'))
            .fold(0, |a, b| a | b)
    }

    pub fn values(&self) -> [f64; 3] {
        [self.p, self.lambda, self.kappa].map(|s| s.parse().expect("fixture decimal"))
    }

    pub fn exact(&self) -> [Rational; 3] {
        [self.p, self.lambda, self.kappa].map(|s| rational_from_decimal(s).expect("fixture decimal"))
    }
}

pub fn quartet_tree() -> TreeTopology {
    parse_newick(QUARTET_NEWICK).expect("fixture tree")
}

pub fn tripod_tree() -> TreeTopology {
    parse_newick(TRIPOD_NEWICK).expect("fixture tree")
}

pub fn seven_leaf_tree() -> TreeTopology {
    parse_newick(SEVEN_LEAF_NEWICK).expect("fixture tree")
}

/// Builds `θ` from named `(θ_{1|0}, θ_{1|1})` pairs; unnamed edges get `default`.
pub fn theta_from_names<T: Scalar>(
    tree: &TreeTopology,
    root_p1: T,
    default: (T, T),
    named: &[(&str, (T, T))],
) -> ThetaParams<T> {
    let mut cond = vec![default; tree.node_count()];
    for (name, pair) in named {
        let v = tree.node_by_name(name).expect("fixture node name");
        cond[v.0] = pair.clone();
    }
    ThetaParams::new(tree.clone(), root_p1, cond).expect("fixture lengths")
}

fn quartet_theta_generic<T: Scalar>() -> ThetaParams<T> {
    let r = |a: i64, b: i64| T::from_ratio(a, b);
    theta_from_names(
        &quartet_tree(),
        r(4, 5),
        (r(3, 10), r(7, 10)),
        &[("1", (r(3, 10), r(4, 5))), ("a", (r(3, 10), r(4, 5)))],
    )
}

/// The quartet parameters `θ*` with `θ_{1|0}` and `θ_{1|1}` as the chance
/// of a 1 given parent state 0 and 1.
pub fn quartet_theta() -> ThetaParams<f64> {
    quartet_theta_generic()
}

pub fn quartet_theta_exact() -> ThetaParams<Rational> {
    quartet_theta_generic()
}

pub fn quartet_omega() -> OmegaParams<f64> {
    theta_to_omega(&quartet_theta())
}

/// `(η_{r,1}, η_{r,2}, η_{r,a}, η_{a,3}, η_{a,4}, μ̄_r, μ̄_a)` for the four
/// points of the quartet fiber. The first three are the printed ones; the
/// fourth is `δ_a δ_r` applied to the first.
pub const QUARTET_FIBER: [[f64; 7]; 4] = [
    [0.5, 0.4, 0.5, 0.4, 0.4, -0.6, -0.4],
    [-0.5, -0.4, -0.5, 0.4, 0.4, 0.6, -0.4],
    [0.5, 0.4, -0.5, -0.4, -0.4, -0.6, 0.4],
    [-0.5, -0.4, 0.5, -0.4, -0.4, 0.6, 0.4],
];

/// The tuple as printed for the fourth point, which is not in the fiber.
pub const QUARTET_FIBER_PRINTED_FOURTH: [f64; 7] = [-0.5, -0.4, 0.5, -0.4, -0.4, -0.6, -0.4];

/// Node names in the order used by [`QUARTET_FIBER`].
pub const QUARTET_FIBER_ORDER: [&str; 7] = ["1", "2", "a", "3", "4", "r", "a"];

/// Reads a quartet ω point as a tuple in [`QUARTET_FIBER`] order.
pub fn quartet_tuple(omega: &OmegaParams<f64>) -> [f64; 7] {
    let t = omega.tree();
    let mut out = [0.0; 7];
    for (k, name) in QUARTET_FIBER_ORDER.iter().enumerate() {
        let v = t.node_by_name(name).expect("quartet node");
        out[k] = if k < 5 { *omega.eta(v) } else { *omega.mu_bar(v) };
    }
    out
}

/// Tripod with every edge informative.
pub fn tripod_theta() -> ThetaParams<f64> {
    theta_from_names(&tripod_tree(), 0.35, (0.2, 0.75), &[("2", (0.7, 0.1))])
}

/// Tripod whose leaves are mutually independent.
pub fn tripod_independent_theta() -> ThetaParams<f64> {
    theta_from_names(
        &tripod_tree(),
        0.35,
        (0.4, 0.4),
        &[("2", (0.25, 0.25)), ("3", (0.6, 0.6))],
    )
}

/// Seven-leaf tree with independence on `(b,c)`, `(c,d)`, `(c,e)`, `(e,6)`
/// and `(e,7)`, so only the pairs 12, 13, 23 and 45 are correlated.
pub fn seven_leaf_theta() -> ThetaParams<f64> {
    theta_from_names(
        &seven_leaf_tree(),
        0.45,
        (0.2, 0.75),
        &[
            ("c", (0.4, 0.4)),
            ("d", (0.55, 0.55)),
            ("e", (0.3, 0.3)),
            ("6", (0.65, 0.65)),
            ("7", (0.35, 0.35)),
            ("2", (0.7, 0.25)),
        ],
    )
}

/// Quartet with the inner edge `(r,a)` independent.
pub fn quartet_manifold_theta() -> ThetaParams<f64> {
    theta_from_names(
        &quartet_tree(),
        0.8,
        (0.3, 0.7),
        &[("1", (0.3, 0.8)), ("a", (0.45, 0.45)), ("4", (0.2, 0.85))],
    )
}
