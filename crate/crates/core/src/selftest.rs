//! Built-in checks run by `treecum selftest`: the quartet fixtures and
//! seeded property runs over random trees and parameters.

use thiserror::Error;

use crate::fiber::{analyze_fiber, covariance_summary, recover_tripod, Classification};
use crate::fixtures::{self, QUARTET_FIBER, QUARTET_FIBER_PRINTED_FOURTH, QUARTET_TABLE};
use crate::moments::{
    classical_cumulant, kappa_to_mu, lambda_to_mu, lambda_to_p, mu_to_kappa, mu_to_lambda, p_to_lambda,
    CentralMoments,
};
use crate::params::{
    model_forward, omega_to_rho, omega_to_theta, psi, psi_contracted, rho_to_omega, theta_to_omega, OmegaParams,
};
use crate::poset::{classical_mobius_top, enumerate_set_partitions, EdgePartitionPoset};
use crate::random::{self, rng_from_seed};
use crate::scalar::round_decimal;
use crate::tolerance::Tolerances;
use crate::tree::TreeTopology;

pub const SUITES: [&str; 6] = ["table1", "roundtrip", "equivalence", "splitzero", "mobius", "fiber"];

/// Largest poset checked exhaustively by the `mobius` suite.
pub const MOBIUS_MAX_ELEMENTS: usize = 200;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SelftestError {
    #[error("unknown suite {0:?}; expected one of table1, roundtrip, equivalence, splitzero, mobius, fiber")]
    UnknownSuite(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelftestConfig {
    pub seed: u64,
    /// Random cases per randomized check.
    pub cases: usize,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        SelftestConfig { seed: 1, cases: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: usize,
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn new(name: &'static str) -> Self {
        SuiteReport {
            name,
            passed: 0,
            failures: Vec::new(),
        }
    }

    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if ok {
            self.passed += 1;
        } else {
            self.failures.push(what());
        }
    }

    fn close(&mut self, got: f64, want: f64, tol: f64, what: impl FnOnce() -> String) {
        self.check((got - want).abs() <= tol, || format!("{}: got {got}, want {want}", what()));
    }

    fn fail(&mut self, what: String) {
        self.failures.push(what);
    }
}

pub fn run_suite(name: &str, config: SelftestConfig) -> Result<SuiteReport, SelftestError> {
    Ok(match name {
        "table1" => table1(),
        "roundtrip" => roundtrip(config),
        "equivalence" => equivalence(config),
        "splitzero" => splitzero(config),
        "mobius" => mobius(config),
        "fiber" => fiber(config),
        other => return Err(SelftestError::UnknownSuite(other.to_string())),
    })
}

pub fn run_all(config: SelftestConfig) -> Vec<SuiteReport> {
    SUITES
        .iter()
        .map(|s| run_suite(s, config).expect("listed suites exist"))
        .collect()
}

fn moments_of(theta: &crate::params::ThetaParams) -> CentralMoments {
    lambda_to_mu(&p_to_lambda(&model_forward(theta).expect("fixture sizes")))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn quartet_point(tuple: &[f64; 7]) -> OmegaParams {
    let base = fixtures::quartet_omega();
    let t = base.tree();
    let mut mu_bar = base.mu_bars().to_vec();
    let mut eta = base.etas().to_vec();
    for (k, name) in fixtures::QUARTET_FIBER_ORDER.iter().enumerate() {
        let v = t.node_by_name(name).expect("quartet node");
        if k < 5 {
            eta[v.0] = tuple[k];
        } else {
            mu_bar[v.0] = tuple[k];
        }
    }
    base.with_values(mu_bar, eta).expect("same tree")
}

fn table1() -> SuiteReport {
    let mut r = SuiteReport::new("table1");
    let th = fixtures::quartet_theta();
    let p = model_forward(&th).expect("quartet");
    let lambda = p_to_lambda(&p);
    let kappa = mu_to_kappa(th.tree(), &lambda_to_mu(&lambda)).expect("quartet");
    for row in &QUARTET_TABLE {
        let m = row.mask();
        let [wp, wl, wk] = row.values();
        let k = if m.count_ones() < 2 { 0.0 } else { *kappa.get(m) };
        r.close(*p.get(m), wp, 5e-5, || format!("p_{}", row.pattern));
        r.close(*lambda.get(m), wl, 5e-5, || format!("lambda_{}", row.pattern));
        r.close(k, wk, 5e-5, || format!("kappa_{}", row.pattern));
    }

    let exact = fixtures::quartet_theta_exact();
    let pe = model_forward(&exact).expect("quartet");
    let le = p_to_lambda(&pe);
    let ke = mu_to_kappa(exact.tree(), &lambda_to_mu(&le)).expect("quartet");
    for row in &QUARTET_TABLE {
        let m = row.mask();
        r.check(round_decimal(pe.get(m), 4) == row.p, || format!("exact p_{}", row.pattern));
        r.check(round_decimal(le.get(m), 4) == row.lambda, || format!("exact lambda_{}", row.pattern));
        if m.count_ones() >= 2 {
            r.check(round_decimal(ke.get(m), 4) == row.kappa, || format!("exact kappa_{}", row.pattern));
        }
    }

    let om = theta_to_omega(&th);
    let t = th.tree();
    for (name, eta) in [("1", 0.5), ("2", 0.4), ("a", 0.5), ("3", 0.4), ("4", 0.4)] {
        let v = t.node_by_name(name).expect("quartet node");
        r.close(*om.eta(v), eta, 1e-12, || format!("eta at {name}"));
    }
    for (name, mb) in [("r", -0.6), ("a", -0.4), ("1", -0.4), ("2", -0.24), ("3", -0.16), ("4", -0.16)] {
        let v = t.node_by_name(name).expect("quartet node");
        r.close(*om.mu_bar(v), mb, 1e-12, || format!("mu_bar at {name}"));
    }

    let m = moments_of(&th);
    let c = covariance_summary(&m, 1e-9);
    match (recover_tripod(&c, 1, 2, 3), recover_tripod(&c, 1, 2, 4)) {
        (Ok(a), Ok(b)) => {
            r.close(a.mu_bar_sq, 0.36, 1e-10, || "mu_bar_r^2 from 1,2,3".into());
            r.close(b.mu_bar_sq, 0.36, 1e-10, || "mu_bar_r^2 from 1,2,4".into());
            r.close(a.eta_sq[0], 0.25, 1e-10, || "eta_(r,1)^2".into());
        }
        (a, b) => r.fail(format!("tripod recovery failed: {a:?} {b:?}")),
    }
    match analyze_fiber(t, &m, &Tolerances::default()) {
        Ok(report) => {
            let sq = report.recovered.as_ref().expect("finite fiber has squares");
            let a = t.node_by_name("a").expect("quartet node");
            r.close(sq.eta_sq[a.0].unwrap_or(f64::NAN), 0.25, 1e-10, || "eta_(r,a)^2".into());
            r.check(report.points.len() == 4, || format!("{} fiber points", report.points.len()));
            let target = psi(&om).expect("trivalent");
            for point in &report.points {
                let k = psi(point).expect("trivalent");
                r.check(max_diff(k.values(), target.values()) <= 1e-10, || "fiber point changes kappa".into());
                let tuple = fixtures::quartet_tuple(point);
                r.check(
                    QUARTET_FIBER.iter().any(|f| max_diff(f, &tuple) <= 1e-10),
                    || format!("unexpected fiber point {tuple:?}"),
                );
            }
        }
        Err(e) => r.fail(format!("quartet fiber: {e}")),
    }
    let printed = psi(&quartet_point(&QUARTET_FIBER_PRINTED_FOURTH)).expect("trivalent");
    let target = psi(&om).expect("trivalent");
    r.check(
        (printed.get(0b0111) - target.get(0b0111)).abs() > 1e-4,
        || "printed fourth tuple unexpectedly reproduces kappa_123".into(),
    );
    r
}

fn roundtrip(config: SelftestConfig) -> SuiteReport {
    let mut r = SuiteReport::new("roundtrip");
    let mut rng = rng_from_seed(config.seed);
    let tol = 1e-12;
    for case in 0..config.cases {
        let tree = random::random_tree_between(&mut rng, 2, 6, false);
        let n = tree.leaf_count();
        let p = random::random_probability_table(&mut rng, n);
        let lambda = p_to_lambda(&p);
        r.check(max_diff(lambda_to_p(&lambda).values(), p.values()) <= tol, || {
            format!("case {case}: p -> lambda -> p")
        });
        let mu = lambda_to_mu(&lambda);
        r.check(max_diff(mu_to_lambda(&mu).values(), lambda.values()) <= tol, || {
            format!("case {case}: lambda -> mu -> lambda")
        });
        match mu_to_kappa(&tree, &mu).and_then(|k| kappa_to_mu(&k)) {
            Ok(back) => r.check(max_diff(back.values(), mu.values()) <= tol, || {
                format!("case {case}: mu -> kappa -> mu on {}", tree.to_newick())
            }),
            Err(e) => r.fail(format!("case {case}: {e}")),
        }
        let theta = random::random_theta(&mut rng, &tree);
        let omega = theta_to_omega(&theta);
        match omega_to_theta(&omega, tol) {
            Ok(back) => {
                let d = theta
                    .conds()
                    .iter()
                    .zip(back.conds())
                    .map(|(a, b)| (a.0 - b.0).abs().max((a.1 - b.1).abs()))
                    .fold((theta.root_p1() - back.root_p1()).abs(), f64::max);
                r.check(d <= tol, || format!("case {case}: theta -> omega -> theta off by {d:e}"));
            }
            Err(e) => r.fail(format!("case {case}: {e}")),
        }
        match omega_to_rho(&omega) {
            Ok(rho) => {
                let back = rho_to_omega(&rho);
                let d = max_diff(back.mu_bars(), omega.mu_bars()).max(max_diff(back.etas(), omega.etas()));
                r.check(d <= tol, || format!("case {case}: omega -> rho -> omega off by {d:e}"));
            }
            Err(e) => r.fail(format!("case {case}: {e}")),
        }
    }
    r
}

fn equivalence(config: SelftestConfig) -> SuiteReport {
    let mut r = SuiteReport::new("equivalence");
    let mut rng = rng_from_seed(config.seed.wrapping_add(1));
    for case in 0..config.cases {
        let tree = random::random_tree_between(&mut rng, 3, 7, case % 2 == 0);
        let theta = random::random_theta(&mut rng, &tree);
        let result = psi_contracted(&theta_to_omega(&theta)).and_then(|k| {
            let mu = moments_of(&theta);
            let direct = mu_to_kappa(k.tree(), &mu)?;
            Ok(max_diff(k.values(), direct.values()))
        });
        match result {
            Ok(d) => r.check(d <= 1e-10, || format!("case {case}: {} off by {d:e}", tree.to_newick())),
            Err(e) => r.fail(format!("case {case}: {e}")),
        }
    }
    r
}

fn splitzero(config: SelftestConfig) -> SuiteReport {
    let mut r = SuiteReport::new("splitzero");
    let mut rng = rng_from_seed(config.seed.wrapping_add(2));
    for case in 0..config.cases {
        let tree = random::random_tree_between(&mut rng, 2, 7, false);
        let (e, p) = random::random_split_product(&mut rng, &tree);
        let all = (1u32 << tree.leaf_count()) - 1;
        match mu_to_kappa(&tree, &lambda_to_mu(&p_to_lambda(&p))) {
            Ok(k) => r.check(k.get(all).abs() <= 1e-12, || {
                format!("case {case}: kappa_[n] = {:e} across {e:?} in {}", k.get(all), tree.to_newick())
            }),
            Err(err) => r.fail(format!("case {case}: {err}")),
        }
    }
    r
}

/// Defining identity and the meet sums of the Möbius function on one poset.
pub fn check_poset_identities(poset: &EdgePartitionPoset) -> Result<(), String> {
    let len = poset.len();
    let top = poset.top();
    let leq = |a: usize, b: usize| poset.leq(a, b).map_err(|e| e.to_string());
    let mob = |a: usize, b: usize| poset.mobius(a, b).map_err(|e| e.to_string());
    for p in 0..len {
        for q in 0..len {
            if !leq(p, q)? {
                continue;
            }
            let mut sum = 0i64;
            for x in 0..len {
                if leq(p, x)? && leq(x, q)? {
                    sum += mob(p, x)?;
                }
            }
            if sum != i64::from(p == q) {
                return Err(format!("sum of m(p,x) over [p,q] is {sum} for p={p}, q={q}"));
            }
        }
    }
    let to_top = poset.mobius_to_top();
    for p in 0..len {
        if to_top[p] != mob(p, top)? {
            return Err(format!("m({p},top) disagrees with the general row"));
        }
    }
    for a in (0..len).filter(|&a| a != top) {
        let mut sums = vec![0i64; len];
        for x in 0..len {
            let m = poset.meet(x, a).map_err(|e| e.to_string())?;
            sums[m] += to_top[x];
        }
        if let Some(b) = sums.iter().position(|&s| s != 0) {
            return Err(format!("meet sum with a={a} is {} at b={b}", sums[b]));
        }
    }
    Ok(())
}

/// Leaf subsets of `tree` whose posets have at most `max` elements.
fn posets_of(tree: &TreeTopology, max: usize) -> Vec<EdgePartitionPoset> {
    let all = (1u32 << tree.leaf_count()) - 1;
    (1..=all)
        .filter(|m| m.count_ones() >= 2)
        .filter_map(|m| EdgePartitionPoset::new(tree, m).ok())
        .filter(|p| p.len() <= max)
        .collect()
}

fn mobius(config: SelftestConfig) -> SuiteReport {
    let mut r = SuiteReport::new("mobius");
    let mut rng = rng_from_seed(config.seed.wrapping_add(3));
    let mut trees = vec![fixtures::quartet_tree(), fixtures::tripod_tree(), fixtures::seven_leaf_tree()];
    for _ in 0..(config.cases / 20).max(2) {
        trees.push(random::random_tree_between(&mut rng, 3, 6, false));
    }
    for tree in &trees {
        let posets = posets_of(tree, MOBIUS_MAX_ELEMENTS);
        for poset in posets {
            let res = check_poset_identities(&poset);
            r.check(res.is_ok(), || {
                format!("{} leaves {:b}: {}", tree.to_newick(), poset.leaf_set(), res.unwrap_err())
            });
        }
    }
    for size in 1..=6u32 {
        let mask = (1u32 << size) - 1;
        match enumerate_set_partitions(mask) {
            Ok(parts) => {
                for part in parts {
                    let k = part.block_count() as i64;
                    let want = (if k % 2 == 1 { 1 } else { -1 }) * (1..k).product::<i64>();
                    let got = classical_mobius_top(&part);
                    r.check(got == want, || format!("classical m({},1) = {got}, want {want}", part.render()));
                }
            }
            Err(e) => r.fail(e.to_string()),
        }
    }
    for case in 0..config.cases {
        let p = random::random_probability_table(&mut rng, 4);
        let mu = lambda_to_mu(&p_to_lambda(&p));
        let g = |m: u32| *mu.get(m);
        let want = g(0b1111) - g(0b0011) * g(0b1100) - g(0b0101) * g(0b1010) - g(0b1001) * g(0b0110);
        match classical_cumulant(&mu, 0b1111) {
            Ok(k) => r.close(k, want, 1e-12, || format!("case {case}: classical 4-cumulant")),
            Err(e) => r.fail(e.to_string()),
        }
    }
    r
}

fn fiber(config: SelftestConfig) -> SuiteReport {
    let mut r = SuiteReport::new("fiber");
    let tol = Tolerances::default();
    match analyze_fiber(&fixtures::tripod_tree(), &moments_of(&fixtures::tripod_theta()), &tol) {
        Ok(rep) => r.check(rep.points.len() == 2, || format!("tripod has {} points", rep.points.len())),
        Err(e) => r.fail(format!("tripod: {e}")),
    }
    match analyze_fiber(
        &fixtures::tripod_tree(),
        &moments_of(&fixtures::tripod_independent_theta()),
        &tol,
    ) {
        Ok(rep) => match rep.classification {
            Classification::Singular(deep) => r.check(deep.minimal_pairs.len() == 4, || {
                format!("{} minimal pairs", deep.minimal_pairs.len())
            }),
            other => r.fail(format!("independent tripod classified as {}", other.tag())),
        },
        Err(e) => r.fail(format!("independent tripod: {e}")),
    }
    let seven = fixtures::seven_leaf_theta();
    match analyze_fiber(seven.tree(), &moments_of(&seven), &tol) {
        Ok(rep) => {
            r.check(rep.isolated.len() == 5, || format!("{} isolated edges", rep.isolated.len()));
            r.check(rep.classes.active.len() == 4, || format!("{} active classes", rep.classes.active.len()));
            r.check(rep.degenerate_nodes.len() == 2, || "degenerate nodes".into());
            r.check(matches!(rep.classification, Classification::Singular(_)), || {
                "seven-leaf example is not singular".into()
            });
        }
        Err(e) => r.fail(format!("seven-leaf example: {e}")),
    }
    let manifold = fixtures::quartet_manifold_theta();
    match analyze_fiber(manifold.tree(), &moments_of(&manifold), &tol) {
        Ok(rep) => r.check(
            rep.classification == Classification::ManifoldWithCorners { dimension: 4 },
            || format!("manifold quartet classified as {:?}", rep.classification),
        ),
        Err(e) => r.fail(format!("manifold quartet: {e}")),
    }
    let mut rng = rng_from_seed(config.seed.wrapping_add(4));
    for case in 0..config.cases {
        let tree = random::random_tree_between(&mut rng, 3, 7, true);
        let theta = random::random_interior_theta(&mut rng, &tree);
        let omega = theta_to_omega(&theta);
        match analyze_fiber(&tree, &moments_of(&theta), &tol) {
            Ok(rep) => {
                let m = tree.inner_nodes().len();
                r.check(rep.points.len() == 1 << m, || {
                    format!("case {case}: {} points, want {}", rep.points.len(), 1 << m)
                });
                let sq = rep.recovered.expect("finite fiber has squares");
                for v in tree.nodes() {
                    let mb = sq.mu_bar_sq[v.0].unwrap_or(f64::NAN);
                    r.close(mb, omega.mu_bar(v).powi(2), 1e-8, || format!("case {case}: mu_bar^2 at {v}"));
                    if tree.parent(v).is_some() {
                        let e = sq.eta_sq[v.0].unwrap_or(f64::NAN);
                        r.close(e, omega.eta(v).powi(2), 1e-8, || format!("case {case}: eta^2 at {v}"));
                    }
                }
            }
            Err(e) => r.fail(format!("case {case}: {} {e}", tree.to_newick())),
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass_on_small_runs() {
        let config = SelftestConfig { seed: 3, cases: 10 };
        for report in run_all(config) {
            assert!(report.ok(), "{}: {:?}", report.name, report.failures);
            assert!(report.passed > 0);
        }
        assert!(matches!(run_suite("nope", config), Err(SelftestError::UnknownSuite(_))));
    }
}
