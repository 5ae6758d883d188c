/// Numeric tolerances used across the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Magnitudes below this are treated as exact zeros by the fiber analysis.
    pub zero_eps: f64,
    /// Slack for the probability-simplex validity predicate.
    pub validity: f64,
    /// Slack for the linear inequalities defining the parameter charts.
    pub constraint: f64,
    /// Relative agreement required between alternative recovery routes.
    pub recovery: f64,
    /// Agreement required when re-evaluating ψ on a recovered point.
    pub reproduction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            zero_eps: 1e-9,
            validity: 1e-9,
            constraint: 1e-12,
            recovery: 1e-8,
            reproduction: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn with_zero_eps(mut self, eps: f64) -> Self {
        self.zero_eps = eps;
        self
    }
}

/// `|a - b| <= tol * max(1, |a|, |b|)`.
pub fn close_rel(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

/// `|a - b| <= tol * max(|a|, |b|)`; exact zeros only match exact zeros.
pub fn close_relative(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}
