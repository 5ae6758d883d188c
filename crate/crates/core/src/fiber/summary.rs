//! Second and third order central moments with an explicit zero policy.

use crate::moments::{CentralMoments, TreeCumulants};
use crate::subset;

/// Pairwise and triple central moments of the leaves.
///
/// Entries with magnitude below `zero_tol` are stored as exact zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSummary {
    n: usize,
    means: Vec<f64>,
    values: Vec<f64>,
    zero_tol: f64,
    warnings: Vec<String>,
}

/// Snaps `μ_I` for `|I| ∈ {2, 3}`; magnitudes in `[ε, 10ε)` produce a warning.
pub fn covariance_summary(m: &CentralMoments<f64>, eps: f64) -> CovarianceSummary {
    CovarianceSummary::build(m.n(), m.means().to_vec(), m.values(), eps)
}

impl CovarianceSummary {
    fn build(n: usize, means: Vec<f64>, source: &[f64], eps: f64) -> Self {
        let mut values = vec![0.0; source.len()];
        let mut warnings = Vec::new();
        for (mask, &x) in source.iter().enumerate() {
            let size = subset::size(mask as u32);
            if !(2..=3).contains(&size) {
                continue;
            }
            if x.abs() < eps {
                continue;
            }
            if x.abs() < 10.0 * eps {
                warnings.push(format!(
                    "moment of {} is {:e}, close to the zero threshold {:e}",
                    subset::render(mask as u32),
                    x,
                    eps
                ));
            }
            values[mask] = x;
        }
        CovarianceSummary {
            n,
            means,
            values,
            zero_tol: eps,
            warnings,
        }
    }

    /// Uses `κ_I = μ_I` for `|I| ≤ 3`.
    pub fn from_cumulants(k: &TreeCumulants<f64>, eps: f64) -> Self {
        CovarianceSummary::build(k.n(), k.means().to_vec(), k.values(), eps)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn zero_tol(&self) -> f64 {
        self.zero_tol
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// `λ_i`.
    pub fn mean(&self, i: usize) -> f64 {
        self.means[i - 1]
    }

    /// `μ̄_i = 1 − 2λ_i`.
    pub fn mu_bar(&self, i: usize) -> f64 {
        1.0 - 2.0 * self.means[i - 1]
    }

    /// `Var(X_i) = λ_i(1 − λ_i)`.
    pub fn variance(&self, i: usize) -> f64 {
        self.means[i - 1] * (1.0 - self.means[i - 1])
    }

    /// `μ̂_ij` for distinct leaves.
    pub fn pair(&self, i: usize, j: usize) -> f64 {
        self.values[(subset::leaf_bit(i) | subset::leaf_bit(j)) as usize]
    }

    /// `μ̂_ijk` for distinct leaves.
    pub fn triple(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[(subset::leaf_bit(i) | subset::leaf_bit(j) | subset::leaf_bit(k)) as usize]
    }

    /// Leaf pairs `(i, j)`, `i < j`, with `μ̂_ij = 0`.
    pub fn zero_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 1..=self.n {
            for j in (i + 1)..=self.n {
                if self.pair(i, j) == 0.0 {
                    out.push((i, j));
                }
            }
        }
        out
    }
}
