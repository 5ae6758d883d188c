//! Coordinate systems on distributions of `n` binary leaves and the maps
//! between them: probabilities `p`, non-central moments `λ`, central
//! moments `μ`, tree cumulants `κ` and correlations `ρ`.
//!
//! Every table is dense over the subsets of `[n]`, indexed by bitmask with
//! leaf 1 in the lowest bit.

use thiserror::Error;

use crate::poset::{enumerate_set_partitions, EdgePartitionPoset, PosetError};
use crate::scalar::Scalar;
use crate::subset::{self, MAX_DENSE_LEAVES};
use crate::tree::TreeTopology;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MomentError {
    #[error("dense tables support at most {max} leaves, got {0}", max = MAX_DENSE_LEAVES)]
    TooManyLeaves(usize),
    #[error("expected {expected} entries, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("expected {expected} leaf means, got {got}")]
    WrongMeans { expected: usize, got: usize },
    #[error("tree has {tree} leaves but the coordinates have {coords}")]
    LeafCountMismatch { tree: usize, coords: usize },
    #[error("leaf {0} has a degenerate margin (mean 0 or 1)")]
    DegenerateMargin(usize),
    #[error("subset {0:#b} is outside [n]")]
    SubsetOutOfRange(u32),
    #[error(transparent)]
    Poset(#[from] PosetError),
}

fn table_len(n: usize) -> Result<usize, MomentError> {
    if n > MAX_DENSE_LEAVES {
        return Err(MomentError::TooManyLeaves(n));
    }
    Ok(1usize << n)
}

fn check_len(n: usize, got: usize) -> Result<(), MomentError> {
    let expected = table_len(n)?;
    if got != expected {
        return Err(MomentError::WrongLength { expected, got });
    }
    Ok(())
}

fn check_means(n: usize, got: usize) -> Result<(), MomentError> {
    if got != n {
        return Err(MomentError::WrongMeans { expected: n, got });
    }
    Ok(())
}

/// A violated condition found by [`ProbabilityTable::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum ValidityIssue {
    Negative { index: u32, value: f64 },
    SumNotOne { sum: f64 },
}

/// `p_α` for `α ∈ {0,1}^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable<T = f64> {
    n: usize,
    values: Vec<T>,
}

impl<T: Scalar> ProbabilityTable<T> {
    pub fn new(n: usize, values: Vec<T>) -> Result<Self, MomentError> {
        check_len(n, values.len())?;
        Ok(ProbabilityTable { n, values })
    }

    pub fn uniform(n: usize) -> Result<Self, MomentError> {
        let len = table_len(n)?;
        Ok(ProbabilityTable {
            n,
            values: vec![T::one() / T::from_int(len as i64); len],
        })
    }

    pub fn point_mass(n: usize, alpha: u32) -> Result<Self, MomentError> {
        let len = table_len(n)?;
        if alpha as usize >= len {
            return Err(MomentError::SubsetOutOfRange(alpha));
        }
        let mut values = vec![T::zero(); len];
        values[alpha as usize] = T::one();
        Ok(ProbabilityTable { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, alpha: u32) -> &T {
        &self.values[alpha as usize]
    }

    /// Conditions violated beyond `tol`; empty for a valid table.
    pub fn validate(&self, tol: f64) -> Vec<ValidityIssue> {
        let mut issues = Vec::new();
        let mut sum = 0.0;
        for (k, v) in self.values.iter().enumerate() {
            let x = v.to_f64();
            sum += x;
            if x < -tol || x.is_nan() {
                issues.push(ValidityIssue::Negative {
                    index: k as u32,
                    value: x,
                });
            }
        }
        if (sum - 1.0).abs() > tol || sum.is_nan() {
            issues.push(ValidityIssue::SumNotOne { sum });
        }
        issues
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        self.validate(tol).is_empty()
    }

    /// Marginal table of the leaves in `keep`, relabelled `1..=|keep|` in increasing order.
    pub fn marginal(&self, keep: u32) -> Result<ProbabilityTable<T>, MomentError> {
        if keep as usize >= self.values.len() && keep != 0 {
            return Err(MomentError::SubsetOutOfRange(keep));
        }
        let positions: Vec<usize> = subset::labels(keep).map(|l| l - 1).collect();
        let mut values = vec![T::zero(); 1 << positions.len()];
        for (alpha, v) in self.values.iter().enumerate() {
            let mut idx = 0usize;
            for (k, &pos) in positions.iter().enumerate() {
                if alpha & (1 << pos) != 0 {
                    idx |= 1 << k;
                }
            }
            values[idx] = values[idx].clone() + v.clone();
        }
        Ok(ProbabilityTable {
            n: positions.len(),
            values,
        })
    }
}

/// `λ_α = E[Π_{i∈α} Y_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoncentralMoments<T = f64> {
    n: usize,
    values: Vec<T>,
}

impl<T: Scalar> NoncentralMoments<T> {
    pub fn new(n: usize, values: Vec<T>) -> Result<Self, MomentError> {
        check_len(n, values.len())?;
        Ok(NoncentralMoments { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, alpha: u32) -> &T {
        &self.values[alpha as usize]
    }

    /// `λ_i` for `i = 1..=n`.
    pub fn means(&self) -> Vec<T> {
        (1..=self.n)
            .map(|l| self.values[subset::leaf_bit(l) as usize].clone())
            .collect()
    }
}

/// Central moments `μ_I = E[Π_{i∈I}(Y_i − λ_i)]` together with the means.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralMoments<T = f64> {
    n: usize,
    means: Vec<T>,
    values: Vec<T>,
}

impl<T: Scalar> CentralMoments<T> {
    pub fn new(n: usize, means: Vec<T>, values: Vec<T>) -> Result<Self, MomentError> {
        check_len(n, values.len())?;
        check_means(n, means.len())?;
        Ok(CentralMoments { n, means, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn means(&self) -> &[T] {
        &self.means
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, mask: u32) -> &T {
        &self.values[mask as usize]
    }

    /// Variance of leaf `label`.
    pub fn variance(&self, label: usize) -> T {
        self.means[label - 1].clone() * (T::one() - self.means[label - 1].clone())
    }
}

/// Tree cumulants `κ_I` of a tree, together with the leaf means.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeCumulants<T = f64> {
    tree: TreeTopology,
    means: Vec<T>,
    values: Vec<T>,
}

impl<T: Scalar> TreeCumulants<T> {
    pub fn new(tree: TreeTopology, means: Vec<T>, values: Vec<T>) -> Result<Self, MomentError> {
        let n = tree.leaf_count();
        check_len(n, values.len())?;
        check_means(n, means.len())?;
        Ok(TreeCumulants { tree, means, values })
    }

    pub fn n(&self) -> usize {
        self.tree.leaf_count()
    }

    pub fn tree(&self) -> &TreeTopology {
        &self.tree
    }

    pub fn means(&self) -> &[T] {
        &self.means
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, mask: u32) -> &T {
        &self.values[mask as usize]
    }

    /// `μ̄_i = 1 − 2λ_i` for every leaf.
    pub fn mu_bar(&self) -> Vec<T> {
        self.means
            .iter()
            .map(|l| T::one() - T::from_int(2) * l.clone())
            .collect()
    }
}

/// Correlation coordinates `ρ̄_i` and `ρ_I`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationCoords {
    n: usize,
    rho_bar: Vec<f64>,
    values: Vec<f64>,
}

impl CorrelationCoords {
    pub fn new(n: usize, rho_bar: Vec<f64>, values: Vec<f64>) -> Result<Self, MomentError> {
        check_len(n, values.len())?;
        check_means(n, rho_bar.len())?;
        Ok(CorrelationCoords { n, rho_bar, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rho_bar(&self) -> &[f64] {
        &self.rho_bar
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, mask: u32) -> f64 {
        self.values[mask as usize]
    }
}

fn superset_transform<T: Scalar>(values: &mut [T], n: usize, sign: T) {
    for i in 0..n {
        let bit = 1usize << i;
        for mask in 0..values.len() {
            if mask & bit == 0 {
                let add = values[mask | bit].clone() * sign.clone();
                values[mask] = values[mask].clone() + add;
            }
        }
    }
}

/// `λ_α = Σ_{β ⊇ α} p_β`.
pub fn p_to_lambda<T: Scalar>(p: &ProbabilityTable<T>) -> NoncentralMoments<T> {
    let mut values = p.values.clone();
    superset_transform(&mut values, p.n, T::one());
    NoncentralMoments { n: p.n, values }
}

/// `p_α = Σ_{β ⊇ α} (−1)^{|β∖α|} λ_β`.
pub fn lambda_to_p<T: Scalar>(l: &NoncentralMoments<T>) -> ProbabilityTable<T> {
    let mut values = l.values.clone();
    superset_transform(&mut values, l.n, -T::one());
    ProbabilityTable { n: l.n, values }
}

fn center<T: Scalar>(values: &mut [T], means: &[T], sign: T) {
    for (i, mean) in means.iter().enumerate() {
        let bit = 1usize << i;
        let factor = mean.clone() * sign.clone();
        for mask in 0..values.len() {
            if mask & bit != 0 {
                let add = values[mask ^ bit].clone() * factor.clone();
                values[mask] = values[mask].clone() + add;
            }
        }
    }
}

/// `μ_α = Σ_{β ⊆ α} λ_β Π_{i∈α∖β} (−λ_i)`.
pub fn lambda_to_mu<T: Scalar>(l: &NoncentralMoments<T>) -> CentralMoments<T> {
    let means = l.means();
    let mut values = l.values.clone();
    center(&mut values, &means, -T::one());
    CentralMoments {
        n: l.n,
        means,
        values,
    }
}

/// `λ_α = Σ_{β ⊆ α} μ_β Π_{i∈α∖β} λ_i`.
pub fn mu_to_lambda<T: Scalar>(m: &CentralMoments<T>) -> NoncentralMoments<T> {
    let mut values = m.values.clone();
    center(&mut values, &m.means, T::one());
    NoncentralMoments { n: m.n, values }
}

/// The Möbius-weighted partitions of `Π_{T(I)}` for every `I`, cached per tree.
#[derive(Debug, Clone)]
pub struct CumulantTransform {
    tree: TreeTopology,
    terms: Vec<Vec<(i64, Vec<u32>)>>,
}

impl CumulantTransform {
    /// Builds the edge-partition lattice of every `I ⊆ [n]` with `|I| ≥ 2`.
    pub fn new(tree: &TreeTopology) -> Result<Self, MomentError> {
        let n = tree.leaf_count();
        let len = table_len(n)?;
        let mut terms = vec![Vec::new(); len];
        for (mask, slot) in terms.iter_mut().enumerate() {
            if subset::size(mask as u32) < 2 {
                continue;
            }
            let poset = EdgePartitionPoset::new(tree, mask as u32)?;
            *slot = poset
                .elements()
                .iter()
                .zip(poset.mobius_to_top())
                .map(|(e, &m)| (m, e.blocks().to_vec()))
                .collect();
        }
        Ok(CumulantTransform {
            tree: tree.clone(),
            terms,
        })
    }

    pub fn tree(&self) -> &TreeTopology {
        &self.tree
    }

    /// `κ_I = Σ_{π ∈ Π_{T(I)}} m(π, 1̂) Π_{B∈π} μ_B`.
    pub fn mu_to_kappa<T: Scalar>(&self, m: &CentralMoments<T>) -> Result<TreeCumulants<T>, MomentError> {
        self.check(m.n)?;
        let values = self
            .terms
            .iter()
            .map(|terms| {
                terms.iter().fold(T::zero(), |acc, (coef, blocks)| {
                    if *coef == 0 {
                        return acc;
                    }
                    let prod = blocks
                        .iter()
                        .fold(T::from_int(*coef), |p, &b| p * m.values[b as usize].clone());
                    acc + prod
                })
            })
            .collect();
        Ok(TreeCumulants {
            tree: self.tree.clone(),
            means: m.means.clone(),
            values,
        })
    }

    /// `μ_I = Σ_{π ∈ Π_{T(I)}} Π_{B∈π} κ_B`.
    pub fn kappa_to_mu<T: Scalar>(&self, k: &TreeCumulants<T>) -> Result<CentralMoments<T>, MomentError> {
        self.check(k.n())?;
        let mut values: Vec<T> = self
            .terms
            .iter()
            .map(|terms| {
                terms.iter().fold(T::zero(), |acc, (_, blocks)| {
                    let prod = blocks
                        .iter()
                        .fold(T::one(), |p, &b| p * k.values[b as usize].clone());
                    acc + prod
                })
            })
            .collect();
        values[0] = T::one();
        Ok(CentralMoments {
            n: k.n(),
            means: k.means.clone(),
            values,
        })
    }

    fn check(&self, n: usize) -> Result<(), MomentError> {
        if n != self.tree.leaf_count() {
            return Err(MomentError::LeafCountMismatch {
                tree: self.tree.leaf_count(),
                coords: n,
            });
        }
        Ok(())
    }
}

/// Tree cumulants of `m` with respect to `tree`.
pub fn mu_to_kappa<T: Scalar>(tree: &TreeTopology, m: &CentralMoments<T>) -> Result<TreeCumulants<T>, MomentError> {
    CumulantTransform::new(tree)?.mu_to_kappa(m)
}

/// Central moments from tree cumulants.
pub fn kappa_to_mu<T: Scalar>(k: &TreeCumulants<T>) -> Result<CentralMoments<T>, MomentError> {
    CumulantTransform::new(&k.tree)?.kappa_to_mu(k)
}

/// Classical joint cumulant of the leaves in `leaf_set`.
pub fn classical_cumulant<T: Scalar>(m: &CentralMoments<T>, leaf_set: u32) -> Result<T, MomentError> {
    if leaf_set as usize >= m.values.len() {
        return Err(MomentError::SubsetOutOfRange(leaf_set));
    }
    let parts = enumerate_set_partitions(leaf_set)?;
    Ok(parts.iter().fold(T::zero(), |acc, part| {
        let coef = crate::poset::classical_mobius_top(part);
        let prod = part
            .blocks()
            .iter()
            .fold(T::from_int(coef), |p, &b| p * m.values[b as usize].clone());
        acc + prod
    }))
}

/// `ρ_I = 2^{|I|} κ_I / Π_{i∈I} √(1−μ̄_i²)` and `ρ̄_i = 2μ̄_i / √(1−μ̄_i²)`.
pub fn kappa_to_rho(k: &TreeCumulants<f64>) -> Result<CorrelationCoords, MomentError> {
    let mu_bar = k.mu_bar();
    let mut scale = Vec::with_capacity(mu_bar.len());
    for (i, mb) in mu_bar.iter().enumerate() {
        let s = (1.0 - mb * mb).sqrt();
        if !(s > 0.0) {
            return Err(MomentError::DegenerateMargin(i + 1));
        }
        scale.push(s);
    }
    let rho_bar = mu_bar.iter().zip(&scale).map(|(mb, s)| 2.0 * mb / s).collect();
    let values = k
        .values
        .iter()
        .enumerate()
        .map(|(mask, kappa)| {
            let mask = mask as u32;
            let denom: f64 = subset::labels(mask).map(|l| scale[l - 1] / 2.0).product();
            kappa / denom
        })
        .collect();
    Ok(CorrelationCoords {
        n: k.n(),
        rho_bar,
        values,
    })
}

/// Inverse of [`kappa_to_rho`] for a given tree.
pub fn rho_to_kappa(tree: &TreeTopology, r: &CorrelationCoords) -> Result<TreeCumulants<f64>, MomentError> {
    if r.n != tree.leaf_count() {
        return Err(MomentError::LeafCountMismatch {
            tree: tree.leaf_count(),
            coords: r.n,
        });
    }
    let mu_bar: Vec<f64> = r.rho_bar.iter().map(|rb| rb / (4.0 + rb * rb).sqrt()).collect();
    let scale: Vec<f64> = mu_bar.iter().map(|mb| (1.0 - mb * mb).sqrt()).collect();
    let means = mu_bar.iter().map(|mb| (1.0 - mb) / 2.0).collect();
    let values = r
        .values
        .iter()
        .enumerate()
        .map(|(mask, rho)| {
            let factor: f64 = subset::labels(mask as u32).map(|l| scale[l - 1] / 2.0).product();
            rho * factor
        })
        .collect();
    TreeCumulants::new(tree.clone(), means, values)
}

/// `p ↦ (λ, μ, κ)` in one pass.
pub fn cumulants_from_probabilities<T: Scalar>(
    transform: &CumulantTransform,
    p: &ProbabilityTable<T>,
) -> Result<TreeCumulants<T>, MomentError> {
    transform.mu_to_kappa(&lambda_to_mu(&p_to_lambda(p)))
}

/// `κ ↦ p` in one pass.
pub fn probabilities_from_cumulants<T: Scalar>(
    transform: &CumulantTransform,
    k: &TreeCumulants<T>,
) -> Result<ProbabilityTable<T>, MomentError> {
    Ok(lambda_to_p(&mu_to_lambda(&transform.kappa_to_mu(k)?)))
}
