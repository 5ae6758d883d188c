//! Joint distribution over all nodes of a tree, observed and hidden.

use crate::moments::ProbabilityTable;
use crate::params::{ParamError, MAX_JOINT_NODES};
use crate::scalar::Scalar;
use crate::tree::{NodeId, TreeTopology};

/// Table over `{0,1}^V`; bit `k` of the index is the state of node `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FullJoint<T = f64> {
    node_count: usize,
    values: Vec<T>,
}

impl<T: Scalar> FullJoint<T> {
    pub fn new(node_count: usize, values: Vec<T>) -> Result<Self, ParamError> {
        if node_count > MAX_JOINT_NODES {
            return Err(ParamError::TooManyNodes(node_count));
        }
        if values.len() != 1 << node_count {
            return Err(ParamError::WrongLength {
                what: "joint table",
                expected: 1 << node_count,
                got: values.len(),
            });
        }
        Ok(FullJoint { node_count, values })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, assignment: u32) -> &T {
        &self.values[assignment as usize]
    }

    /// Marginal over `nodes`; bit `k` of the result index is `nodes[k]`.
    pub fn marginal(&self, nodes: &[NodeId]) -> Vec<T> {
        let mut out = vec![T::zero(); 1 << nodes.len()];
        for (a, v) in self.values.iter().enumerate() {
            let mut idx = 0usize;
            for (k, node) in nodes.iter().enumerate() {
                if a & (1 << node.0) != 0 {
                    idx |= 1 << k;
                }
            }
            out[idx] = out[idx].clone() + v.clone();
        }
        out
    }

    /// Distribution of the leaves, indexed by leaf label.
    pub fn leaf_marginal(&self, tree: &TreeTopology) -> ProbabilityTable<T> {
        let values = self.marginal(tree.leaves());
        ProbabilityTable::new(tree.leaf_count(), values).expect("one entry per leaf pattern")
    }

    /// Sum of all entries.
    pub fn total(&self) -> T {
        self.values.iter().fold(T::zero(), |a, v| a + v.clone())
    }

    /// Assignments with non-zero mass, as node masks.
    pub fn support(&self) -> Vec<u32> {
        (0..self.values.len() as u32)
            .filter(|&a| self.values[a as usize] != T::zero())
            .collect()
    }
}
