//! Tree cumulants for binary latent tree models.
//!
//! Coordinate changes between probabilities, moments and tree cumulants,
//! the parameter charts of the Markov model on a tree, and the analysis of
//! fibers of the parametrization.

pub mod fiber;
pub mod fixtures;
pub mod io;
pub mod joint;
pub mod moments;
pub mod newick;
pub mod oracle;
pub mod params;
pub mod poset;
pub mod random;
pub mod scalar;
pub mod selftest;
pub mod subset;
pub mod tolerance;
pub mod tree;
