//! Classification by per-class complex networks.
//!
//! Each class of a training set becomes a weighted complete graph over its
//! own samples, pruned to edges at most `theta` times the median pairwise
//! distance. The total weight of the graph's minimum spanning forest is the
//! structural metric; a test sample is assigned to the class whose forest
//! weight grows the least (or shrinks the most) when the sample is connected
//! to every node. Per-feature distance weights can be tuned by grid search
//! or a real-coded genetic algorithm, and a cross-validation harness runs
//! the full experiment pipeline.
//!
//! Modules:
//! - [`data`] — dataset loading, generation, scaling, balancing, splitting
//! - [`graph`] — class networks, pruning, minimum-spanning-forest weight
//! - [`classifier`] — per-class model fitting, prediction, metrics
//! - [`optimizer`] — feature-weight search (grid and genetic algorithm)
//! - [`harness`] — cross-validated experiments and report emission

pub mod classifier;
pub mod data;
pub mod error;
pub mod graph;
pub mod harness;
pub mod matrix;
pub mod optimizer;

pub use error::{Error, Result};
