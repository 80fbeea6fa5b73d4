//! Desk-scale base-classifier generation: bootstrap sampling, random trees,
//! and the forest factory that turns a dataset into an [`EnsembleGroup`] of
//! score matrices.
//!
//! The tree is a deliberately plain random tree: Gini splits over K randomly
//! sampled features with midpoint thresholds, grown unpruned to a depth cap,
//! with Laplace-smoothed class frequencies at the leaves. The framework's
//! guarantees are learner-agnostic; all that matters here is producing many
//! near-equally-performing, diverse members.

mod dataset;
mod forest;
mod tree;

pub use dataset::{bootstrap_sample, stratified_split, Dataset};
pub use forest::{build_forest, RandomForest};
pub use tree::{predict_scores, train_random_tree, train_random_tree_with, RandomTreeModel, TreeNode, TreeParams};
