//! Dataset-level score-space geometry for ensemble classifiers.
//!
//! Every classifier's probability output for a whole dataset is one point in
//! an `n·p`-dimensional Euclidean space; the true labels are the ideal point.
//! Majority voting is the centroid of the member points and weighted majority
//! voting is a least-squares linear combination, so ensemble behavior becomes
//! plain geometry:
//!
//! - [`space`] — the data model plus performance/dissimilarity distances;
//! - [`fusion`] — centroid and weighted fusion, the closed-form performance
//!   predictor, the ensemble-size curve, and the instance-level objective;
//! - [`weights`] — optimal weights via the normal equations, with exact
//!   handling of dependent members;
//! - [`selection`] — best-subset search: exact enumeration, greedy forward
//!   construction, and swap local search;
//! - [`learners`] — bootstrap + random trees, enough to run experiments
//!   without an external ML stack;
//! - [`eval`] — accuracy, the shrink experiment, Pearson and paired-t;
//! - [`io`] — scores JSON, dataset CSV, results tables, column files;
//! - [`synth`] — seeded synthetic datasets.
//!
//! ```
//! use ensemble_geometry::prelude::*;
//!
//! let members = vec![
//!     ScoreMatrix::new("cf1", 1, 2, vec![0.8, 0.3])?,
//!     ScoreMatrix::new("cf2", 1, 2, vec![0.4, 0.9])?,
//! ];
//! let group = EnsembleGroup::new(members)?;
//! let ideal = IdealLabels::new(1, 2, vec![1.0, 0.0])?;
//!
//! let mv = centroid_fuse(&group);
//! let wmv = solve_optimal_weights(&group, &ideal, 0.0)?;
//! assert!(wmv.residual <= euclidean_distance(&mv.fused, &ideal)? + 1e-12);
//! # Ok::<(), ensemble_geometry::Error>(())
//! ```

pub mod error;
pub mod eval;
pub mod fusion;
pub mod io;
pub mod learners;
pub mod linalg;
pub mod selection;
pub mod space;
pub mod synth;
pub mod weights;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};

/// The common working set in one import.
pub mod prelude {
    pub use crate::error::{Error, Result};
    pub use crate::eval::{accuracy, paired_t, pearson, shrink_experiment, ExperimentConfig};
    pub use crate::fusion::{
        centroid_fuse, instance_level_objective, predict_centroid_distance,
        predict_weighted_distance, theta_limit_curve, weighted_fuse, FusionMethod, FusionResult,
    };
    pub use crate::learners::{
        bootstrap_sample, build_forest, predict_scores, stratified_split, train_random_tree,
        Dataset, RandomForest, RandomTreeModel,
    };
    pub use crate::selection::{
        diversity_objective, exact_best_subset, greedy_forward_subset, local_search_subset,
        SelectionMethod, SelectionObjective, SelectionResult,
    };
    pub use crate::space::{
        dissimilarity_matrix, distance_summary, euclidean_distance, flatten_index,
        performance_distances, unflatten_index, DistanceSummary, EnsembleGroup, IdealLabels,
        ScoreMatrix, ScorePoint,
    };
    pub use crate::weights::{
        build_normal_equations, solve_optimal_weights, NormalEquations, WeightSolution,
        WeightVector,
    };
}
