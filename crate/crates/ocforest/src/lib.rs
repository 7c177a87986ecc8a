//! One-class random forests for novelty and outlier detection.
//!
//! Decision trees are grown without a second class by replacing the missing
//! outlier counts with volume-weighted expectations, so standard impurity
//! minimization carries over to unlabeled data. The crate provides the
//! adaptive Gini and Shannon splitting criteria (plus the naive fixed-budget
//! variant for diagnostics), an isolation forest baseline sharing the same
//! tree model, depth- and density-based scoring, model serialization, CSV
//! ingestion, and an evaluation harness computing ROC/PR AUCs over repeated
//! random splits.
//!
//! ```
//! use ocforest::{train, HyperParams, depth_score, synth};
//!
//! let data = synth::two_clusters_2d(400, 7);
//! let params = HyperParams { n_trees: 50, seed: 1, ..HyperParams::default() };
//! let forest = train(&data, &params).unwrap();
//!
//! // abnormality of a point far from both clusters vs. a cluster center
//! let far = depth_score(&forest, &[9.0, -9.0]).unwrap();
//! let near = depth_score(&forest, &[-2.0, 0.0]).unwrap();
//! assert!(far > near);
//! ```

mod cell;
mod criteria;
mod csv_io;
mod dataset;
mod error;
mod eval;
mod grow;
mod iforest;
mod metrics;
mod model_io;
mod params;
mod scoring;
pub mod synth;
mod train;
mod tree;

pub use cell::Cell;
pub use criteria::{
    adaptive_model_params, class_ratio_naive, find_best_split, naive_oc_gini_proxy,
    oc_adaptive_proxy_general, oc_gini_proxy, oc_shannon_proxy, two_class_gini_proxy,
    AdaptiveModelParams, SplitEvaluation, SplitObjective,
};
pub use csv_io::{load_csv, scores_csv, DatasetSpec};
pub use dataset::Dataset;
pub use error::{Error, Result};
pub use eval::{
    curve_csv, run_protocol, Aggregate, EvalMode, EvalReport, ModelConfig, Protocol, RepeatRecord,
};
pub use grow::{grow_tree, node_gain, GrowthConfig, Subsample};
pub use iforest::train_iforest;
pub use metrics::{pr_auc, pr_curve, roc_auc, roc_curve};
pub use model_io::{load_model, read_model, save_model, write_model, FORMAT_VERSION, MAGIC};
pub use params::{ceil_log2, Criterion, HyperParams};
pub use scoring::{
    data_bounds, depth_score, harmonic_c, score_grid, score_point, score_rows, stepwise_density,
    tree_path_mean, tree_path_measure, typical_cell_density, ScoreGrid, ScoreKind,
};
pub use train::{train, variable_importance};
pub use tree::{Forest, ModelKind, NodeKind, OneClassTree, TreeNode};
