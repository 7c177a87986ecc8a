//! Isolation forest baseline: extra trees with uniformly random splits,
//! sharing the tree model and scoring machinery.

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::cell::Cell;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::grow::Subsample;
use crate::params::{ceil_log2, Criterion, HyperParams};
use crate::train::tree_rng;
use crate::tree::{Forest, ModelKind, NodeKind, OneClassTree, TreeNode};

/// Trains an isolation forest.
///
/// Each tree draws `min(max_samples, n)` rows without replacement and uses
/// every feature. At each node one feature is picked uniformly among those
/// not constant on the node, and the threshold uniformly from the open
/// interval of observed values. Growth stops at depth
/// `ceil(log2(subsample size))` or on single-point nodes.
pub fn train_iforest(
    dataset: &Dataset,
    n_trees: usize,
    max_samples: usize,
    seed: u64,
) -> Result<Forest> {
    let n = dataset.n_rows();
    let d = dataset.n_cols();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "training needs at least 2 rows, got {n}"
        )));
    }
    if n_trees == 0 || max_samples == 0 {
        return Err(Error::InvalidInput(
            "n_trees and max_samples must be positive".into(),
        ));
    }
    let n_sub = max_samples.min(n);
    let max_depth = ceil_log2(n_sub);

    let build_one = |k: usize| -> Result<OneClassTree> {
        let mut rng = tree_rng(seed, k);
        let rows = sample(&mut rng, n, n_sub).into_vec();
        let mut values = Vec::with_capacity(n_sub * d);
        for &r in &rows {
            values.extend_from_slice(dataset.row(r));
        }
        let sub = Subsample::new(values, d)?;
        let index: Vec<usize> = (0..n_sub).collect();
        let cell =
            Cell::bounding(index.iter().map(|&r| sub.row(r))).expect("subsample is non-empty");
        let root = build_random(&sub, index, cell, 0, max_depth, &mut rng);
        Ok(OneClassTree {
            root,
            subsample_size: n_sub,
            feature_subset: (0..d).collect(),
        })
    };

    #[cfg(feature = "parallel")]
    let trees: Result<Vec<OneClassTree>> = {
        use rayon::prelude::*;
        (0..n_trees).into_par_iter().map(build_one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let trees: Result<Vec<OneClassTree>> = (0..n_trees).map(build_one).collect();

    // Hyperparameters recorded for provenance; the fields describe what this
    // trainer actually did (all features per tree, one random feature per node).
    let hyperparams = HyperParams {
        max_samples_fraction: 1.0,
        max_samples_floor: n_sub,
        max_features_tree_fraction: 1.0,
        max_features_tree_floor: d,
        max_features_node: 1,
        gamma: 1.0,
        max_depth: Some(max_depth.max(1)),
        n_trees,
        criterion: Criterion::OcGini,
        naive_alpha_n: 100.0,
        seed,
    };
    Ok(Forest {
        trees: trees?,
        hyperparams,
        train_dims: d,
        kind: ModelKind::IsolationForest,
    })
}

fn build_random(
    rows: &Subsample,
    index: Vec<usize>,
    cell: Cell,
    depth: usize,
    max_depth: usize,
    rng: &mut ChaCha8Rng,
) -> TreeNode {
    let n = index.len();
    let leaf = |cell: Cell| TreeNode {
        cell,
        depth,
        n_inliers: n,
        kind: NodeKind::Leaf,
    };
    if depth >= max_depth || n <= 1 {
        return leaf(cell);
    }

    // Per-feature observed ranges within the node.
    let d = rows.n_cols();
    let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); d];
    for &r in &index {
        for (f, range) in ranges.iter_mut().enumerate() {
            let v = rows.value(r, f);
            range.0 = range.0.min(v);
            range.1 = range.1.max(v);
        }
    }
    let eligible: Vec<usize> = (0..d).filter(|&f| ranges[f].0 < ranges[f].1).collect();
    if eligible.is_empty() {
        return leaf(cell);
    }

    let feature = eligible[rng.gen_range(0..eligible.len())];
    let (lo, hi) = ranges[feature];
    let mut threshold = rng.gen_range(lo..hi);
    if !(threshold > lo && threshold < hi) {
        // gen_range can return the lower endpoint; fall back to the midpoint
        threshold = 0.5 * (lo + hi);
        if !(threshold > lo && threshold < hi) {
            return leaf(cell);
        }
    }

    let (left_cell, right_cell) = cell
        .split(feature, threshold)
        .expect("threshold lies strictly inside the node's value range");
    let mut left_idx = Vec::new();
    let mut right_idx = Vec::new();
    for r in index {
        if rows.value(r, feature) < threshold {
            left_idx.push(r);
        } else {
            right_idx.push(r);
        }
    }
    let left = build_random(rows, left_idx, left_cell, depth + 1, max_depth, rng);
    let right = build_random(rows, right_idx, right_cell, depth + 1, max_depth, rng);
    TreeNode {
        cell,
        depth,
        n_inliers: n,
        kind: NodeKind::Internal {
            split_feature: feature,
            split_threshold: threshold,
            left: Box::new(left),
            right: Box::new(right),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring;
    use crate::synth;

    #[test]
    fn default_sizing() {
        let data = synth::gaussian_cloud(1000, 3, 0.0, 1.0, 1);
        let forest = train_iforest(&data, 100, 256, 0).unwrap();
        assert_eq!(forest.n_trees(), 100);
        assert_eq!(forest.subsample_size(), 256);
        assert_eq!(forest.kind, ModelKind::IsolationForest);
    }

    #[test]
    fn small_dataset_clamps_subsample_and_depth() {
        let data = synth::gaussian_cloud(100, 3, 0.0, 1.0, 1);
        let forest = train_iforest(&data, 10, 256, 0).unwrap();
        assert_eq!(forest.subsample_size(), 100);
        let mut max_depth = 0;
        for tree in &forest.trees {
            tree.root
                .for_each(&mut |n| max_depth = max_depth.max(n.depth));
        }
        assert!(max_depth <= 7); // ceil(log2(100))
    }

    #[test]
    fn deterministic_by_seed() {
        let data = synth::gaussian_cloud(200, 4, 0.0, 1.0, 5);
        let f1 = train_iforest(&data, 8, 64, 9).unwrap();
        let f2 = train_iforest(&data, 8, 64, 9).unwrap();
        assert_eq!(f1, f2);
    }

    #[test]
    fn structural_invariants() {
        let data = synth::gaussian_cloud(150, 2, 0.0, 1.0, 3);
        let forest = train_iforest(&data, 5, 128, 2).unwrap();
        for tree in &forest.trees {
            let mut leaf_total = 0;
            tree.root.for_each(&mut |node| match &node.kind {
                NodeKind::Leaf => leaf_total += node.n_inliers,
                NodeKind::Internal { left, right, .. } => {
                    assert_eq!(left.n_inliers + right.n_inliers, node.n_inliers);
                    assert!(left.n_inliers >= 1 && right.n_inliers >= 1);
                }
            });
            assert_eq!(leaf_total, tree.subsample_size);
        }
    }

    #[test]
    fn far_outlier_isolates_quickly() {
        // 1-D uniform inliers plus one far point: the outlier's mean path
        // measure across trees must be below the inliers' average.
        let mut rows: Vec<Vec<f64>> = (0..200).map(|i| vec![i as f64 / 200.0]).collect();
        rows.push(vec![25.0]);
        let data = Dataset::from_rows(&rows, None).unwrap();
        let forest = train_iforest(&data, 50, 128, 7).unwrap();

        let outlier_path = scoring::tree_path_mean(&forest, &[25.0]).unwrap();
        let inlier_mean: f64 = (0..200)
            .map(|i| scoring::tree_path_mean(&forest, &[i as f64 / 200.0]).unwrap())
            .sum::<f64>()
            / 200.0;
        assert!(
            outlier_path < inlier_mean,
            "outlier path {outlier_path} not shorter than inlier mean {inlier_mean}"
        );
    }
}
