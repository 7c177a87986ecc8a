//! Ensemble training: row and feature sub-sampling per tree, parallel growth,
//! and impurity-based variable importance.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::criteria::{oc_gini_proxy, SplitEvaluation};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::grow::{grow_tree, node_gain, GrowthConfig, Subsample};
use crate::params::{Criterion, HyperParams};
use crate::tree::{Forest, ModelKind, NodeKind, OneClassTree};

/// Deterministic per-tree random stream: one ChaCha instance seeded by the
/// master seed, with the stream id set from the tree index. Tree `k` sees the
/// same draws no matter how many threads run, so training is reproducible and
/// thread-count independent.
pub(crate) fn tree_rng(seed: u64, tree_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tree_index as u64 + 1);
    rng
}

/// Trains a one-class forest. Labels on the dataset, if any, are ignored.
///
/// Each tree draws its rows uniformly without replacement, then its feature
/// subset without replacement, then grows via [`grow_tree`]; features return
/// to the pool only after the tree is finished.
pub fn train(dataset: &Dataset, params: &HyperParams) -> Result<Forest> {
    params.validate()?;
    let n = dataset.n_rows();
    let d = dataset.n_cols();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "training needs at least 2 rows, got {n}"
        )));
    }

    let n_sub = params.subsample_size(n);
    let d_tree = params.tree_feature_count(d);
    let max_depth = params.effective_max_depth(n_sub);
    let config = GrowthConfig {
        max_depth,
        max_features_node: params.max_features_node,
        criterion: params.criterion,
        gamma: params.gamma,
        naive_alpha_n: params.naive_alpha_n,
        min_node_points: 2,
        min_density: None,
        max_density: None,
    };

    let build_one = |k: usize| -> Result<OneClassTree> {
        let mut rng = tree_rng(params.seed, k);
        let rows = sample(&mut rng, n, n_sub).into_vec();
        let mut features = sample(&mut rng, d, d_tree).into_vec();
        features.sort_unstable();

        let mut values = Vec::with_capacity(n_sub * d_tree);
        for &r in &rows {
            let row = dataset.row(r);
            values.extend(features.iter().map(|&f| row[f]));
        }
        let sub = Subsample::new(values, d_tree)?;
        grow_tree(&sub, features, &config, &mut rng)
    };

    #[cfg(feature = "parallel")]
    let trees: Result<Vec<OneClassTree>> =
        (0..params.n_trees).into_par_iter().map(build_one).collect();
    #[cfg(not(feature = "parallel"))]
    let trees: Result<Vec<OneClassTree>> = (0..params.n_trees).map(build_one).collect();

    Ok(Forest {
        trees: trees?,
        hyperparams: params.clone(),
        train_dims: d,
        kind: ModelKind::OneClassForest,
    })
}

/// Per-feature importance: the node-weighted impurity gains of every split
/// using that feature, summed within each tree and averaged over trees.
/// Node weight is `n_node / subsample_size`. Features a forest never splits
/// on score 0. Requires a forest grown with the adaptive Gini criterion.
pub fn variable_importance(forest: &Forest) -> Result<Vec<f64>> {
    if forest.kind != ModelKind::OneClassForest || forest.hyperparams.criterion != Criterion::OcGini
    {
        return Err(Error::InvalidInput(
            "variable importance is defined for forests trained with the oc-gini criterion".into(),
        ));
    }
    let gamma = forest.hyperparams.gamma;
    let mut importance = vec![0.0; forest.train_dims];
    for tree in &forest.trees {
        let weight_denom = tree.subsample_size as f64;
        tree.root.for_each(&mut |node| {
            if let NodeKind::Internal {
                split_feature,
                split_threshold,
                left,
                right,
            } = &node.kind
            {
                // Recover the split evaluation from the stored children.
                let lambda_left = node
                    .cell
                    .width_fraction_below(*split_feature, *split_threshold);
                let proxy = oc_gini_proxy(node.n_inliers, left.n_inliers, lambda_left, gamma);
                let eval = SplitEvaluation {
                    feature: *split_feature,
                    threshold: *split_threshold,
                    n_left: left.n_inliers,
                    n_right: right.n_inliers,
                    lambda_left,
                    lambda_right: 1.0 - lambda_left,
                    proxy_value: proxy,
                };
                let gain = node_gain(node.n_inliers, &eval, gamma);
                let global = tree.feature_subset[*split_feature];
                importance[global] += node.n_inliers as f64 / weight_denom * gain;
            }
        });
    }
    let n_trees = forest.trees.len() as f64;
    for v in &mut importance {
        *v /= n_trees;
    }
    Ok(importance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn small_params(n_trees: usize, seed: u64) -> HyperParams {
        HyperParams {
            n_trees,
            seed,
            ..HyperParams::default()
        }
    }

    #[test]
    fn rejects_tiny_datasets() {
        let d = Dataset::from_rows(&[vec![1.0, 2.0]], None).unwrap();
        assert!(train(&d, &HyperParams::default()).is_err());
    }

    #[test]
    fn subsample_and_feature_counts_match_configuration() {
        let data = synth::gaussian_cloud(300, 10, 0.0, 1.0, 5);
        let params = small_params(5, 3);
        let forest = train(&data, &params).unwrap();
        assert_eq!(forest.n_trees(), 5);
        for tree in &forest.trees {
            assert_eq!(tree.subsample_size, 100); // floor binds for n=300
            assert_eq!(tree.feature_subset.len(), 5);
            assert!(tree.feature_subset.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn deterministic_by_seed() {
        let data = synth::gaussian_cloud(150, 3, 0.0, 1.0, 11);
        let f1 = train(&data, &small_params(7, 42)).unwrap();
        let f2 = train(&data, &small_params(7, 42)).unwrap();
        assert_eq!(f1, f2);
        let f3 = train(&data, &small_params(7, 43)).unwrap();
        assert_ne!(f1, f3);
    }

    #[test]
    fn tree_k_depends_only_on_seed_and_index() {
        // Growing more trees must not change the earlier ones.
        let data = synth::gaussian_cloud(120, 4, 0.0, 1.0, 2);
        let short = train(&data, &small_params(3, 5)).unwrap();
        let long = train(&data, &small_params(6, 5)).unwrap();
        assert_eq!(short.trees[..], long.trees[..3]);
    }

    #[test]
    fn labels_do_not_affect_training() {
        let data = synth::novelty_2d(80, 20, 0);
        assert!(data.labels().is_some());
        let f1 = train(&data, &small_params(5, 1)).unwrap();
        let f2 = train(&data.without_labels(), &small_params(5, 1)).unwrap();
        assert_eq!(f1, f2);
    }

    #[test]
    fn importance_zero_for_constant_feature() {
        // feature 1 is constant: it can never split
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|i| vec![(i as f64 * 0.37).sin(), 2.5])
            .collect();
        let data = Dataset::from_rows(&rows, None).unwrap();
        let forest = train(&data, &small_params(10, 4)).unwrap();
        let imp = variable_importance(&forest).unwrap();
        assert_eq!(imp.len(), 2);
        assert_eq!(imp[1], 0.0);
        assert!(imp.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn importance_ranks_heavy_tailed_feature_higher() {
        // feature 0 heavy-tailed, feature 1 uniform: splitting on 0 buys more.
        let mut rows = Vec::new();
        let mut state = 88172645463325252u64;
        let mut next = || {
            // xorshift for a quick deterministic uniform
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..400 {
            let u = next().max(1e-9);
            let heavy = (1.0 / u).powf(0.7) - 1.0; // Pareto-ish tail
            rows.push(vec![heavy, next()]);
        }
        let data = Dataset::from_rows(&rows, None).unwrap();
        let forest = train(&data, &small_params(30, 9)).unwrap();
        let imp = variable_importance(&forest).unwrap();
        assert!(
            imp[0] > imp[1],
            "heavy-tailed feature should dominate: {imp:?}"
        );
    }

    #[test]
    fn importance_requires_oc_gini() {
        let data = synth::gaussian_cloud(50, 2, 0.0, 1.0, 6);
        let params = HyperParams {
            criterion: Criterion::OcShannon,
            n_trees: 2,
            ..HyperParams::default()
        };
        let forest = train(&data, &params).unwrap();
        assert!(variable_importance(&forest).is_err());
    }
}
