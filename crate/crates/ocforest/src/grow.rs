//! Recursive growth of a single one-class tree.

use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;

use crate::cell::Cell;
use crate::criteria::{find_best_split, SplitEvaluation, SplitObjective};
use crate::error::{Error, Result};
use crate::params::Criterion;
use crate::tree::{NodeKind, OneClassTree, TreeNode};

/// Per-tree growth settings.
#[derive(Debug, Clone)]
pub struct GrowthConfig {
    pub max_depth: usize,
    pub max_features_node: usize,
    pub criterion: Criterion,
    pub gamma: f64,
    /// Outlier budget of the naive criterion; ignored otherwise.
    pub naive_alpha_n: f64,
    /// A node with fewer points becomes a leaf. Default 2: single points stop.
    pub min_node_points: usize,
    /// Optional stop when the node density `n / volume` falls to or below
    /// this value. Off by default.
    pub min_density: Option<f64>,
    /// Optional stop when the node density reaches this value. Off by default.
    pub max_density: Option<f64>,
}

impl GrowthConfig {
    pub fn new(
        max_depth: usize,
        max_features_node: usize,
        criterion: Criterion,
        gamma: f64,
    ) -> Self {
        Self {
            max_depth,
            max_features_node,
            criterion,
            gamma,
            naive_alpha_n: 100.0,
            min_node_points: 2,
            min_density: None,
            max_density: None,
        }
    }
}

/// A tree's training rows, materialized in subspace coordinates
/// (`n_cols` = size of the tree's feature subset).
#[derive(Debug)]
pub struct Subsample {
    values: Vec<f64>,
    n_rows: usize,
    n_cols: usize,
}

impl Subsample {
    pub fn new(values: Vec<f64>, n_cols: usize) -> Result<Self> {
        if n_cols == 0 || values.is_empty() || !values.len().is_multiple_of(n_cols) {
            return Err(Error::InvalidInput("empty or ragged subsample".into()));
        }
        Ok(Self {
            n_rows: values.len() / n_cols,
            values,
            n_cols,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.n_cols..(row + 1) * self.n_cols]
    }
}

/// Grows one tree on `rows`. The root cell is the bounding box of the rows.
///
/// At every node that may still split (depth below the cap, enough points,
/// density stops silent), `max_features_node` candidate features are drawn
/// uniformly without replacement from the tree's subspace, and the split
/// minimizing the configured proxy over all midpoint thresholds is taken.
/// The node becomes a leaf when every candidate feature is constant.
///
/// The rng is consumed in pre-order, one feature draw per candidate node, so
/// identical `(rows, config, rng state)` reproduce the tree exactly.
pub fn grow_tree(
    rows: &Subsample,
    feature_subset: Vec<usize>,
    config: &GrowthConfig,
    rng: &mut ChaCha8Rng,
) -> Result<OneClassTree> {
    if feature_subset.len() != rows.n_cols() {
        return Err(Error::InvalidInput(format!(
            "feature subset of size {} for a subsample with {} columns",
            feature_subset.len(),
            rows.n_cols()
        )));
    }
    if config.min_node_points == 0 {
        return Err(Error::InvalidInput(
            "min_node_points must be at least 1".into(),
        ));
    }
    let index: Vec<usize> = (0..rows.n_rows()).collect();
    let root_cell = Cell::bounding(index.iter().map(|&r| rows.row(r)))
        .ok_or_else(|| Error::InvalidInput("cannot grow a tree on zero rows".into()))?;
    let root = build_node(rows, index, root_cell, 0, 1.0, config, rng);
    Ok(OneClassTree {
        root,
        subsample_size: rows.n_rows(),
        feature_subset,
    })
}

fn build_node(
    rows: &Subsample,
    index: Vec<usize>,
    cell: Cell,
    depth: usize,
    vol_frac: f64,
    config: &GrowthConfig,
    rng: &mut ChaCha8Rng,
) -> TreeNode {
    let n = index.len();
    let leaf = |cell: Cell| TreeNode {
        cell,
        depth,
        n_inliers: n,
        kind: NodeKind::Leaf,
    };

    if depth >= config.max_depth || n < config.min_node_points {
        return leaf(cell);
    }
    if config.min_density.is_some() || config.max_density.is_some() {
        let volume = cell.volume();
        if volume > 0.0 {
            let density = n as f64 / volume;
            if config.min_density.is_some_and(|lo| density <= lo)
                || config.max_density.is_some_and(|hi| density >= hi)
            {
                return leaf(cell);
            }
        }
    }

    let d = rows.n_cols();
    let k = config.max_features_node.min(d);
    let mut candidates: Vec<usize> = sample(rng, d, k).into_vec();
    candidates.sort_unstable();

    let objective = match config.criterion {
        Criterion::OcGini => SplitObjective::OcGini {
            gamma: config.gamma,
        },
        Criterion::OcShannon => SplitObjective::OcShannon {
            gamma: config.gamma,
        },
        Criterion::NaiveOcGini => SplitObjective::NaiveOcGini {
            alpha_n: config.naive_alpha_n,
            node_vol_frac: vol_frac,
        },
    };
    let best = match find_best_split(
        &index,
        |r, f| rows.value(r, f),
        &cell,
        &candidates,
        &objective,
    ) {
        Some(b) => b,
        None => return leaf(cell),
    };

    let (left_cell, right_cell) = cell
        .split(best.feature, best.threshold)
        .expect("midpoint thresholds lie strictly inside the cell");
    let mut left_idx = Vec::with_capacity(best.n_left);
    let mut right_idx = Vec::with_capacity(best.n_right);
    for r in index {
        if rows.value(r, best.feature) < best.threshold {
            left_idx.push(r);
        } else {
            right_idx.push(r);
        }
    }
    debug_assert_eq!(left_idx.len(), best.n_left);
    debug_assert_eq!(right_idx.len(), best.n_right);

    let left = build_node(
        rows,
        left_idx,
        left_cell,
        depth + 1,
        vol_frac * best.lambda_left,
        config,
        rng,
    );
    let right = build_node(
        rows,
        right_idx,
        right_cell,
        depth + 1,
        vol_frac * best.lambda_right,
        config,
        rng,
    );
    TreeNode {
        cell,
        depth,
        n_inliers: n,
        kind: NodeKind::Internal {
            split_feature: best.feature,
            split_threshold: best.threshold,
            left: Box::new(left),
            right: Box::new(right),
        },
    }
}

/// Impurity gain of a chosen split under the adaptive Gini criterion:
/// the proportional-split baseline `gamma * n / (1 + gamma)` minus the
/// minimized proxy, clamped at zero.
pub fn node_gain(n_node: usize, best: &SplitEvaluation, gamma: f64) -> f64 {
    let baseline = gamma * n_node as f64 / (1.0 + gamma);
    (baseline - best.proxy_value).max(0.0)
}
