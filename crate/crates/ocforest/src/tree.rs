//! Tree and forest data model.
//!
//! Trees are immutable once grown. Each tree works in the subspace spanned by
//! its `feature_subset`: node cells and split feature indices refer to
//! positions within that subset, and traversal maps back to global feature
//! indices on the fly.

use crate::cell::Cell;
use crate::params::HyperParams;

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Leaf,
    Internal {
        /// Index into the owning tree's feature subset.
        split_feature: usize,
        split_threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub cell: Cell,
    pub depth: usize,
    pub n_inliers: usize,
    pub kind: NodeKind,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf)
    }

    pub fn count_nodes(&self) -> usize {
        match &self.kind {
            NodeKind::Leaf => 1,
            NodeKind::Internal { left, right, .. } => 1 + left.count_nodes() + right.count_nodes(),
        }
    }

    /// Visits nodes in pre-order.
    pub fn for_each<'a>(&'a self, f: &mut impl FnMut(&'a TreeNode)) {
        f(self);
        if let NodeKind::Internal { left, right, .. } = &self.kind {
            left.for_each(f);
            right.for_each(f);
        }
    }
}

/// A trained one-class tree over a subset of the dataset's features.
#[derive(Debug, Clone, PartialEq)]
pub struct OneClassTree {
    pub root: TreeNode,
    /// Number of training rows this tree was grown on.
    pub subsample_size: usize,
    /// Global feature indices, ascending; node coordinates index into this.
    pub feature_subset: Vec<usize>,
}

impl OneClassTree {
    /// Routes a point (in global coordinates) to its leaf by threshold
    /// comparisons: `x[feature] < threshold` goes left, otherwise right.
    /// Points outside the root cell are still routed this way.
    pub fn leaf_for(&self, x: &[f64]) -> &TreeNode {
        let mut node = &self.root;
        loop {
            match &node.kind {
                NodeKind::Leaf => return node,
                NodeKind::Internal {
                    split_feature,
                    split_threshold,
                    left,
                    right,
                } => {
                    let value = x[self.feature_subset[*split_feature]];
                    node = if value < *split_threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    /// Largest global feature index this tree reads.
    pub fn max_feature_index(&self) -> usize {
        self.feature_subset.iter().copied().max().unwrap_or(0)
    }
}

/// Distinguishes how the trees of a [`Forest`] were grown.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Trees grown by minimizing a one-class impurity proxy.
    OneClassForest,
    /// Extra-tree baseline with uniformly random splits.
    IsolationForest,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::OneClassForest => "ocrf",
            ModelKind::IsolationForest => "iforest",
        }
    }
}

/// A trained ensemble. Immutable after training; share freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    pub trees: Vec<OneClassTree>,
    pub hyperparams: HyperParams,
    /// Number of features of the training dataset (global dimension).
    pub train_dims: usize,
    pub kind: ModelKind,
}

impl Forest {
    /// Rows per tree; uniform across the ensemble by construction.
    pub fn subsample_size(&self) -> usize {
        self.trees.first().map(|t| t.subsample_size).unwrap_or(0)
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }
}
