//! One-class splitting criteria.
//!
//! A two-class split is judged by an impurity-decrease proxy built from the
//! per-child class counts. Without a second class, the outlier count of a
//! child is replaced by its expectation under a distribution that keeps the
//! outlier-to-inlier ratio of the node fixed at `gamma`: a node with `n_t`
//! inliers is charged `gamma * n_t * lambda` hidden outliers on a child
//! occupying a fraction `lambda` of its volume. Minimizing the resulting
//! proxy drives one child to swallow many points in little volume.
//!
//! The naive alternative fixes a global uniform outlier budget `alpha_n`
//! instead; its expected child counts scale with the child volume as a
//! fraction of the *root* cell and vanish for deep nodes, which is exactly
//! the degeneracy [`class_ratio_naive`] quantifies. [`adaptive_model_params`]
//! gives the per-node reparameterization `(alpha(L), n(L))` under which the
//! general volume-fraction proxy collapses back to the adaptive one.

use crate::cell::Cell;
use crate::error::{Error, Result};

/// One candidate split, fully evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitEvaluation {
    /// Feature index (within the caller's coordinate system).
    pub feature: usize,
    pub threshold: f64,
    pub n_left: usize,
    pub n_right: usize,
    /// Child-to-parent volume fractions; they sum to 1.
    pub lambda_left: f64,
    pub lambda_right: f64,
    pub proxy_value: f64,
}

/// Single proxy term `a * b / (a + b)` with the empty-child convention
/// `0 * x / (0 + x) = 0`, the continuous limit as either count vanishes.
#[inline]
fn gini_term(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b / (a + b)
    }
}

/// Two-class Gini impurity-decrease proxy from per-child inlier/outlier counts.
///
/// Counts may be non-integral (expectations are allowed). Minimizing this over
/// candidate splits is equivalent to maximizing the Gini impurity decrease.
pub fn two_class_gini_proxy(
    n_left: f64,
    outliers_left: f64,
    n_right: f64,
    outliers_right: f64,
) -> f64 {
    gini_term(n_left, outliers_left) + gini_term(n_right, outliers_right)
}

/// Adaptive one-class Gini proxy.
///
/// `lambda_left` is the left child's share of the node volume, in (0, 1).
/// With `n_right = n_node - n_left` and `lambda_right = 1 - lambda_left`,
/// the hidden outlier counts are `gamma * n_node * lambda`; empty-child
/// terms contribute 0.
pub fn oc_gini_proxy(n_node: usize, n_left: usize, lambda_left: f64, gamma: f64) -> f64 {
    assert!(
        lambda_left > 0.0 && lambda_left < 1.0,
        "lambda_left must lie in (0, 1), got {lambda_left}"
    );
    assert!(
        n_left <= n_node,
        "n_left {n_left} exceeds node count {n_node}"
    );
    assert!(n_node >= 1, "node must contain at least one point");
    assert!(gamma > 0.0, "gamma must be positive");
    let expected = gamma * n_node as f64;
    let n_right = n_node - n_left;
    gini_term(n_left as f64, expected * lambda_left)
        + gini_term(n_right as f64, expected * (1.0 - lambda_left))
}

/// Adaptive one-class Shannon proxy; same contract as [`oc_gini_proxy`].
pub fn oc_shannon_proxy(n_node: usize, n_left: usize, lambda_left: f64, gamma: f64) -> f64 {
    assert!(
        lambda_left > 0.0 && lambda_left < 1.0,
        "lambda_left must lie in (0, 1), got {lambda_left}"
    );
    assert!(
        n_left <= n_node,
        "n_left {n_left} exceeds node count {n_node}"
    );
    assert!(n_node >= 1, "node must contain at least one point");
    assert!(gamma > 0.0, "gamma must be positive");
    let expected = gamma * n_node as f64;
    let shannon_term = |n: f64, hidden: f64| -> f64 {
        if n == 0.0 {
            0.0
        } else {
            n * ((n + hidden) / n).log2()
        }
    };
    let n_right = n_node - n_left;
    shannon_term(n_left as f64, expected * lambda_left)
        + shannon_term(n_right as f64, expected * (1.0 - lambda_left))
}

/// Naive one-class Gini proxy with a fixed global outlier budget `alpha_n`.
///
/// `vol_frac_left`/`vol_frac_right` are the children's volumes as fractions
/// of the **root** cell, so the expected child outlier counts are
/// `alpha_n * vol_frac`. Each term is bounded by its `alpha_n * vol_frac`
/// factor, hence the whole proxy by `alpha_n * L_t`: the criterion loses all
/// discrimination as the node volume fraction shrinks.
pub fn naive_oc_gini_proxy(
    alpha_n: f64,
    n_left: usize,
    n_right: usize,
    vol_frac_left: f64,
    vol_frac_right: f64,
) -> f64 {
    gini_term(n_left as f64, alpha_n * vol_frac_left)
        + gini_term(n_right as f64, alpha_n * vol_frac_right)
}

/// Outlier-to-inlier class ratio of a node under the naive model:
/// `alpha_n * vol_frac / n_node`.
pub fn class_ratio_naive(alpha_n: f64, vol_frac: f64, n_node: usize) -> f64 {
    assert!(n_node >= 1, "node must contain at least one point");
    alpha_n * vol_frac / n_node as f64
}

/// Per-node reparameterization of the global two-class model.
///
/// `alpha` is the node-level outlier probability and `n` the node-level total
/// count; they satisfy `(1 - alpha) * n = (1 - alpha_global) * n_global`
/// (inlier expectation preserved) and `alpha * n * vol_frac = expected_outliers`
/// (class ratio pinned), both to 1e-9 relative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveModelParams {
    pub alpha: f64,
    pub n: f64,
}

/// Closed forms for the adaptive model at a node with volume fraction
/// `vol_frac` of the root and `expected_outliers` hidden outliers:
///
/// `alpha(L) = n' / ((1 - alpha) n L + n')`,
/// `n(L) = ((1 - alpha) n L + n') / L`.
///
/// As `vol_frac -> 0`, `alpha(L) -> 1` and `n(L) -> inf`.
pub fn adaptive_model_params(
    alpha: f64,
    n: f64,
    vol_frac: f64,
    expected_outliers: f64,
) -> Result<AdaptiveModelParams> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    if !vol_frac.is_finite() || vol_frac <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "volume fraction must be positive, got {vol_frac}"
        )));
    }
    if !expected_outliers.is_finite() || expected_outliers <= 0.0 {
        return Err(Error::InvalidInput(
            "expected outlier count must be positive".into(),
        ));
    }
    let inlier_mass = (1.0 - alpha) * n * vol_frac;
    Ok(AdaptiveModelParams {
        alpha: expected_outliers / (inlier_mass + expected_outliers),
        n: (inlier_mass + expected_outliers) / vol_frac,
    })
}

/// General adaptive proxy in root-volume-fraction coordinates.
///
/// With `params` from [`adaptive_model_params`] for the parent node and
/// children fractions summing to the parent's, this equals
/// [`oc_gini_proxy`] of the same split (the hidden count
/// `alpha(L) * n(L) * vol_frac_child` reduces to `n' * lambda_child`).
pub fn oc_adaptive_proxy_general(
    n_left: usize,
    n_right: usize,
    params: AdaptiveModelParams,
    vol_frac_left: f64,
    vol_frac_right: f64,
) -> f64 {
    let rate = params.alpha * params.n;
    gini_term(n_left as f64, rate * vol_frac_left)
        + gini_term(n_right as f64, rate * vol_frac_right)
}

/// What the split search minimizes, with the context each form needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitObjective {
    OcGini {
        gamma: f64,
    },
    OcShannon {
        gamma: f64,
    },
    /// `node_vol_frac` is the node's volume as a fraction of the tree's root cell.
    NaiveOcGini {
        alpha_n: f64,
        node_vol_frac: f64,
    },
}

impl SplitObjective {
    #[inline]
    fn proxy(&self, n_node: usize, n_left: usize, lambda_left: f64) -> f64 {
        match *self {
            SplitObjective::OcGini { gamma } => oc_gini_proxy(n_node, n_left, lambda_left, gamma),
            SplitObjective::OcShannon { gamma } => {
                oc_shannon_proxy(n_node, n_left, lambda_left, gamma)
            }
            SplitObjective::NaiveOcGini {
                alpha_n,
                node_vol_frac,
            } => naive_oc_gini_proxy(
                alpha_n,
                n_left,
                n_node - n_left,
                node_vol_frac * lambda_left,
                node_vol_frac * (1.0 - lambda_left),
            ),
        }
    }
}

/// Exhaustive best-split search over the given candidate features.
///
/// Candidate thresholds are the midpoints between consecutive distinct sorted
/// values of each feature among the node's rows, evaluated with `value(row, feature)`.
/// Returns the evaluation minimizing the objective, or `None` when no feature
/// admits a valid threshold (all candidate features constant on the node).
///
/// Deterministic: features are scanned in ascending index order and
/// thresholds in ascending order, and only a strictly smaller proxy replaces
/// the incumbent, so exact ties resolve to the lowest feature index, then the
/// lowest threshold.
pub fn find_best_split<F>(
    rows: &[usize],
    value: F,
    cell: &Cell,
    candidate_features: &[usize],
    objective: &SplitObjective,
) -> Option<SplitEvaluation>
where
    F: Fn(usize, usize) -> f64,
{
    let n_node = rows.len();
    if n_node < 2 {
        return None;
    }
    let mut features: Vec<usize> = candidate_features.to_vec();
    features.sort_unstable();
    features.dedup();

    let mut best: Option<SplitEvaluation> = None;
    let mut values: Vec<f64> = Vec::with_capacity(n_node);
    for &feature in &features {
        if cell.width(feature) <= 0.0 {
            continue;
        }
        values.clear();
        values.extend(rows.iter().map(|&r| value(r, feature)));
        values.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite feature values"));

        for i in 0..n_node - 1 {
            let (lo, hi) = (values[i], values[i + 1]);
            if lo == hi {
                continue;
            }
            let threshold = 0.5 * (lo + hi);
            // Adjacent floats can round the midpoint onto an endpoint; such a
            // threshold would not separate the two values, so skip it.
            if !(threshold > lo && threshold < hi) {
                continue;
            }
            let lambda_left = cell.width_fraction_below(feature, threshold);
            if !(lambda_left > 0.0 && lambda_left < 1.0) {
                continue;
            }
            let n_left = i + 1;
            let proxy = objective.proxy(n_node, n_left, lambda_left);
            if best.as_ref().is_none_or(|b| proxy < b.proxy_value) {
                best = Some(SplitEvaluation {
                    feature,
                    threshold,
                    n_left,
                    n_right: n_node - n_left,
                    lambda_left,
                    lambda_right: 1.0 - lambda_left,
                    proxy_value: proxy,
                });
            }
        }
    }
    best
}
