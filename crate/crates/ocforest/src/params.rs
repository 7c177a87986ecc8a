use crate::error::{Error, Result};

/// Impurity proxy minimized at each split of a one-class tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    /// Adaptive one-class Gini proxy (default).
    OcGini,
    /// Adaptive one-class Shannon proxy.
    OcShannon,
    /// Naive one-class Gini proxy with a fixed global outlier budget.
    /// Degenerates on deep nodes; exposed for diagnostics only.
    NaiveOcGini,
}

impl Criterion {
    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::OcGini => "oc-gini",
            Criterion::OcShannon => "oc-shannon",
            Criterion::NaiveOcGini => "naive",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "oc-gini" => Ok(Criterion::OcGini),
            "oc-shannon" => Ok(Criterion::OcShannon),
            "naive" => Ok(Criterion::NaiveOcGini),
            other => Err(Error::InvalidInput(format!(
                "unknown criterion '{other}' (expected oc-gini, oc-shannon or naive)"
            ))),
        }
    }
}

/// Ensemble hyperparameters.
///
/// The defaults reproduce the reference configuration: each tree trains on
/// 20% of the rows (at least 100) and 50% of the features (at least 5), the
/// split search at each node considers 5 features, `gamma = 1`, 100 trees,
/// and the depth cap defaults to `ceil(log2(subsample size))` when unset.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperParams {
    pub max_samples_fraction: f64,
    pub max_samples_floor: usize,
    pub max_features_tree_fraction: f64,
    pub max_features_tree_floor: usize,
    pub max_features_node: usize,
    pub gamma: f64,
    pub max_depth: Option<usize>,
    pub n_trees: usize,
    pub criterion: Criterion,
    /// Assumed hidden-outlier budget for the naive criterion; ignored otherwise.
    pub naive_alpha_n: f64,
    pub seed: u64,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            max_samples_fraction: 0.20,
            max_samples_floor: 100,
            max_features_tree_fraction: 0.50,
            max_features_tree_floor: 5,
            max_features_node: 5,
            gamma: 1.0,
            max_depth: None,
            n_trees: 100,
            criterion: Criterion::OcGini,
            naive_alpha_n: 100.0,
            seed: 0,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        let frac_ok = |v: f64| v > 0.0 && v <= 1.0;
        if !frac_ok(self.max_samples_fraction) {
            return Err(Error::InvalidInput(
                "max_samples_fraction must be in (0, 1]".into(),
            ));
        }
        if !frac_ok(self.max_features_tree_fraction) {
            return Err(Error::InvalidInput(
                "max_features_tree_fraction must be in (0, 1]".into(),
            ));
        }
        if self.max_samples_floor == 0
            || self.max_features_tree_floor == 0
            || self.max_features_node == 0
        {
            return Err(Error::InvalidInput(
                "sampling floors must be positive".into(),
            ));
        }
        if self.max_depth == Some(0) {
            return Err(Error::InvalidInput(
                "max_depth must be positive when given".into(),
            ));
        }
        if self.n_trees == 0 {
            return Err(Error::InvalidInput("n_trees must be positive".into()));
        }
        if !self.gamma.is_finite() || self.gamma <= 0.0 {
            return Err(Error::InvalidInput("gamma must be a positive real".into()));
        }
        if !self.naive_alpha_n.is_finite() || self.naive_alpha_n <= 0.0 {
            return Err(Error::InvalidInput(
                "naive_alpha_n must be a positive real".into(),
            ));
        }
        Ok(())
    }

    /// Rows drawn per tree: `max(ceil(fraction * n), min(floor, n))`.
    pub fn subsample_size(&self, n_rows: usize) -> usize {
        let by_fraction = (self.max_samples_fraction * n_rows as f64).ceil() as usize;
        by_fraction
            .max(self.max_samples_floor.min(n_rows))
            .min(n_rows)
    }

    /// Features drawn per tree: `max(ceil(fraction * d), min(floor, d))`.
    pub fn tree_feature_count(&self, n_cols: usize) -> usize {
        let by_fraction = (self.max_features_tree_fraction * n_cols as f64).ceil() as usize;
        by_fraction
            .max(self.max_features_tree_floor.min(n_cols))
            .min(n_cols)
    }

    /// Depth cap used while growing: the configured value, or
    /// `ceil(log2(subsample_size))` when none was given.
    pub fn effective_max_depth(&self, subsample_size: usize) -> usize {
        self.max_depth.unwrap_or_else(|| ceil_log2(subsample_size))
    }
}

/// `ceil(log2(n))` for `n >= 1`, with `ceil_log2(1) = 0`.
pub fn ceil_log2(n: usize) -> usize {
    assert!(n >= 1, "ceil_log2 requires n >= 1");
    (usize::BITS - (n - 1).leading_zeros()) as usize
}
