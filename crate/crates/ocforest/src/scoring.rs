//! Forest scoring functions.
//!
//! The default depth score follows the isolation convention: route a point to
//! its leaf in every tree, average `depth + c(n_leaf)` over trees, and map
//! through `s = 2^(-avg / c(subsample_size))`. `c(n)` is the expected path
//! length of an extremely randomized tree on `n` points, so leaves holding
//! many points are credited the depth they would have kept growing. Higher
//! depth score means more abnormal; the two density scores orient the other
//! way, which [`ScoreKind::higher_is_more_abnormal`] records for consumers.

use crate::cell::Cell;
use crate::error::{Error, Result};
use crate::tree::{Forest, OneClassTree};

/// Which scoring function to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreKind {
    /// `2^(-mean path measure / c(n))`; higher = more abnormal.
    DepthScore,
    /// Mean over trees of `n_leaf / volume(leaf)`; lower = more abnormal.
    StepwiseDensity,
    /// Total leaf count over total leaf volume; lower = more abnormal.
    TypicalCellDensity,
}

impl ScoreKind {
    /// Orientation of the raw score. The evaluation harness negates scores
    /// where this is false so that "higher = more abnormal" holds uniformly.
    pub fn higher_is_more_abnormal(self) -> bool {
        matches!(self, ScoreKind::DepthScore)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ScoreKind::DepthScore => "depth",
            ScoreKind::StepwiseDensity => "stepwise-density",
            ScoreKind::TypicalCellDensity => "typical-cell",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "depth" => Ok(ScoreKind::DepthScore),
            "stepwise-density" => Ok(ScoreKind::StepwiseDensity),
            "typical-cell" => Ok(ScoreKind::TypicalCellDensity),
            other => Err(Error::InvalidInput(format!(
                "unknown score kind '{other}' (expected depth, stepwise-density or typical-cell)"
            ))),
        }
    }
}

/// Average-path-length correction: `c(1) = 0` and
/// `c(n) = 2 H(n-1) - 2 (n-1) / n` with the harmonic number computed as an
/// exact partial sum. Strictly increasing for `n >= 2`.
pub fn harmonic_c(n: usize) -> f64 {
    assert!(n >= 1, "harmonic_c requires n >= 1");
    if n == 1 {
        return 0.0;
    }
    let h: f64 = (1..n).map(|i| 1.0 / i as f64).sum();
    2.0 * h - 2.0 * (n as f64 - 1.0) / n as f64
}

/// Exact `c(n)` values for `0..=max`, built once per scoring pass.
struct HarmonicTable {
    c: Vec<f64>,
}

impl HarmonicTable {
    fn up_to(max: usize) -> Self {
        let mut c = Vec::with_capacity(max + 1);
        c.push(0.0); // unused slot for n = 0
        c.push(0.0); // c(1)
        let mut h = 0.0;
        for n in 2..=max {
            h += 1.0 / (n as f64 - 1.0);
            c.push(2.0 * h - 2.0 * (n as f64 - 1.0) / n as f64);
        }
        Self { c }
    }

    #[inline]
    fn get(&self, n: usize) -> f64 {
        self.c[n]
    }
}

fn check_dims(forest: &Forest, x: &[f64]) -> Result<()> {
    if x.len() != forest.train_dims {
        return Err(Error::InvalidInput(format!(
            "point has {} coordinates but the model was trained on {}",
            x.len(),
            forest.train_dims
        )));
    }
    Ok(())
}

/// Path measure of one tree at `x`: leaf depth plus `c(n_leaf)`. Traversal
/// uses threshold comparisons only, so points outside the root cell are still
/// routed to a boundary leaf.
pub fn tree_path_measure(tree: &OneClassTree, x: &[f64]) -> Result<f64> {
    if tree.max_feature_index() >= x.len() {
        return Err(Error::InvalidInput(format!(
            "point has {} coordinates but the tree reads feature {}",
            x.len(),
            tree.max_feature_index()
        )));
    }
    let leaf = tree.leaf_for(x);
    Ok(leaf.depth as f64 + harmonic_c(leaf.n_inliers.max(1)))
}

/// Mean path measure over the forest's trees.
pub fn tree_path_mean(forest: &Forest, x: &[f64]) -> Result<f64> {
    check_dims(forest, x)?;
    if forest.trees.is_empty() {
        return Err(Error::InvalidInput("forest has no trees".into()));
    }
    let table = HarmonicTable::up_to(forest.subsample_size().max(1));
    Ok(path_mean_with(forest, x, &table))
}

fn path_mean_with(forest: &Forest, x: &[f64], table: &HarmonicTable) -> f64 {
    let total: f64 = forest
        .trees
        .iter()
        .map(|tree| {
            let leaf = tree.leaf_for(x);
            leaf.depth as f64 + table.get(leaf.n_inliers.max(1))
        })
        .sum();
    total / forest.trees.len() as f64
}

/// Depth score in `(0, 1]`; strictly decreasing in the mean path measure.
pub fn depth_score(forest: &Forest, x: &[f64]) -> Result<f64> {
    let mean = tree_path_mean(forest, x)?;
    let denom = harmonic_c(forest.subsample_size());
    Ok((-mean / denom).exp2())
}

/// Dimensions with positive width in the tree's root cell; zero-width
/// (constant) features are excluded from leaf volumes so densities stay
/// finite and comparably scaled across leaves.
fn active_dims(tree: &OneClassTree) -> Vec<usize> {
    (0..tree.root.cell.dims())
        .filter(|&j| tree.root.cell.width(j) > 0.0)
        .collect()
}

fn leaf_log_volume(cell: &Cell, dims: &[usize]) -> f64 {
    dims.iter().map(|&j| cell.width(j).ln()).sum()
}

/// Step-wise density estimate: mean over trees of `n_leaf / volume(leaf)`.
/// Empty leaves contribute 0. For points outside a tree's root cell the
/// stored leaf cell is used as-is (an extrapolation).
pub fn stepwise_density(forest: &Forest, x: &[f64]) -> Result<f64> {
    check_dims(forest, x)?;
    if forest.trees.is_empty() {
        return Err(Error::InvalidInput("forest has no trees".into()));
    }
    let mut total = 0.0;
    for tree in &forest.trees {
        let dims = active_dims(tree);
        let leaf = tree.leaf_for(x);
        if leaf.n_inliers > 0 {
            total += leaf.n_inliers as f64 / leaf_log_volume(&leaf.cell, &dims).exp();
        }
    }
    Ok(total / forest.trees.len() as f64)
}

/// Typical-cell density: total leaf occupancy over total leaf volume across
/// the forest, `sum(n_leaf) / sum(volume(leaf))`.
pub fn typical_cell_density(forest: &Forest, x: &[f64]) -> Result<f64> {
    check_dims(forest, x)?;
    if forest.trees.is_empty() {
        return Err(Error::InvalidInput("forest has no trees".into()));
    }
    let mut count = 0.0;
    let mut volume = 0.0;
    for tree in &forest.trees {
        let dims = active_dims(tree);
        let leaf = tree.leaf_for(x);
        count += leaf.n_inliers as f64;
        volume += leaf_log_volume(&leaf.cell, &dims).exp();
    }
    if volume <= 0.0 {
        return Err(Error::Eval("total leaf volume is zero".into()));
    }
    Ok(count / volume)
}

/// Evaluates `kind` at a single point.
pub fn score_point(forest: &Forest, x: &[f64], kind: ScoreKind) -> Result<f64> {
    match kind {
        ScoreKind::DepthScore => depth_score(forest, x),
        ScoreKind::StepwiseDensity => stepwise_density(forest, x),
        ScoreKind::TypicalCellDensity => typical_cell_density(forest, x),
    }
}

/// Scores many points, sharing the harmonic table across calls.
pub fn score_rows<'a, I>(forest: &Forest, rows: I, kind: ScoreKind) -> Result<Vec<f64>>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    if forest.trees.is_empty() {
        return Err(Error::InvalidInput("forest has no trees".into()));
    }
    match kind {
        ScoreKind::DepthScore => {
            let table = HarmonicTable::up_to(forest.subsample_size().max(1));
            let denom = harmonic_c(forest.subsample_size());
            rows.into_iter()
                .map(|x| {
                    check_dims(forest, x)?;
                    Ok((-path_mean_with(forest, x, &table) / denom).exp2())
                })
                .collect()
        }
        ScoreKind::StepwiseDensity => rows
            .into_iter()
            .map(|x| stepwise_density(forest, x))
            .collect(),
        ScoreKind::TypicalCellDensity => rows
            .into_iter()
            .map(|x| typical_cell_density(forest, x))
            .collect(),
    }
}

/// A regular 2-D evaluation grid of a scoring function, for level-set plots.
#[derive(Debug, Clone)]
pub struct ScoreGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major over `ys` then `xs`: `values[iy * xs.len() + ix]`.
    pub values: Vec<f64>,
}

impl ScoreGrid {
    /// CSV with header `x,y,score`, one row per grid point in row-major
    /// order, all numbers with 9 significant digits.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,y,score")?;
        for (iy, &y) in self.ys.iter().enumerate() {
            for (ix, &x) in self.xs.iter().enumerate() {
                let v = self.values[iy * self.xs.len() + ix];
                writeln!(w, "{},{},{}", fmt_sig9(x), fmt_sig9(y), fmt_sig9(v))?;
            }
        }
        Ok(())
    }
}

/// Decimal floating point with 9 significant digits.
pub(crate) fn fmt_sig9(v: f64) -> String {
    format!("{v:.8e}")
}

/// Evaluates the chosen score on the centers of a regular `nx x ny` grid over
/// `bounds`. The model must have been trained on exactly 2 features.
pub fn score_grid(
    forest: &Forest,
    kind: ScoreKind,
    bounds: &Cell,
    nx: usize,
    ny: usize,
) -> Result<ScoreGrid> {
    if forest.train_dims != 2 {
        return Err(Error::InvalidInput(format!(
            "score grids require a 2-feature model, this one has d={}",
            forest.train_dims
        )));
    }
    if bounds.dims() != 2 {
        return Err(Error::InvalidInput(
            "grid bounds must be 2-dimensional".into(),
        ));
    }
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidInput(
            "grid resolution must be positive".into(),
        ));
    }
    let centers = |lo: f64, hi: f64, k: usize| -> Vec<f64> {
        let step = (hi - lo) / k as f64;
        (0..k).map(|i| lo + (i as f64 + 0.5) * step).collect()
    };
    let xs = centers(bounds.lower()[0], bounds.upper()[0], nx);
    let ys = centers(bounds.lower()[1], bounds.upper()[1], ny);
    let mut points = Vec::with_capacity(nx * ny);
    for &y in &ys {
        for &x in &xs {
            points.push([x, y]);
        }
    }
    let values = score_rows(forest, points.iter().map(|p| p.as_slice()), kind)?;
    Ok(ScoreGrid { xs, ys, values })
}

/// Union of the root cells of all trees: the natural default plotting bounds.
pub fn data_bounds(forest: &Forest) -> Result<Cell> {
    if forest.train_dims != 2 {
        return Err(Error::InvalidInput(
            "data bounds are provided for 2-feature models".into(),
        ));
    }
    let mut lower = [f64::INFINITY; 2];
    let mut upper = [f64::NEG_INFINITY; 2];
    for tree in &forest.trees {
        for (slot, &f) in tree.feature_subset.iter().enumerate() {
            lower[f] = lower[f].min(tree.root.cell.lower()[slot]);
            upper[f] = upper[f].max(tree.root.cell.upper()[slot]);
        }
    }
    Cell::new(lower.to_vec(), upper.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::HyperParams;
    use crate::synth;
    use crate::train::train;
    use crate::tree::{ModelKind, NodeKind, TreeNode};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn harmonic_c_values() {
        assert_eq!(harmonic_c(1), 0.0);
        assert!(close(harmonic_c(2), 1.0, 1e-15));
        let c5 = 2.0 * (1.0 + 0.5 + 1.0 / 3.0 + 0.25) - 8.0 / 5.0;
        assert!(close(harmonic_c(5), c5, 1e-15));
        assert!(close(harmonic_c(5), 2.5666666666666666, 1e-9));
        // strictly increasing from 2 on
        for n in 2..200 {
            assert!(harmonic_c(n + 1) > harmonic_c(n));
        }
    }

    #[test]
    fn harmonic_table_matches_direct_sums() {
        let table = HarmonicTable::up_to(500);
        for n in 1..=500 {
            assert!(close(table.get(n), harmonic_c(n), 1e-12));
        }
    }

    /// Hand-built depth-1 tree over [0, 1]: root with two singleton leaves.
    fn toy_tree() -> OneClassTree {
        let root_cell = Cell::new(vec![0.0], vec![1.0]).unwrap();
        let (lc, rc) = root_cell.split(0, 0.5).unwrap();
        let leaf = |cell: Cell| TreeNode {
            cell,
            depth: 1,
            n_inliers: 1,
            kind: NodeKind::Leaf,
        };
        OneClassTree {
            root: TreeNode {
                cell: root_cell,
                depth: 0,
                n_inliers: 2,
                kind: NodeKind::Internal {
                    split_feature: 0,
                    split_threshold: 0.5,
                    left: Box::new(leaf(lc)),
                    right: Box::new(leaf(rc)),
                },
            },
            subsample_size: 2,
            feature_subset: vec![0],
        }
    }

    fn toy_forest() -> Forest {
        Forest {
            trees: vec![toy_tree()],
            hyperparams: HyperParams::default(),
            train_dims: 1,
            kind: ModelKind::OneClassForest,
        }
    }

    #[test]
    fn path_measure_on_singleton_leaves() {
        let tree = toy_tree();
        // depth 1 plus c(1) = 0
        assert_eq!(tree_path_measure(&tree, &[0.2]).unwrap(), 1.0);
        assert_eq!(tree_path_measure(&tree, &[0.9]).unwrap(), 1.0);
        // outside the root cell the comparisons still route to a boundary leaf
        assert_eq!(tree_path_measure(&tree, &[-3.0]).unwrap(), 1.0);
        assert_eq!(tree_path_measure(&tree, &[42.0]).unwrap(), 1.0);
    }

    #[test]
    fn depth_score_hand_traversal() {
        // mean path measure 1.0 equals c(2) = 1, so the score is 2^-1 = 0.5
        let forest = toy_forest();
        let s = depth_score(&forest, &[0.25]).unwrap();
        assert!(close(s, 0.5, 1e-12));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let forest = toy_forest();
        assert!(depth_score(&forest, &[0.5, 0.5]).is_err());
        assert!(tree_path_measure(&toy_tree(), &[]).is_err());
    }

    #[test]
    fn single_leaf_tree_density() {
        // one leaf = the unit cube with 10 points: density 10
        let cell = Cell::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let tree = OneClassTree {
            root: TreeNode {
                cell,
                depth: 0,
                n_inliers: 10,
                kind: NodeKind::Leaf,
            },
            subsample_size: 10,
            feature_subset: vec![0, 1],
        };
        let forest = Forest {
            trees: vec![tree],
            hyperparams: HyperParams::default(),
            train_dims: 2,
            kind: ModelKind::OneClassForest,
        };
        assert!(close(
            stepwise_density(&forest, &[0.5, 0.5]).unwrap(),
            10.0,
            1e-12
        ));
        // a single tree makes both density scores coincide
        assert!(close(
            typical_cell_density(&forest, &[0.5, 0.5]).unwrap(),
            10.0,
            1e-12
        ));
    }

    #[test]
    fn typical_cell_density_pools_leaves() {
        // two trees with unit-volume leaves holding 2 and 4 points: 6/2 = 3
        let make = |n: usize| {
            let cell = Cell::new(vec![0.0], vec![1.0]).unwrap();
            OneClassTree {
                root: TreeNode {
                    cell,
                    depth: 0,
                    n_inliers: n,
                    kind: NodeKind::Leaf,
                },
                subsample_size: n,
                feature_subset: vec![0],
            }
        };
        let forest = Forest {
            trees: vec![make(2), make(4)],
            hyperparams: HyperParams::default(),
            train_dims: 1,
            kind: ModelKind::OneClassForest,
        };
        assert!(close(
            typical_cell_density(&forest, &[0.5]).unwrap(),
            3.0,
            1e-12
        ));
        // stepwise is the mean of per-tree densities: (2 + 4) / 2
        assert!(close(
            stepwise_density(&forest, &[0.5]).unwrap(),
            3.0,
            1e-12
        ));
    }

    #[test]
    fn stepwise_density_concentrates_on_uniform_data() {
        let data = synth::uniform_box(400, &[0.0, 0.0], &[1.0, 1.0], 21);
        let params = HyperParams {
            n_trees: 20,
            seed: 4,
            ..HyperParams::default()
        };
        let forest = train(&data, &params).unwrap();
        // densities near the middle of a uniform cloud sit near
        // n_subsample / volume(root), i.e. about 100 for the unit square
        let expected = forest.subsample_size() as f64;
        let s = stepwise_density(&forest, &[0.5, 0.5]).unwrap();
        assert!(
            s > 0.7 * expected && s < 1.3 * expected,
            "density {s} not within 30% of {expected}"
        );
    }

    #[test]
    fn depth_score_range_and_monotonicity() {
        let data = synth::novelty_2d(400, 20, 3);
        let params = HyperParams {
            n_trees: 30,
            seed: 8,
            ..HyperParams::default()
        };
        let forest = train(&data, &params).unwrap();
        for i in 0..data.n_rows() {
            let s = depth_score(&forest, data.row(i)).unwrap();
            assert!(s > 0.0 && s <= 1.0);
        }
        // strictly decreasing in the mean path measure
        let far = depth_score(&forest, &[50.0, 50.0]).unwrap();
        let center = depth_score(&forest, &[0.0, 0.0]).unwrap();
        assert!(far > center);
    }

    #[test]
    fn reordering_trees_leaves_scores_unchanged() {
        let data = synth::novelty_2d(200, 10, 5);
        let params = HyperParams {
            n_trees: 9,
            seed: 2,
            ..HyperParams::default()
        };
        let forest = train(&data, &params).unwrap();
        let mut reversed = forest.clone();
        reversed.trees.reverse();
        for i in (0..data.n_rows()).step_by(17) {
            let a = depth_score(&forest, data.row(i)).unwrap();
            let b = depth_score(&reversed, data.row(i)).unwrap();
            assert!(close(a, b, 1e-12));
        }
    }

    #[test]
    fn grid_requires_two_features() {
        let data = synth::gaussian_cloud(80, 3, 0.0, 1.0, 1);
        let params = HyperParams {
            n_trees: 3,
            seed: 1,
            ..HyperParams::default()
        };
        let forest = train(&data, &params).unwrap();
        let bounds = Cell::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(score_grid(&forest, ScoreKind::DepthScore, &bounds, 4, 4).is_err());
    }

    #[test]
    fn one_by_one_grid_is_the_center_score() {
        let data = synth::novelty_2d(150, 10, 6);
        let params = HyperParams {
            n_trees: 10,
            seed: 3,
            ..HyperParams::default()
        };
        let forest = train(&data, &params).unwrap();
        let bounds = Cell::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let grid = score_grid(&forest, ScoreKind::DepthScore, &bounds, 1, 1).unwrap();
        assert_eq!(grid.values.len(), 1);
        let direct = depth_score(&forest, &[0.0, 0.0]).unwrap();
        assert!(close(grid.values[0], direct, 1e-12));
    }

    #[test]
    fn grid_brackets_training_scores_and_flags_corners() {
        let data = synth::two_clusters_2d(300, 9);
        let params = HyperParams {
            n_trees: 30,
            seed: 11,
            ..HyperParams::default()
        };
        let forest = train(&data, &params).unwrap();
        let bounds = data_bounds(&forest).unwrap();
        let grid = score_grid(&forest, ScoreKind::DepthScore, &bounds, 24, 24).unwrap();
        let gmin = grid.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let gmax = grid
            .values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);

        // training points inside the grid score within the bracket, up to
        // grid discretization
        let scores = score_rows(
            &forest,
            (0..data.n_rows()).map(|i| data.row(i)),
            ScoreKind::DepthScore,
        )
        .unwrap();
        let smin = scores.iter().cloned().fold(f64::INFINITY, f64::min);
        let smax = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(gmin <= smin + 0.08, "grid min {gmin} vs score min {smin}");
        assert!(gmax >= smax - 0.08, "grid max {gmax} vs score max {smax}");

        // corners are more abnormal than cluster interiors
        let corner = grid.values[0];
        let mid_cluster = depth_score(&forest, &[0.0, 0.0]).unwrap();
        assert!(corner > mid_cluster);
    }

    #[test]
    fn grid_csv_format() {
        let grid = ScoreGrid {
            xs: vec![0.5],
            ys: vec![1.5],
            values: vec![0.25],
        };
        let mut out = Vec::new();
        grid.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,y,score"));
        assert_eq!(
            lines.next(),
            Some("5.00000000e-1,1.50000000e0,2.50000000e-1")
        );
    }
}
