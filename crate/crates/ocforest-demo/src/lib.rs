//! Browser demo: train a small one-class forest on synthetic 2-D data and
//! render level sets of its scoring function. Compiled to WebAssembly with
//! `wasm-pack build --target web`; the page in `www/` drives three
//! operations: generate data, train, and evaluate the score grid.
//!
//! The logic lives in plain methods returning `Result<_, String>` so it runs
//! (and is tested) natively; the `#[wasm_bindgen]` surface just converts
//! errors to `JsValue`.

use wasm_bindgen::prelude::*;

use ocforest::{
    score_grid, score_rows, synth, train, train_iforest, Cell, Criterion, Dataset, Forest,
    HyperParams, ScoreKind,
};

fn parse_kind(score: &str) -> Result<ScoreKind, String> {
    ScoreKind::parse(score).map_err(|e| e.to_string())
}

/// Whether larger values of the given score mean "more abnormal"; the page
/// uses this to orient the color map.
#[wasm_bindgen]
pub fn score_orientation(score: &str) -> Result<bool, JsValue> {
    orientation(score).map_err(|e| JsValue::from_str(&e))
}

fn orientation(score: &str) -> Result<bool, String> {
    Ok(parse_kind(score)?.higher_is_more_abnormal())
}

#[wasm_bindgen]
pub struct LevelSetDemo {
    data: Option<Dataset>,
    forest: Option<Forest>,
}

impl Default for LevelSetDemo {
    fn default() -> Self {
        Self::new()
    }
}

#[wasm_bindgen]
impl LevelSetDemo {
    #[wasm_bindgen(constructor)]
    pub fn new() -> LevelSetDemo {
        LevelSetDemo {
            data: None,
            forest: None,
        }
    }

    /// Generates a 2-D dataset (`blobs`, `ring` or `cloud`) and returns the
    /// points as a flat `[x0, y0, x1, y1, ...]` array for plotting.
    /// Any previously trained forest is dropped.
    pub fn generate(&mut self, shape: &str, n: usize, seed: u32) -> Result<Vec<f64>, JsValue> {
        self.generate_impl(shape, n, seed)
            .map_err(|e| JsValue::from_str(&e))
    }

    /// Trains on the generated data. `algo` is `ocrf` or `iforest`;
    /// `criterion` and `gamma` apply to `ocrf` only.
    pub fn train(
        &mut self,
        algo: &str,
        criterion: &str,
        gamma: f64,
        n_trees: usize,
        seed: u32,
    ) -> Result<(), JsValue> {
        self.train_impl(algo, criterion, gamma, n_trees, seed)
            .map_err(|e| JsValue::from_str(&e))
    }

    /// Plot window `[xmin, ymin, xmax, ymax]`: the data's bounding box grown
    /// by `margin` on each side (as a fraction of the box size).
    pub fn bounds(&self, margin: f64) -> Result<Vec<f64>, JsValue> {
        self.bounds_impl(margin).map_err(|e| JsValue::from_str(&e))
    }

    /// Scores the centers of an `nx x ny` grid over [`Self::bounds`],
    /// row-major from the bottom row up.
    pub fn grid(
        &self,
        score: &str,
        nx: usize,
        ny: usize,
        margin: f64,
    ) -> Result<Vec<f64>, JsValue> {
        self.grid_impl(score, nx, ny, margin)
            .map_err(|e| JsValue::from_str(&e))
    }

    /// Score of every generated point, in generation order.
    pub fn point_scores(&self, score: &str) -> Result<Vec<f64>, JsValue> {
        self.point_scores_impl(score)
            .map_err(|e| JsValue::from_str(&e))
    }
}

impl LevelSetDemo {
    fn generate_impl(&mut self, shape: &str, n: usize, seed: u32) -> Result<Vec<f64>, String> {
        if n < 2 {
            return Err("need at least 2 points".into());
        }
        let seed = seed as u64;
        let data = match shape {
            "blobs" => synth::two_clusters_2d(n, seed),
            "ring" => synth::ring_2d(n, 3.0, 0.35, seed),
            "cloud" => synth::gaussian_cloud(n, 2, 0.0, 1.0, seed),
            other => return Err(format!("unknown shape '{other}'")),
        };
        let mut flat = Vec::with_capacity(2 * data.n_rows());
        for i in 0..data.n_rows() {
            flat.extend_from_slice(data.row(i));
        }
        self.data = Some(data);
        self.forest = None;
        Ok(flat)
    }

    fn train_impl(
        &mut self,
        algo: &str,
        criterion: &str,
        gamma: f64,
        n_trees: usize,
        seed: u32,
    ) -> Result<(), String> {
        let data = self.data.as_ref().ok_or("generate a dataset first")?;
        let forest = match algo {
            "ocrf" => {
                let params = HyperParams {
                    criterion: Criterion::parse(criterion).map_err(|e| e.to_string())?,
                    gamma,
                    n_trees,
                    seed: seed as u64,
                    ..HyperParams::default()
                };
                train(data, &params).map_err(|e| e.to_string())?
            }
            "iforest" => {
                train_iforest(data, n_trees, 256, seed as u64).map_err(|e| e.to_string())?
            }
            other => return Err(format!("unknown algorithm '{other}'")),
        };
        self.forest = Some(forest);
        Ok(())
    }

    fn bounds_impl(&self, margin: f64) -> Result<Vec<f64>, String> {
        let cell = self.window(margin)?;
        Ok(vec![
            cell.lower()[0],
            cell.lower()[1],
            cell.upper()[0],
            cell.upper()[1],
        ])
    }

    fn grid_impl(
        &self,
        score: &str,
        nx: usize,
        ny: usize,
        margin: f64,
    ) -> Result<Vec<f64>, String> {
        let forest = self.forest.as_ref().ok_or("train a model first")?;
        let kind = parse_kind(score)?;
        let window = self.window(margin)?;
        let grid = score_grid(forest, kind, &window, nx, ny).map_err(|e| e.to_string())?;
        Ok(grid.values)
    }

    fn point_scores_impl(&self, score: &str) -> Result<Vec<f64>, String> {
        let forest = self.forest.as_ref().ok_or("train a model first")?;
        let data = self.data.as_ref().ok_or("generate a dataset first")?;
        let kind = parse_kind(score)?;
        score_rows(forest, (0..data.n_rows()).map(|i| data.row(i)), kind).map_err(|e| e.to_string())
    }

    fn window(&self, margin: f64) -> Result<Cell, String> {
        let data = self.data.as_ref().ok_or("generate a dataset first")?;
        let bbox =
            Cell::bounding((0..data.n_rows()).map(|i| data.row(i))).ok_or("dataset is empty")?;
        let (w, h) = (bbox.width(0).max(1e-9), bbox.width(1).max(1e-9));
        Cell::new(
            vec![bbox.lower()[0] - margin * w, bbox.lower()[1] - margin * h],
            vec![bbox.upper()[0] + margin * w, bbox.upper()[1] + margin * h],
        )
        .map_err(|e| e.to_string())
    }
}
