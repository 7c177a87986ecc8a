//! Benchmark protocol: repeated random train/test splits, both AUCs, timing,
//! and report aggregation.
//!
//! Novelty detection trains on the inlier half only; outlier detection first
//! caps the anomaly rate of the whole dataset (default 10%), then trains on a
//! polluted half with labels stripped. Splits are stratified by label so test
//! prevalence stays stable across repeats.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::iforest::train_iforest;
use crate::metrics::{pr_auc, pr_curve, roc_auc, roc_curve};
use crate::params::HyperParams;
use crate::scoring::{score_rows, ScoreKind};
use crate::train::train;
use crate::tree::Forest;

/// Evaluation mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    /// Train on inliers only.
    NoveltyDetection,
    /// Train on data polluted by outliers, capped at `anomaly_cap`.
    OutlierDetection,
}

impl EvalMode {
    pub fn as_str(self) -> &'static str {
        match self {
            EvalMode::NoveltyDetection => "novelty",
            EvalMode::OutlierDetection => "outlier",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "novelty" => Ok(EvalMode::NoveltyDetection),
            "outlier" => Ok(EvalMode::OutlierDetection),
            other => Err(Error::InvalidInput(format!(
                "unknown mode '{other}' (expected novelty or outlier)"
            ))),
        }
    }
}

/// Protocol parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Protocol {
    pub mode: EvalMode,
    /// Fraction of rows held out for testing, in (0, 1).
    pub test_fraction: f64,
    /// Maximum anomaly rate before splitting (outlier detection only).
    pub anomaly_cap: f64,
    pub n_repeats: usize,
    pub base_seed: u64,
    /// Training budget per repeat, in seconds; a repeat exceeding it marks
    /// the report NA.
    pub timeout_seconds: f64,
}

impl Default for Protocol {
    fn default() -> Self {
        Self {
            mode: EvalMode::NoveltyDetection,
            test_fraction: 0.5,
            anomaly_cap: 0.10,
            n_repeats: 10,
            base_seed: 0,
            timeout_seconds: 1800.0,
        }
    }
}

impl Protocol {
    pub fn validate(&self) -> Result<()> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::InvalidInput(
                "test_fraction must be in (0, 1)".into(),
            ));
        }
        if !(self.anomaly_cap > 0.0 && self.anomaly_cap < 1.0) {
            return Err(Error::InvalidInput("anomaly_cap must be in (0, 1)".into()));
        }
        if self.n_repeats == 0 {
            return Err(Error::InvalidInput("n_repeats must be positive".into()));
        }
        Ok(())
    }
}

/// Which model the harness trains.
#[derive(Debug, Clone)]
pub enum ModelConfig {
    OneClassForest(HyperParams),
    IsolationForest { n_trees: usize, max_samples: usize },
}

impl ModelConfig {
    pub fn algorithm_name(&self) -> &'static str {
        match self {
            ModelConfig::OneClassForest(_) => "ocrf",
            ModelConfig::IsolationForest { .. } => "iforest",
        }
    }

    fn train_with_seed(&self, data: &Dataset, seed: u64) -> Result<Forest> {
        match self {
            ModelConfig::OneClassForest(hp) => {
                let params = HyperParams { seed, ..hp.clone() };
                train(data, &params)
            }
            ModelConfig::IsolationForest {
                n_trees,
                max_samples,
            } => train_iforest(data, *n_trees, *max_samples, seed),
        }
    }
}

/// One train/score repetition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepeatRecord {
    pub repeat: usize,
    pub seed: u64,
    pub roc_auc: f64,
    pub pr_auc: f64,
    pub train_seconds: f64,
    pub test_seconds: f64,
    pub timed_out: bool,
}

/// Aggregates over repeats. AUC fields are `None` ("NA") when any repeat
/// exceeded the training budget.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Aggregate {
    pub roc_auc_mean: Option<f64>,
    pub roc_auc_std: Option<f64>,
    pub pr_auc_mean: Option<f64>,
    pub pr_auc_std: Option<f64>,
    pub train_seconds_mean: f64,
    pub test_seconds_mean: f64,
}

/// Full evaluation report; serializes to the JSON document the CLI writes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset: String,
    pub algorithm: String,
    pub score: String,
    pub mode: String,
    pub test_fraction: f64,
    pub anomaly_cap: f64,
    pub n_repeats: usize,
    pub base_seed: u64,
    pub repeats: Vec<RepeatRecord>,
    pub aggregate: Aggregate,
    /// ROC curve `(fpr, tpr)` of the first repeat.
    pub roc_curve: Vec<(f64, f64)>,
    /// Precision-recall curve `(recall, precision)` of the first repeat.
    pub pr_curve: Vec<(f64, f64)>,
}

impl EvalReport {
    /// Sets all wall-clock fields to zero; reports then compare bytewise
    /// across runs with identical inputs.
    pub fn zero_timings(&mut self) {
        for r in &mut self.repeats {
            r.train_seconds = 0.0;
            r.test_seconds = 0.0;
        }
        self.aggregate.train_seconds_mean = 0.0;
        self.aggregate.test_seconds_mean = 0.0;
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Eval(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Eval(e.to_string()))
    }

    /// One aggregate CSV row (with header), mirroring the benchmark table
    /// layout of one ROC and one PR column per algorithm; "NA" for capped runs.
    pub fn aggregate_csv(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or("NA".to_string(), |x| format!("{x:.6}"));
        let mut out = String::from(
            "dataset,algorithm,score,mode,repeats,roc_auc_mean,roc_auc_std,pr_auc_mean,pr_auc_std,train_seconds_mean,test_seconds_mean\n",
        );
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{:.6},{:.6}\n",
            self.dataset,
            self.algorithm,
            self.score,
            self.mode,
            self.n_repeats,
            fmt(self.aggregate.roc_auc_mean),
            fmt(self.aggregate.roc_auc_std),
            fmt(self.aggregate.pr_auc_mean),
            fmt(self.aggregate.pr_auc_std),
            self.aggregate.train_seconds_mean,
            self.aggregate.test_seconds_mean,
        ));
        out
    }
}

type CurvePoints = Vec<(f64, f64)>;

/// Splits prepared for one repeat: rows to train on (labels dropped later)
/// and labeled rows to score.
struct RepeatSplit {
    train_rows: Vec<usize>,
    test_rows: Vec<usize>,
}

/// Stratified split with the outlier cap applied first in outlier mode.
fn split_for_repeat(
    labels: &[u8],
    protocol: &Protocol,
    rng: &mut ChaCha8Rng,
) -> Result<RepeatSplit> {
    let mut inliers: Vec<usize> = Vec::new();
    let mut outliers: Vec<usize> = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        if l == 1 {
            outliers.push(i);
        } else {
            inliers.push(i);
        }
    }
    if outliers.is_empty() {
        return Err(Error::Eval("dataset contains no outliers".into()));
    }
    if inliers.is_empty() {
        return Err(Error::Eval("dataset contains no inliers".into()));
    }

    inliers.shuffle(rng);
    outliers.shuffle(rng);

    if protocol.mode == EvalMode::OutlierDetection {
        // cap the anomaly rate before splitting: keep k outliers so that
        // k / (n_inliers + k) <= anomaly_cap
        let cap = protocol.anomaly_cap;
        let max_outliers = ((cap * inliers.len() as f64) / (1.0 - cap)).floor() as usize;
        outliers.truncate(outliers.len().min(max_outliers.max(1)));
    }

    let take_test = |v: &[usize]| -> usize {
        ((protocol.test_fraction * v.len() as f64).ceil() as usize).min(v.len())
    };
    let n_test_in = take_test(&inliers);
    let n_test_out = take_test(&outliers);

    let mut test_rows: Vec<usize> = Vec::new();
    test_rows.extend_from_slice(&inliers[..n_test_in]);
    test_rows.extend_from_slice(&outliers[..n_test_out]);

    let mut train_rows: Vec<usize> = inliers[n_test_in..].to_vec();
    match protocol.mode {
        EvalMode::NoveltyDetection => {
            // outliers never enter the training half
        }
        EvalMode::OutlierDetection => {
            let mut train_out: Vec<usize> = outliers[n_test_out..].to_vec();
            // ceil on the test side keeps the training rate at or below the
            // cap; drop extras if rounding ever pushes past it
            let n_in = train_rows.len() as f64;
            while !train_out.is_empty()
                && train_out.len() as f64 / (n_in + train_out.len() as f64) > protocol.anomaly_cap
            {
                train_out.pop();
            }
            train_rows.extend(train_out);
        }
    }
    if train_rows.len() < 2 {
        return Err(Error::Eval("training half has fewer than 2 rows".into()));
    }
    Ok(RepeatSplit {
        train_rows,
        test_rows,
    })
}

/// Runs the full protocol: per repeat `r`, seed `base_seed + r`, split, train
/// on the training half with labels stripped, score the test half, record
/// both AUCs and wall-clock timings, then aggregate.
pub fn run_protocol(
    dataset: &Dataset,
    dataset_name: &str,
    model: &ModelConfig,
    score_kind: ScoreKind,
    protocol: &Protocol,
) -> Result<EvalReport> {
    protocol.validate()?;
    let labels = dataset
        .labels()
        .ok_or_else(|| Error::Eval("evaluation requires a labeled dataset".into()))?;

    let mut repeats = Vec::with_capacity(protocol.n_repeats);
    let mut first_curves: Option<(CurvePoints, CurvePoints)> = None;

    for r in 0..protocol.n_repeats {
        let seed = protocol.base_seed.wrapping_add(r as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let split = split_for_repeat(labels, protocol, &mut rng)?;

        let train_data = dataset.select_rows(&split.train_rows).without_labels();
        let test_data = dataset.select_rows(&split.test_rows);
        let test_labels = test_data
            .labels()
            .expect("labels survive row selection")
            .to_vec();

        let t0 = Instant::now();
        let forest = model.train_with_seed(&train_data, seed)?;
        let train_seconds = t0.elapsed().as_secs_f64();

        let t1 = Instant::now();
        let raw = score_rows(
            &forest,
            (0..test_data.n_rows()).map(|i| test_data.row(i)),
            score_kind,
        )?;
        let test_seconds = t1.elapsed().as_secs_f64();

        // uniform abnormality orientation for the metrics
        let scores: Vec<f64> = if score_kind.higher_is_more_abnormal() {
            raw
        } else {
            raw.into_iter().map(|s| -s).collect()
        };

        let roc = roc_auc(&scores, &test_labels)?;
        let pr = pr_auc(&scores, &test_labels)?;
        if first_curves.is_none() {
            first_curves = Some((
                roc_curve(&scores, &test_labels)?,
                pr_curve(&scores, &test_labels)?,
            ));
        }
        repeats.push(RepeatRecord {
            repeat: r,
            seed,
            roc_auc: roc,
            pr_auc: pr,
            train_seconds,
            test_seconds,
            timed_out: train_seconds > protocol.timeout_seconds,
        });
    }

    let timed_out = repeats.iter().any(|r| r.timed_out);
    let mean = |f: &dyn Fn(&RepeatRecord) -> f64| -> f64 {
        repeats.iter().map(f).sum::<f64>() / repeats.len() as f64
    };
    let std = |f: &dyn Fn(&RepeatRecord) -> f64, m: f64| -> f64 {
        if repeats.len() < 2 {
            0.0
        } else {
            let ss: f64 = repeats.iter().map(|r| (f(r) - m).powi(2)).sum();
            (ss / (repeats.len() - 1) as f64).sqrt()
        }
    };
    let roc_mean = mean(&|r| r.roc_auc);
    let pr_mean = mean(&|r| r.pr_auc);
    let aggregate = Aggregate {
        roc_auc_mean: (!timed_out).then_some(roc_mean),
        roc_auc_std: (!timed_out).then_some(std(&|r| r.roc_auc, roc_mean)),
        pr_auc_mean: (!timed_out).then_some(pr_mean),
        pr_auc_std: (!timed_out).then_some(std(&|r| r.pr_auc, pr_mean)),
        train_seconds_mean: mean(&|r| r.train_seconds),
        test_seconds_mean: mean(&|r| r.test_seconds),
    };
    let (roc_pts, pr_pts) = first_curves.expect("at least one repeat ran");

    Ok(EvalReport {
        dataset: dataset_name.to_string(),
        algorithm: model.algorithm_name().to_string(),
        score: score_kind.as_str().to_string(),
        mode: protocol.mode.as_str().to_string(),
        test_fraction: protocol.test_fraction,
        anomaly_cap: protocol.anomaly_cap,
        n_repeats: protocol.n_repeats,
        base_seed: protocol.base_seed,
        repeats,
        aggregate,
        roc_curve: roc_pts,
        pr_curve: pr_pts,
    })
}

/// Curve points as a two-column CSV with the given header.
pub fn curve_csv(points: &[(f64, f64)], header: &str) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for (a, b) in points {
        out.push_str(&format!("{a:.9},{b:.9}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn quick_model(n_trees: usize) -> ModelConfig {
        ModelConfig::OneClassForest(HyperParams {
            n_trees,
            ..HyperParams::default()
        })
    }

    #[test]
    fn requires_labels_and_outliers() {
        let unlabeled = synth::gaussian_cloud(50, 2, 0.0, 1.0, 1);
        let p = Protocol::default();
        assert!(run_protocol(&unlabeled, "x", &quick_model(2), ScoreKind::DepthScore, &p).is_err());

        let all_inliers =
            Dataset::from_rows(&[vec![0.0], vec![1.0], vec![2.0]], Some(vec![0, 0, 0])).unwrap();
        assert!(run_protocol(
            &all_inliers,
            "x",
            &quick_model(2),
            ScoreKind::DepthScore,
            &p
        )
        .is_err());
    }

    #[test]
    fn separable_data_scores_high() {
        let data = synth::novelty_2d(400, 40, 7);
        let p = Protocol {
            n_repeats: 3,
            base_seed: 1,
            ..Protocol::default()
        };
        let report = run_protocol(
            &data,
            "synthetic",
            &quick_model(30),
            ScoreKind::DepthScore,
            &p,
        )
        .unwrap();
        let roc = report.aggregate.roc_auc_mean.unwrap();
        assert!(roc >= 0.95, "roc {roc} too low for separable data");
        assert_eq!(report.repeats.len(), 3);
        for r in &report.repeats {
            assert!(r.roc_auc >= 0.0 && r.roc_auc <= 1.0);
            assert!(r.pr_auc >= 0.0 && r.pr_auc <= 1.0);
        }
    }

    #[test]
    fn negated_scores_flip_roc() {
        // scoring kinds that orient the other way must come out equivalent
        // once the harness negates; compare depth against stepwise density on
        // the same strongly separable data
        let data = synth::novelty_2d(300, 30, 9);
        let p = Protocol {
            n_repeats: 2,
            ..Protocol::default()
        };
        let depth = run_protocol(&data, "d", &quick_model(20), ScoreKind::DepthScore, &p).unwrap();
        let dens =
            run_protocol(&data, "d", &quick_model(20), ScoreKind::StepwiseDensity, &p).unwrap();
        assert!(depth.aggregate.roc_auc_mean.unwrap() > 0.9);
        assert!(dens.aggregate.roc_auc_mean.unwrap() > 0.9);
    }

    #[test]
    fn single_repeat_has_zero_std() {
        let data = synth::novelty_2d(100, 10, 2);
        let p = Protocol {
            n_repeats: 1,
            ..Protocol::default()
        };
        let report = run_protocol(&data, "s", &quick_model(5), ScoreKind::DepthScore, &p).unwrap();
        assert_eq!(report.aggregate.roc_auc_std, Some(0.0));
        assert_eq!(report.aggregate.pr_auc_std, Some(0.0));
    }

    #[test]
    fn outlier_mode_honors_anomaly_cap() {
        // 35% outliers in the raw data; the cap must bring every training
        // half to at most 10%
        let data = synth::novelty_2d(260, 140, 4);
        let p = Protocol {
            mode: EvalMode::OutlierDetection,
            n_repeats: 5,
            ..Protocol::default()
        };
        let labels = data.labels().unwrap();
        for r in 0..p.n_repeats {
            let mut rng = ChaCha8Rng::seed_from_u64(p.base_seed + r as u64);
            let split = split_for_repeat(labels, &p, &mut rng).unwrap();
            let n_out = split.train_rows.iter().filter(|&&i| labels[i] == 1).count();
            let rate = n_out as f64 / split.train_rows.len() as f64;
            assert!(
                rate <= p.anomaly_cap + 1e-12,
                "repeat {r}: training rate {rate}"
            );
            assert!(
                n_out > 0,
                "polluted training half should retain some outliers"
            );
        }
    }

    #[test]
    fn novelty_mode_trains_on_inliers_only() {
        let data = synth::novelty_2d(80, 40, 3);
        let labels = data.labels().unwrap();
        let p = Protocol::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let split = split_for_repeat(labels, &p, &mut rng).unwrap();
        assert!(split.train_rows.iter().all(|&i| labels[i] == 0));
        // the test half keeps both classes
        assert!(split.test_rows.iter().any(|&i| labels[i] == 1));
        assert!(split.test_rows.iter().any(|&i| labels[i] == 0));
    }

    #[test]
    fn aggregation_matches_recorded_repeats() {
        let data = synth::novelty_2d(150, 15, 6);
        let p = Protocol {
            n_repeats: 4,
            ..Protocol::default()
        };
        let report =
            run_protocol(&data, "agg", &quick_model(8), ScoreKind::DepthScore, &p).unwrap();
        let mean: f64 =
            report.repeats.iter().map(|r| r.roc_auc).sum::<f64>() / report.repeats.len() as f64;
        assert!((report.aggregate.roc_auc_mean.unwrap() - mean).abs() <= 1e-12);
    }

    #[test]
    fn reports_are_deterministic_after_timing_mask() {
        let data = synth::novelty_2d(120, 12, 8);
        let p = Protocol {
            n_repeats: 2,
            base_seed: 3,
            ..Protocol::default()
        };
        let mut a = run_protocol(&data, "det", &quick_model(6), ScoreKind::DepthScore, &p).unwrap();
        let mut b = run_protocol(&data, "det", &quick_model(6), ScoreKind::DepthScore, &p).unwrap();
        a.zero_timings();
        b.zero_timings();
        assert_eq!(
            a.to_json().unwrap().into_bytes(),
            b.to_json().unwrap().into_bytes()
        );
    }

    #[test]
    fn timeout_marks_aggregate_na() {
        let data = synth::novelty_2d(100, 10, 5);
        let p = Protocol {
            n_repeats: 1,
            timeout_seconds: 0.0,
            ..Protocol::default()
        };
        let report = run_protocol(&data, "na", &quick_model(5), ScoreKind::DepthScore, &p).unwrap();
        assert!(report.repeats[0].timed_out);
        assert_eq!(report.aggregate.roc_auc_mean, None);
        assert!(report.aggregate_csv().contains("NA"));
    }
}
