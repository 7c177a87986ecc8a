//! Command-line surface: `train`, `score`, `eval`, `grid`, `importances`.
//!
//! Flag values override keys from an optional `--config` TOML file, which in
//! turn override the built-in defaults, so a benchmark reproduces with
//! nothing but data paths on the command line.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use ocforest::{
    curve_csv, load_csv, load_model, run_protocol, save_model, scores_csv, train, train_iforest,
    variable_importance, Cell, Criterion, Dataset, DatasetSpec, EvalMode, Forest, HyperParams,
    ModelConfig, ModelKind, Protocol, ScoreKind,
};

#[derive(Parser)]
#[command(
    name = "ocforest",
    about = "One-class random forests: train, score, benchmark, export level-set grids",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and write it to a binary model file
    Train(TrainArgs),
    /// Score every row of a CSV with a trained model
    Score(ScoreArgs),
    /// Run the repeated train/test evaluation protocol
    Eval(EvalArgs),
    /// Export a 2-D level-set grid of the scoring function
    Grid(GridArgs),
    /// Export per-feature importances of a trained model
    Importances(ImportancesArgs),
}

#[derive(Args, Clone)]
struct DataArgs {
    /// CSV file with a header row
    #[arg(long)]
    data: Option<PathBuf>,
    /// Dataset spec file (TOML) describing labels and column drops
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Column holding class labels (overrides the spec file)
    #[arg(long)]
    label_column: Option<String>,
    /// Comma-separated label values mapped to 1 = outlier
    #[arg(long, value_delimiter = ',')]
    anomaly_values: Option<Vec<String>>,
}

#[derive(Args, Clone)]
struct ModelFlags {
    /// Algorithm to train
    #[arg(long, value_parser = ["ocrf", "iforest"])]
    algo: Option<String>,
    /// Splitting criterion for ocrf
    #[arg(long, value_parser = ["oc-gini", "oc-shannon", "naive"])]
    criterion: Option<String>,
    /// Expected outlier-to-inlier ratio per node
    #[arg(long)]
    gamma: Option<f64>,
    /// Number of trees
    #[arg(long)]
    n_trees: Option<usize>,
    /// Depth cap; defaults to ceil(log2(subsample size))
    #[arg(long)]
    max_depth: Option<usize>,
    /// Row fraction per tree, in (0, 1]
    #[arg(long)]
    max_samples: Option<f64>,
    /// Feature fraction per tree, in (0, 1]
    #[arg(long)]
    max_features_tree: Option<f64>,
    /// Features considered per node
    #[arg(long)]
    max_features_node: Option<usize>,
    /// Outlier budget of the naive criterion
    #[arg(long)]
    naive_alpha_n: Option<f64>,
    /// Master random seed
    #[arg(long)]
    seed: Option<u64>,
    /// Config file (TOML) with hyperparams/protocol defaults
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelFlags,
    /// Output model file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ScoreArgs {
    /// Trained model file
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    /// Scoring function
    #[arg(long, value_parser = ["depth", "stepwise-density", "typical-cell"])]
    score: Option<String>,
    /// Output scores CSV
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelFlags,
    /// Scoring function
    #[arg(long, value_parser = ["depth", "stepwise-density", "typical-cell"])]
    score: Option<String>,
    /// Evaluation mode
    #[arg(long, value_parser = ["novelty", "outlier"])]
    mode: Option<String>,
    /// Number of repetitions
    #[arg(long)]
    repeats: Option<usize>,
    /// Test fraction, in (0, 1)
    #[arg(long)]
    test_fraction: Option<f64>,
    /// Anomaly-rate cap for outlier mode
    #[arg(long)]
    anomaly_cap: Option<f64>,
    /// Per-repeat training budget; exceeding it marks the report NA
    #[arg(long)]
    timeout_seconds: Option<f64>,
    /// Report JSON path; aggregate CSV and curve CSVs are written next to it
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GridArgs {
    /// Trained model file (2 features)
    #[arg(long)]
    model: PathBuf,
    /// Scoring function
    #[arg(long, value_parser = ["depth", "stepwise-density", "typical-cell"])]
    score: Option<String>,
    #[arg(long)]
    xmin: Option<f64>,
    #[arg(long)]
    xmax: Option<f64>,
    #[arg(long)]
    ymin: Option<f64>,
    #[arg(long)]
    ymax: Option<f64>,
    /// Grid resolution as NXxNY
    #[arg(long, default_value = "100x100")]
    resolution: String,
    /// Output grid CSV
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ImportancesArgs {
    /// Trained model file (ocrf with the oc-gini criterion)
    #[arg(long)]
    model: PathBuf,
    /// Output importances CSV
    #[arg(long)]
    out: PathBuf,
}

// ---------------------------------------------------------------------------
// Config files
// ---------------------------------------------------------------------------

#[derive(Debug, Default, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    hyperparams: HyperParamsConfig,
    #[serde(default)]
    protocol: ProtocolConfig,
    #[serde(default)]
    iforest: IForestConfig,
}

#[derive(Debug, Default, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct HyperParamsConfig {
    criterion: Option<String>,
    gamma: Option<f64>,
    n_trees: Option<usize>,
    max_depth: Option<usize>,
    max_samples_fraction: Option<f64>,
    max_samples_floor: Option<usize>,
    max_features_tree_fraction: Option<f64>,
    max_features_tree_floor: Option<usize>,
    max_features_node: Option<usize>,
    naive_alpha_n: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Default, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct ProtocolConfig {
    mode: Option<String>,
    test_fraction: Option<f64>,
    anomaly_cap: Option<f64>,
    repeats: Option<usize>,
    base_seed: Option<u64>,
    timeout_seconds: Option<f64>,
}

#[derive(Debug, Default, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct IForestConfig {
    n_trees: Option<usize>,
    max_samples: Option<usize>,
}

#[derive(Debug, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    path: Option<PathBuf>,
    label_column: Option<String>,
    anomaly_values: Option<Vec<String>>,
    inlier_values: Option<Vec<String>>,
    #[serde(default)]
    drop_label_values: Vec<String>,
    #[serde(default)]
    drop_columns: Vec<String>,
}

fn read_config(path: Option<&Path>) -> Result<ConfigFile> {
    match path {
        None => Ok(ConfigFile::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("cannot read config file {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("invalid config file {}", p.display()))
        }
    }
}

/// Resolves the dataset: the spec file supplies the recipe; `--data`,
/// `--label-column` and `--anomaly-values` override it. Paths inside spec
/// files are relative to the spec file's directory. When `need_labels` is
/// set and nothing names a label column, a column called `class` or `label`
/// is used if the header has one.
fn resolve_dataset(args: &DataArgs, need_labels: bool) -> Result<(Dataset, String)> {
    let mut spec = DatasetSpec::default();
    if let Some(spec_path) = &args.spec {
        let text = fs::read_to_string(spec_path)
            .with_context(|| format!("cannot read spec file {}", spec_path.display()))?;
        let parsed: SpecFile = toml::from_str(&text)
            .with_context(|| format!("invalid spec file {}", spec_path.display()))?;
        let base = spec_path.parent().unwrap_or(Path::new("."));
        spec.path = match parsed.path {
            Some(p) if p.is_relative() => base.join(p),
            Some(p) => p,
            None => PathBuf::new(),
        };
        spec.label_column = parsed.label_column;
        spec.anomaly_values = parsed.anomaly_values.map(|v| v.into_iter().collect());
        spec.inlier_values = parsed.inlier_values.map(|v| v.into_iter().collect());
        spec.drop_label_values = parsed.drop_label_values.into_iter().collect();
        spec.drop_columns = parsed.drop_columns;
    }
    if let Some(data) = &args.data {
        spec.path = data.clone();
    }
    if let Some(col) = &args.label_column {
        spec.label_column = Some(col.clone());
    }
    if let Some(values) = &args.anomaly_values {
        spec.anomaly_values = Some(values.iter().cloned().collect());
    }
    if spec.path.as_os_str().is_empty() {
        bail!("no dataset given: pass --data <csv> or a --spec file with a path");
    }
    if need_labels && spec.label_column.is_none() {
        spec.label_column = sniff_label_column(&spec.path)?;
        if spec.label_column.is_none() {
            bail!("evaluation needs labels: name the column with --label-column or a --spec file");
        }
    }
    let name = spec
        .path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    let dataset = load_csv(&spec)?;
    Ok((dataset, name))
}

fn sniff_label_column(path: &Path) -> Result<Option<String>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)?;
    let headers = reader.headers()?;
    Ok(headers
        .iter()
        .find(|h| h.eq_ignore_ascii_case("class") || h.eq_ignore_ascii_case("label"))
        .map(|h| h.to_string()))
}

fn build_hyperparams(flags: &ModelFlags, cfg: &HyperParamsConfig) -> Result<HyperParams> {
    let mut hp = HyperParams::default();
    if let Some(c) = &cfg.criterion {
        hp.criterion = Criterion::parse(c)?;
    }
    if let Some(v) = cfg.gamma {
        hp.gamma = v;
    }
    if let Some(v) = cfg.n_trees {
        hp.n_trees = v;
    }
    if cfg.max_depth.is_some() {
        hp.max_depth = cfg.max_depth;
    }
    if let Some(v) = cfg.max_samples_fraction {
        hp.max_samples_fraction = v;
    }
    if let Some(v) = cfg.max_samples_floor {
        hp.max_samples_floor = v;
    }
    if let Some(v) = cfg.max_features_tree_fraction {
        hp.max_features_tree_fraction = v;
    }
    if let Some(v) = cfg.max_features_tree_floor {
        hp.max_features_tree_floor = v;
    }
    if let Some(v) = cfg.max_features_node {
        hp.max_features_node = v;
    }
    if let Some(v) = cfg.naive_alpha_n {
        hp.naive_alpha_n = v;
    }
    if let Some(v) = cfg.seed {
        hp.seed = v;
    }

    if let Some(c) = &flags.criterion {
        hp.criterion = Criterion::parse(c)?;
    }
    if let Some(v) = flags.gamma {
        hp.gamma = v;
    }
    if let Some(v) = flags.n_trees {
        hp.n_trees = v;
    }
    if flags.max_depth.is_some() {
        hp.max_depth = flags.max_depth;
    }
    if let Some(v) = flags.max_samples {
        hp.max_samples_fraction = v;
    }
    if let Some(v) = flags.max_features_tree {
        hp.max_features_tree_fraction = v;
    }
    if let Some(v) = flags.max_features_node {
        hp.max_features_node = v;
    }
    if let Some(v) = flags.naive_alpha_n {
        hp.naive_alpha_n = v;
    }
    if let Some(v) = flags.seed {
        hp.seed = v;
    }
    Ok(hp)
}

fn build_model_config(flags: &ModelFlags, cfg: &ConfigFile) -> Result<ModelConfig> {
    let algo = flags.algo.as_deref().unwrap_or("ocrf");
    match algo {
        "ocrf" => Ok(ModelConfig::OneClassForest(build_hyperparams(
            flags,
            &cfg.hyperparams,
        )?)),
        "iforest" => {
            let n_trees = flags.n_trees.or(cfg.iforest.n_trees).unwrap_or(100);
            let max_samples = cfg.iforest.max_samples.unwrap_or(256);
            Ok(ModelConfig::IsolationForest {
                n_trees,
                max_samples,
            })
        }
        other => bail!("unknown algorithm '{other}'"),
    }
}

fn build_protocol(args: &EvalArgs, cfg: &ProtocolConfig) -> Result<Protocol> {
    let mut p = Protocol::default();
    if let Some(m) = &cfg.mode {
        p.mode = EvalMode::parse(m)?;
    }
    if let Some(v) = cfg.test_fraction {
        p.test_fraction = v;
    }
    if let Some(v) = cfg.anomaly_cap {
        p.anomaly_cap = v;
    }
    if let Some(v) = cfg.repeats {
        p.n_repeats = v;
    }
    if let Some(v) = cfg.base_seed {
        p.base_seed = v;
    }
    if let Some(v) = cfg.timeout_seconds {
        p.timeout_seconds = v;
    }

    if let Some(m) = &args.mode {
        p.mode = EvalMode::parse(m)?;
    }
    if let Some(v) = args.test_fraction {
        p.test_fraction = v;
    }
    if let Some(v) = args.anomaly_cap {
        p.anomaly_cap = v;
    }
    if let Some(v) = args.repeats {
        p.n_repeats = v;
    }
    if let Some(v) = args.model.seed {
        p.base_seed = v;
    }
    if let Some(v) = args.timeout_seconds {
        p.timeout_seconds = v;
    }
    Ok(p)
}

fn parse_score(flag: Option<&str>) -> Result<ScoreKind> {
    Ok(ScoreKind::parse(flag.unwrap_or("depth"))?)
}

fn parse_resolution(s: &str) -> Result<(usize, usize)> {
    let (nx, ny) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| anyhow!("resolution must look like 120x80, got '{s}'"))?;
    Ok((
        nx.parse().context("bad grid width")?,
        ny.parse().context("bad grid height")?,
    ))
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let cfg = read_config(args.model.config.as_deref())?;
    let (dataset, name) = resolve_dataset(&args.data, false)?;
    let model = build_model_config(&args.model, &cfg)?;
    let forest = match &model {
        ModelConfig::OneClassForest(hp) => train(&dataset, hp)?,
        ModelConfig::IsolationForest {
            n_trees,
            max_samples,
        } => {
            let seed = args.model.seed.or(cfg.hyperparams.seed).unwrap_or(0);
            train_iforest(&dataset, *n_trees, *max_samples, seed)?
        }
    };
    save_model(&forest, &args.out)?;
    println!(
        "trained {} on {name}: {} trees, {} rows/tree, d={} -> {}",
        forest.kind.as_str(),
        forest.n_trees(),
        forest.subsample_size(),
        forest.train_dims,
        args.out.display()
    );
    Ok(())
}

fn cmd_score(args: &ScoreArgs) -> Result<()> {
    let forest = load_model(&args.model)?;
    let (dataset, _) = resolve_dataset(&args.data, false)?;
    if dataset.n_cols() != forest.train_dims {
        bail!(
            "dataset has {} features but the model was trained on {}",
            dataset.n_cols(),
            forest.train_dims
        );
    }
    let kind = parse_score(args.score.as_deref())?;
    let scores =
        ocforest::score_rows(&forest, (0..dataset.n_rows()).map(|i| dataset.row(i)), kind)?;
    fs::write(&args.out, scores_csv(&scores))?;
    println!("scored {} rows -> {}", scores.len(), args.out.display());
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let cfg = read_config(args.model.config.as_deref())?;
    let (dataset, name) = resolve_dataset(&args.data, true)?;
    let model = build_model_config(&args.model, &cfg)?;
    let protocol = build_protocol(args, &cfg.protocol)?;
    let kind = parse_score(args.score.as_deref())?;

    let report = run_protocol(&dataset, &name, &model, kind, &protocol)?;
    fs::write(&args.out, report.to_json()?)?;
    let csv_path = args.out.with_extension("csv");
    fs::write(&csv_path, report.aggregate_csv())?;
    let roc_path = sibling(&args.out, "_roc.csv");
    fs::write(&roc_path, curve_csv(&report.roc_curve, "fpr,tpr"))?;
    let pr_path = sibling(&args.out, "_pr.csv");
    fs::write(&pr_path, curve_csv(&report.pr_curve, "recall,precision"))?;

    let fmt = |v: Option<f64>| v.map_or("NA".to_string(), |x| format!("{x:.3}"));
    println!(
        "{name} {} {}: ROC {} PR {} over {} repeats -> {}",
        report.algorithm,
        report.mode,
        fmt(report.aggregate.roc_auc_mean),
        fmt(report.aggregate.pr_auc_mean),
        report.n_repeats,
        args.out.display()
    );
    Ok(())
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn cmd_grid(args: &GridArgs) -> Result<()> {
    let forest: Forest = load_model(&args.model)?;
    if forest.train_dims != 2 {
        bail!(
            "grid export requires d=2, model has d={}",
            forest.train_dims
        );
    }
    let kind = parse_score(args.score.as_deref())?;
    let auto = ocforest::data_bounds(&forest)?;
    let lower = vec![
        args.xmin.unwrap_or(auto.lower()[0]),
        args.ymin.unwrap_or(auto.lower()[1]),
    ];
    let upper = vec![
        args.xmax.unwrap_or(auto.upper()[0]),
        args.ymax.unwrap_or(auto.upper()[1]),
    ];
    let bounds = Cell::new(lower, upper)?;
    let (nx, ny) = parse_resolution(&args.resolution)?;
    let grid = ocforest::score_grid(&forest, kind, &bounds, nx, ny)?;
    let mut out = Vec::new();
    grid.write_csv(&mut out)?;
    fs::write(&args.out, out)?;
    println!("{nx}x{ny} grid -> {}", args.out.display());
    Ok(())
}

fn cmd_importances(args: &ImportancesArgs) -> Result<()> {
    let forest = load_model(&args.model)?;
    if forest.kind != ModelKind::OneClassForest {
        bail!("importances require an ocrf model trained with the oc-gini criterion");
    }
    let imp = variable_importance(&forest)?;
    let mut text = String::from("feature_index,importance\n");
    for (i, v) in imp.iter().enumerate() {
        text.push_str(&format!("{i},{v:.9}\n"));
    }
    fs::write(&args.out, text)?;
    println!(
        "{} feature importances -> {}",
        imp.len(),
        args.out.display()
    );
    Ok(())
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Score(a) => cmd_score(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Grid(a) => cmd_grid(a),
        Command::Importances(a) => cmd_importances(a),
    }
}

fn main() {
    if let Err(e) = run() {
        // one line, machine parseable
        let msg = format!("{e:#}").replace('\n', "; ");
        eprintln!("error: {msg}");
        std::process::exit(1);
    }
}
