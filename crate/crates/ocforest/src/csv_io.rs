//! CSV dataset ingestion.
//!
//! A [`DatasetSpec`] describes declaratively how to turn a raw CSV into a
//! numeric [`Dataset`]: which column carries labels, which label values mark
//! the anomaly class, and which columns or label classes to drop. The loader
//! itself stays generic; per-dataset recipes live in small spec files.

use std::collections::BTreeSet;
use std::path::PathBuf;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Declarative recipe for loading one CSV file.
#[derive(Debug, Clone, Default)]
pub struct DatasetSpec {
    pub path: PathBuf,
    /// Column holding class labels. Without it the dataset is unlabeled.
    pub label_column: Option<String>,
    /// Label values mapped to 1 (outlier). When absent, the label column must
    /// already contain 0/1.
    pub anomaly_values: Option<BTreeSet<String>>,
    /// Label values mapped to 0 (inlier). When given together with
    /// `anomaly_values`, any row whose label is in neither set (nor in
    /// `drop_label_values`) is an error; when absent, every non-anomaly
    /// label is an inlier.
    pub inlier_values: Option<BTreeSet<String>>,
    /// Rows with these label values are removed entirely.
    pub drop_label_values: BTreeSet<String>,
    /// Feature columns to remove (e.g. categorical attributes).
    pub drop_columns: Vec<String>,
}

impl DatasetSpec {
    pub fn for_path(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            ..Self::default()
        }
    }
}

const MAX_REPORTED_CELLS: usize = 20;

/// Loads a CSV per `spec`. The file must have a header row; every retained
/// cell must parse as a finite decimal number. Offending cells are reported
/// with their row and column.
pub fn load_csv(spec: &DatasetSpec) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(&spec.path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.to_string()).collect();

    let label_idx = match &spec.label_column {
        Some(name) => Some(
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Dataset(format!("label column '{name}' not in header")))?,
        ),
        None => None,
    };
    for dropped in &spec.drop_columns {
        if !headers.iter().any(|h| h == dropped) {
            return Err(Error::Dataset(format!(
                "drop column '{dropped}' not in header"
            )));
        }
    }
    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|&i| Some(i) != label_idx && !spec.drop_columns.iter().any(|d| d == &headers[i]))
        .collect();
    if feature_cols.is_empty() {
        return Err(Error::Dataset(
            "no feature columns remain after drops".into(),
        ));
    }

    let mut features: Vec<f64> = Vec::new();
    let mut labels: Vec<u8> = Vec::new();
    let mut bad_cells: Vec<String> = Vec::new();
    let mut n_rows = 0usize;

    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != headers.len() {
            bad_cells.push(format!(
                "row {row_idx}: {} fields, header has {}",
                record.len(),
                headers.len()
            ));
            continue;
        }

        // Labels first: a row can be dropped by its class before any
        // feature parsing is attempted.
        let mut label: Option<u8> = None;
        if let Some(li) = label_idx {
            let raw = record.get(li).unwrap_or("");
            match classify_label(spec, raw) {
                LabelOutcome::Keep(l) => label = Some(l),
                LabelOutcome::DropRow => continue,
                LabelOutcome::Unknown => {
                    bad_cells.push(format!(
                        "row {row_idx}, column '{}': unknown label value '{raw}'",
                        headers[li]
                    ));
                    continue;
                }
            }
        }

        let mut parsed = Vec::with_capacity(feature_cols.len());
        let mut row_ok = true;
        for &c in &feature_cols {
            let raw = record.get(c).unwrap_or("");
            match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => parsed.push(v),
                _ => {
                    if bad_cells.len() < MAX_REPORTED_CELLS {
                        bad_cells.push(format!(
                            "row {row_idx}, column '{}': cannot parse '{raw}' as a finite number",
                            headers[c]
                        ));
                    }
                    row_ok = false;
                }
            }
        }
        if !row_ok {
            continue;
        }
        features.extend_from_slice(&parsed);
        if let Some(l) = label {
            labels.push(l);
        }
        n_rows += 1;
    }

    if !bad_cells.is_empty() {
        return Err(Error::Dataset(format!(
            "{} rejected cell(s):\n  {}",
            bad_cells.len(),
            bad_cells.join("\n  ")
        )));
    }
    if n_rows == 0 {
        return Err(Error::Dataset(format!(
            "no usable rows in {}",
            spec.path.display()
        )));
    }

    let names: Vec<String> = feature_cols.iter().map(|&c| headers[c].clone()).collect();
    Dataset::new(
        features,
        feature_cols.len(),
        label_idx.map(|_| labels),
        Some(names),
    )
}

enum LabelOutcome {
    Keep(u8),
    DropRow,
    Unknown,
}

fn classify_label(spec: &DatasetSpec, raw: &str) -> LabelOutcome {
    if spec.drop_label_values.contains(raw) {
        return LabelOutcome::DropRow;
    }
    match &spec.anomaly_values {
        Some(anomalies) => {
            if anomalies.contains(raw) {
                LabelOutcome::Keep(1)
            } else {
                match &spec.inlier_values {
                    Some(inliers) if !inliers.contains(raw) => LabelOutcome::Unknown,
                    _ => LabelOutcome::Keep(0),
                }
            }
        }
        None => match raw {
            "0" => LabelOutcome::Keep(0),
            "1" => LabelOutcome::Keep(1),
            _ => LabelOutcome::Unknown,
        },
    }
}

/// Per-row scores as CSV with header `row_index,score`.
pub fn scores_csv(scores: &[f64]) -> String {
    let mut out = String::from("row_index,score\n");
    for (i, s) in scores.iter().enumerate() {
        out.push_str(&format!("{i},{}\n", crate::scoring::fmt_sig9(*s)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_plain_unlabeled_csv() {
        let f = write_temp("a,b\n1.0,2.0\n3.5,-4.0\n");
        let d = load_csv(&DatasetSpec::for_path(f.path())).unwrap();
        assert_eq!(d.n_rows(), 2);
        assert_eq!(d.n_cols(), 2);
        assert_eq!(d.labels(), None);
        assert_eq!(
            d.feature_names().unwrap(),
            &["a".to_string(), "b".to_string()]
        );
    }

    #[test]
    fn maps_anomaly_values_and_drops_columns() {
        let f = write_temp("a,b,junk,class\n1,2,x,g\n3,4,y,b\n5,6,z,g\n");
        let spec = DatasetSpec {
            path: f.path().to_path_buf(),
            label_column: Some("class".into()),
            anomaly_values: Some(["b".to_string()].into()),
            drop_columns: vec!["junk".into()],
            ..Default::default()
        };
        let d = load_csv(&spec).unwrap();
        assert_eq!(d.n_rows(), 3);
        assert_eq!(d.n_cols(), 2);
        assert_eq!(d.labels(), Some(&[0u8, 1, 0][..]));
    }

    #[test]
    fn numeric_binary_labels_without_anomaly_values() {
        let f = write_temp("x,class\n0.5,0\n0.7,1\n");
        let spec = DatasetSpec {
            path: f.path().to_path_buf(),
            label_column: Some("class".into()),
            ..Default::default()
        };
        let d = load_csv(&spec).unwrap();
        assert_eq!(d.labels(), Some(&[0u8, 1][..]));

        let f = write_temp("x,class\n0.5,yes\n");
        let spec = DatasetSpec {
            path: f.path().to_path_buf(),
            label_column: Some("class".into()),
            ..Default::default()
        };
        let err = load_csv(&spec).unwrap_err().to_string();
        assert!(err.contains("unknown label value"), "{err}");
    }

    #[test]
    fn nan_cell_is_reported_with_row_and_column() {
        let f = write_temp("a,b\n1.0,2.0\nNaN,3.0\n");
        let err = load_csv(&DatasetSpec::for_path(f.path()))
            .unwrap_err()
            .to_string();
        assert!(err.contains("row 1"), "{err}");
        assert!(err.contains("'a'"), "{err}");
    }

    #[test]
    fn missing_and_non_numeric_cells_are_errors() {
        let f = write_temp("a,b\n1.0,\n");
        assert!(load_csv(&DatasetSpec::for_path(f.path())).is_err());
        let f = write_temp("a,b\n1.0,hello\n");
        assert!(load_csv(&DatasetSpec::for_path(f.path())).is_err());
    }

    #[test]
    fn drop_label_values_removes_rows() {
        let f = write_temp("x,class\n1,1\n2,4\n3,2\n4,1\n");
        let spec = DatasetSpec {
            path: f.path().to_path_buf(),
            label_column: Some("class".into()),
            anomaly_values: Some(["2".to_string(), "3".to_string()].into()),
            inlier_values: Some(["1".to_string()].into()),
            drop_label_values: ["4".to_string()].into(),
            ..Default::default()
        };
        let d = load_csv(&spec).unwrap();
        assert_eq!(d.n_rows(), 3);
        assert_eq!(d.labels(), Some(&[0u8, 1, 0][..]));
    }

    #[test]
    fn unknown_class_with_explicit_inliers_is_an_error() {
        let f = write_temp("x,class\n1,1\n2,9\n");
        let spec = DatasetSpec {
            path: f.path().to_path_buf(),
            label_column: Some("class".into()),
            anomaly_values: Some(["2".to_string()].into()),
            inlier_values: Some(["1".to_string()].into()),
            ..Default::default()
        };
        let err = load_csv(&spec).unwrap_err().to_string();
        assert!(err.contains("unknown label value '9'"), "{err}");
    }

    #[test]
    fn missing_label_column_is_an_error() {
        let f = write_temp("a,b\n1,2\n");
        let spec = DatasetSpec {
            path: f.path().to_path_buf(),
            label_column: Some("class".into()),
            ..Default::default()
        };
        assert!(load_csv(&spec).is_err());
    }

    #[test]
    fn scores_csv_shape() {
        let text = scores_csv(&[0.5, 0.25]);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("row_index,score"));
        assert_eq!(lines.next(), Some("0,5.00000000e-1"));
        assert_eq!(lines.next(), Some("1,2.50000000e-1"));
    }
}
