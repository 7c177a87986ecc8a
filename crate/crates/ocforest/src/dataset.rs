use crate::error::{Error, Result};

/// A numeric feature matrix with optional binary labels.
///
/// Labels use the convention `0` = inlier, `1` = outlier. Training ignores
/// them entirely; they exist for the evaluation harness. Storage is row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    n_rows: usize,
    n_cols: usize,
    labels: Option<Vec<u8>>,
    feature_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(
        features: Vec<f64>,
        n_cols: usize,
        labels: Option<Vec<u8>>,
        feature_names: Option<Vec<String>>,
    ) -> Result<Self> {
        if n_cols == 0 {
            return Err(Error::Dataset(
                "dataset must have at least one feature".into(),
            ));
        }
        if features.is_empty() || !features.len().is_multiple_of(n_cols) {
            return Err(Error::Dataset(format!(
                "feature buffer length {} is not a positive multiple of {n_cols} columns",
                features.len()
            )));
        }
        let n_rows = features.len() / n_cols;
        if let Some((k, v)) = features.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Dataset(format!(
                "non-finite value {} at row {}, column {}",
                v,
                k / n_cols,
                k % n_cols
            )));
        }
        if let Some(ref l) = labels {
            if l.len() != n_rows {
                return Err(Error::Dataset(format!(
                    "label vector length {} does not match {n_rows} rows",
                    l.len()
                )));
            }
            if let Some(bad) = l.iter().position(|&v| v > 1) {
                return Err(Error::Dataset(format!("label at row {bad} is not 0 or 1")));
            }
        }
        if let Some(ref names) = feature_names {
            if names.len() != n_cols {
                return Err(Error::Dataset(format!(
                    "{} feature names for {n_cols} columns",
                    names.len()
                )));
            }
        }
        Ok(Self {
            features,
            n_rows,
            n_cols,
            labels,
            feature_names,
        })
    }

    /// Convenience constructor from a list of points, all of the same dimension.
    pub fn from_rows(rows: &[Vec<f64>], labels: Option<Vec<u8>>) -> Result<Self> {
        let n_cols = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::Dataset("rows disagree in length".into()));
        }
        let mut features = Vec::with_capacity(rows.len() * n_cols);
        for r in rows {
            features.extend_from_slice(r);
        }
        Self::new(features, n_cols, labels, None)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.features[row * self.n_cols + col]
    }

    pub fn labels(&self) -> Option<&[u8]> {
        self.labels.as_deref()
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// Copy of the dataset with labels removed.
    pub fn without_labels(&self) -> Dataset {
        Dataset {
            features: self.features.clone(),
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            labels: None,
            feature_names: self.feature_names.clone(),
        }
    }

    /// New dataset holding the given rows, in order. Labels follow when present.
    pub fn select_rows(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.n_cols);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        let labels = self
            .labels
            .as_ref()
            .map(|l| indices.iter().map(|&i| l[i]).collect());
        Dataset {
            features,
            n_rows: indices.len(),
            n_cols: self.n_cols,
            labels,
            feature_names: self.feature_names.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        let err = Dataset::new(vec![1.0, f64::NAN], 1, None, None);
        assert!(err.is_err());
        let err = Dataset::new(vec![1.0, f64::INFINITY], 2, None, None);
        assert!(err.is_err());
    }

    #[test]
    fn rejects_bad_labels() {
        assert!(Dataset::new(vec![1.0, 2.0], 1, Some(vec![0, 2]), None).is_err());
        assert!(Dataset::new(vec![1.0, 2.0], 1, Some(vec![0]), None).is_err());
    }

    #[test]
    fn rejects_empty() {
        assert!(Dataset::new(vec![], 1, None, None).is_err());
        assert!(Dataset::new(vec![1.0], 0, None, None).is_err());
    }

    #[test]
    fn row_access_and_selection() {
        let d = Dataset::new(
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            2,
            Some(vec![0, 1, 0]),
            None,
        )
        .unwrap();
        assert_eq!(d.n_rows(), 3);
        assert_eq!(d.row(1), &[3.0, 4.0]);
        let s = d.select_rows(&[2, 0]);
        assert_eq!(s.row(0), &[5.0, 6.0]);
        assert_eq!(s.labels(), Some(&[0u8, 0u8][..]));
    }
}
