//! Axis-aligned hyper-rectangles.
//!
//! Every tree node carries a [`Cell`] describing the region of feature space
//! it covers. Splits cut a cell along one coordinate, so the volume of a
//! child relative to its parent reduces to a one-dimensional width ratio.
//! Volumes of deep cells in high dimension underflow `f64` quickly, which is
//! why the internal bookkeeping works with log-volumes and width fractions
//! rather than raw products.

use crate::error::{Error, Result};

/// An axis-aligned hyper-rectangle `[lower_0, upper_0] x ... x [lower_{d-1}, upper_{d-1}]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Cell {
    /// Builds a cell from per-feature bounds. Fails when the vectors disagree
    /// in length, contain non-finite values, or `lower[j] > upper[j]`.
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::InvalidInput(format!(
                "cell bounds disagree in length: {} vs {}",
                lower.len(),
                upper.len()
            )));
        }
        if lower.is_empty() {
            return Err(Error::InvalidInput(
                "cell must have at least one feature".into(),
            ));
        }
        for j in 0..lower.len() {
            if !lower[j].is_finite() || !upper[j].is_finite() {
                return Err(Error::InvalidInput(format!(
                    "non-finite bound on feature {j}"
                )));
            }
            if lower[j] > upper[j] {
                return Err(Error::InvalidInput(format!(
                    "lower bound {} exceeds upper bound {} on feature {j}",
                    lower[j], upper[j]
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// Smallest cell containing all `points`; `None` when the iterator is empty.
    pub fn bounding<'a, I>(points: I) -> Option<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut iter = points.into_iter();
        let first = iter.next()?;
        let mut lower = first.to_vec();
        let mut upper = first.to_vec();
        for p in iter {
            for j in 0..lower.len() {
                if p[j] < lower[j] {
                    lower[j] = p[j];
                }
                if p[j] > upper[j] {
                    upper[j] = p[j];
                }
            }
        }
        Some(Self { lower, upper })
    }

    pub fn dims(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, feature: usize) -> f64 {
        self.upper[feature] - self.lower[feature]
    }

    /// Lebesgue volume, the product of widths. Zero iff some feature has zero width.
    pub fn volume(&self) -> f64 {
        (0..self.dims()).map(|j| self.width(j)).product()
    }

    /// Sum of `ln(width)`; `-inf` when some width is zero.
    pub fn log_volume(&self) -> f64 {
        (0..self.dims()).map(|j| self.width(j).ln()).sum()
    }

    /// True when `x` lies inside the closed cell.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dims()
            && (0..self.dims()).all(|j| x[j] >= self.lower[j] && x[j] <= self.upper[j])
    }

    /// Fraction of the width below `threshold` along `feature`; this is the
    /// child-to-parent volume fraction of the left child of a split there,
    /// computed from the single changed coordinate.
    pub fn width_fraction_below(&self, feature: usize, threshold: f64) -> f64 {
        (threshold - self.lower[feature]) / self.width(feature)
    }

    /// Splits the cell along `feature` at `threshold`, returning the
    /// `(left, right)` children. The threshold must lie strictly inside the
    /// open interval `(lower[feature], upper[feature])` so that neither child
    /// has zero width along the split coordinate.
    pub fn split(&self, feature: usize, threshold: f64) -> Result<(Cell, Cell)> {
        if feature >= self.dims() {
            return Err(Error::InvalidInput(format!(
                "split feature {feature} out of range for {}-dimensional cell",
                self.dims()
            )));
        }
        if !(threshold > self.lower[feature] && threshold < self.upper[feature]) {
            return Err(Error::InvalidInput(format!(
                "split threshold {threshold} not strictly inside ({}, {}) on feature {feature}",
                self.lower[feature], self.upper[feature]
            )));
        }
        let mut left = self.clone();
        let mut right = self.clone();
        left.upper[feature] = threshold;
        right.lower[feature] = threshold;
        Ok((left, right))
    }
}
