//! Datasets, CSV ingestion, splits and synthetic biased data.

mod csv_io;
mod split;
mod synth;

pub(crate) use csv_io::write_atomic;
pub use csv_io::{
    load_csv, load_csv_with, load_predictions_csv, write_csv, write_predictions_csv, LoadOptions,
    PredictionFile, Predictions,
};
pub use split::{make_split, SplitPlan};
pub use synth::{apportion_largest_remainder, synth_biased, SynthSpec};

use crate::linalg::Matrix;
use crate::{Error, Result};

/// Censored feature matrix with binary task label `y` and sensitive attribute `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularDataset {
    features: Matrix,
    labels: Vec<u8>,
    sensitive: Vec<u8>,
    feature_names: Vec<String>,
}

impl TabularDataset {
    pub fn new(
        features: Matrix,
        labels: Vec<u8>,
        sensitive: Vec<u8>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        let n = features.rows();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        for (len, _) in [(labels.len(), "labels"), (sensitive.len(), "sensitive")] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: len,
                });
            }
        }
        if feature_names.len() != features.cols() {
            return Err(Error::DimensionMismatch {
                expected: features.cols(),
                got: feature_names.len(),
            });
        }
        if let Some(row) = labels.iter().position(|&v| v > 1) {
            return Err(Error::NonBinaryValue {
                row,
                col: "label".into(),
            });
        }
        if let Some(row) = sensitive.iter().position(|&v| v > 1) {
            return Err(Error::NonBinaryValue {
                row,
                col: "sensitive".into(),
            });
        }
        for (i, r) in features.iter_rows().enumerate() {
            if let Some(j) = r.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteFeature {
                    row: i,
                    col: feature_names[j].clone(),
                });
            }
        }
        Ok(Self {
            features,
            labels,
            sensitive,
            feature_names,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn sensitive(&self) -> &[u8] {
        &self.sensitive
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Names of feature columns bitwise identical to the sensitive column.
    pub fn censoring_violations(&self) -> Vec<String> {
        (0..self.dim())
            .filter(|&j| {
                self.features
                    .iter_rows()
                    .zip(&self.sensitive)
                    .all(|(r, &s)| r[j].to_bits() == f64::from(s).to_bits())
            })
            .map(|j| self.feature_names[j].clone())
            .collect()
    }

    pub fn subset(&self, idx: &[usize]) -> TabularDataset {
        TabularDataset {
            features: self.features.select_rows(idx),
            labels: crate::select(&self.labels, idx),
            sensitive: crate::select(&self.sensitive, idx),
            feature_names: self.feature_names.clone(),
        }
    }
}

/// Empirical `(P(S=1), P(Y=1))`.
pub fn class_balance(dataset: &TabularDataset) -> (f64, f64) {
    let n = dataset.len() as f64;
    let s1 = dataset.sensitive.iter().filter(|&&s| s == 1).count() as f64;
    let y1 = dataset.labels.iter().filter(|&&y| y == 1).count() as f64;
    (s1 / n, y1 / n)
}
