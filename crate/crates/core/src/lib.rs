//! Attribute-inference risk auditing for binary classifiers.
//!
//! The crate measures how much a classifier's outputs reveal about a
//! sensitive attribute `S` that was censored from its inputs, and how group
//! fairness constraints change that leakage:
//!
//! - [`data`]: tabular datasets, CSV ingestion, splits and biased synthetic data
//! - [`models`]: logistic regression and dense networks trained by gradient descent
//! - [`metrics`]: balanced accuracy, ROC search and group-fairness metrics
//! - [`attacks`]: adaptive-threshold attribute inference (soft and hard labels),
//!   the fixed-threshold baseline and a loss-threshold membership attack
//! - [`fairness`]: exponentiated-gradient reduction and adversarial debiasing
//! - [`oracle`]: exact finite-distribution checks of the attack/fairness identities
//! - [`cli`]: pipelines behind the `fairleak` binary

pub mod attacks;
pub mod cli;
pub mod data;
pub mod error;
pub mod fairness;
pub mod linalg;
pub mod metrics;
pub mod models;
pub mod oracle;
pub mod parallel;

pub use error::{Error, Result};

/// Binary vector with values in {0, 1}.
pub type Binary = Vec<u8>;

/// Real-valued model outputs in [0,1].
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SoftPredictions(pub Vec<f64>);

/// Thresholded model outputs in {0,1}.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct HardPredictions(pub Vec<u8>);

impl SoftPredictions {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `1_[tau,1]`: closed at the threshold.
    pub fn threshold(&self, tau: f64) -> HardPredictions {
        HardPredictions(self.0.iter().map(|&p| u8::from(p >= tau)).collect())
    }

    pub fn select(&self, idx: &[usize]) -> SoftPredictions {
        SoftPredictions(idx.iter().map(|&i| self.0[i]).collect())
    }
}

impl HardPredictions {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn select(&self, idx: &[usize]) -> HardPredictions {
        HardPredictions(idx.iter().map(|&i| self.0[i]).collect())
    }
}

pub(crate) fn select<T: Copy>(v: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| v[i]).collect()
}
