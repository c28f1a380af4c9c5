//! Trainable scorers: logistic regression and dense ReLU networks with a
//! logistic output, both fit by deterministic gradient descent.

mod gradcheck;
mod linear;
mod mlp;

pub use gradcheck::{grad_check, Differentiable};
pub use linear::{fit_logreg, fit_logreg_traced, LinearModel};
pub use mlp::{fit_mlp, MlpModel, MlpTrainer};

use serde::{Deserialize, Serialize};

use crate::linalg::{sigmoid, Matrix};
use crate::{Error, HardPredictions, Result, SoftPredictions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    /// `None` means full-batch.
    pub batch_size: Option<usize>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 500,
            learning_rate: 0.05,
            l2: 0.0,
            batch_size: None,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// Defaults used for logistic regression (attack models, reduction base learners).
    pub fn logreg() -> Self {
        Self {
            epochs: 300,
            learning_rate: 0.5,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate < 10.0) {
            return Err(Error::InvalidConfig(
                "learning_rate must lie in (0, 10)".into(),
            ));
        }
        if self.epochs > 1_000_000 {
            return Err(Error::InvalidConfig("epochs must not exceed 1e6".into()));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::InvalidConfig(
                "l2 must be finite and non-negative".into(),
            ));
        }
        if self.batch_size == Some(0) {
            return Err(Error::InvalidConfig("batch_size must be positive".into()));
        }
        Ok(())
    }
}

/// Per-feature affine transform `(x - mean) / std` fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    /// Weighted moments; rows with zero weight do not contribute.
    pub fn fit(x: &Matrix, weights: Option<&[f64]>) -> Standardizer {
        let d = x.cols();
        let mut mean = vec![0.0; d];
        let mut total = 0.0;
        for (i, r) in x.iter_rows().enumerate() {
            let w = weights.map_or(1.0, |w| w[i]);
            if w == 0.0 {
                continue;
            }
            total += w;
            for (m, v) in mean.iter_mut().zip(r) {
                *m += w * v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= total);
        let mut var = vec![0.0; d];
        for (i, r) in x.iter_rows().enumerate() {
            let w = weights.map_or(1.0, |w| w[i]);
            if w == 0.0 {
                continue;
            }
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                *s += w * (v - m) * (v - m);
            }
        }
        let std = var
            .iter()
            .map(|s| {
                let sd = (s / total).sqrt();
                if sd > 1e-12 && sd.is_finite() {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, std }
    }

    pub fn apply_row(&self, x: &[f64], out: &mut [f64]) {
        for (((o, v), m), s) in out.iter_mut().zip(x).zip(&self.mean).zip(&self.std) {
            *o = (v - m) / s;
        }
    }

    pub fn apply(&self, x: &Matrix) -> Matrix {
        let mut out = x.clone();
        for i in 0..x.rows() {
            self.apply_row(x.row(i), out.row_mut(i));
        }
        out
    }
}

/// Anything that maps a feature row to a logit.
pub trait Scorer {
    fn input_dim(&self) -> usize;

    /// Pre-activation of the output unit for one raw (unstandardized) row.
    fn logit(&self, x: &[f64]) -> f64;
}

fn check_dim(model: &(impl Scorer + ?Sized), x: &Matrix) -> Result<()> {
    if x.cols() != model.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.input_dim(),
            got: x.cols(),
        });
    }
    Ok(())
}

pub fn predict_soft(model: &(impl Scorer + ?Sized), x: &Matrix) -> Result<SoftPredictions> {
    check_dim(model, x)?;
    Ok(SoftPredictions(
        x.iter_rows().map(|r| sigmoid(model.logit(r))).collect(),
    ))
}

/// Label 1 iff the score is at least `tau`.
pub fn predict_hard(
    model: &(impl Scorer + ?Sized),
    x: &Matrix,
    tau: f64,
) -> Result<HardPredictions> {
    Ok(predict_soft(model, x)?.threshold(tau))
}

/// Either model family, sharing one JSON schema
/// `{layer_sizes, weights, biases, standardizer}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Model {
    Linear(LinearModel),
    Mlp(MlpModel),
}

impl<'de> Deserialize<'de> for Model {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let dense = MlpModel::deserialize(de)?;
        if dense.layer_sizes.len() == 2 {
            LinearModel::try_from(dense)
                .map(Model::Linear)
                .map_err(serde::de::Error::custom)
        } else {
            Ok(Model::Mlp(dense))
        }
    }
}

impl Scorer for Model {
    fn input_dim(&self) -> usize {
        match self {
            Model::Linear(m) => m.input_dim(),
            Model::Mlp(m) => m.input_dim(),
        }
    }

    fn logit(&self, x: &[f64]) -> f64 {
        match self {
            Model::Linear(m) => m.logit(x),
            Model::Mlp(m) => m.logit(x),
        }
    }
}

impl From<LinearModel> for Model {
    fn from(m: LinearModel) -> Self {
        Model::Linear(m)
    }
}

impl From<MlpModel> for Model {
    fn from(m: MlpModel) -> Self {
        Model::Mlp(m)
    }
}

/// Mean binary cross-entropy of a scorer on `(x, y)`.
pub fn mean_bce(model: &(impl Scorer + ?Sized), x: &Matrix, y: &[u8]) -> f64 {
    let total: f64 = x
        .iter_rows()
        .zip(y)
        .map(|(r, &t)| crate::linalg::bce_with_logit(model.logit(r), f64::from(t)))
        .sum();
    total / y.len() as f64
}

/// Per-record binary cross-entropy, used as the membership signal.
pub fn per_record_bce(model: &(impl Scorer + ?Sized), x: &Matrix, y: &[u8]) -> Vec<f64> {
    x.iter_rows()
        .zip(y)
        .map(|(r, &t)| crate::linalg::bce_with_logit(model.logit(r), f64::from(t)))
        .collect()
}

pub(crate) fn check_xy(x: &Matrix, y: &[u8]) -> Result<()> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            got: y.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_bounds() {
        assert!(TrainConfig::default().validate().is_ok());
        let bad = TrainConfig {
            learning_rate: 10.0,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = TrainConfig {
            epochs: 2_000_000,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = TrainConfig {
            batch_size: Some(0),
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn standardizer_ignores_zero_weight_rows() {
        let x = Matrix::from_rows(&[vec![1.0], vec![3.0], vec![100.0]]).unwrap();
        let st = Standardizer::fit(&x, Some(&[1.0, 1.0, 0.0]));
        assert_eq!(st.mean, vec![2.0]);
        assert_eq!(st.std, vec![1.0]);
    }

    #[test]
    fn constant_column_keeps_unit_scale() {
        let x = Matrix::from_rows(&[vec![5.0], vec![5.0]]).unwrap();
        assert_eq!(Standardizer::fit(&x, None).std, vec![1.0]);
    }
}
