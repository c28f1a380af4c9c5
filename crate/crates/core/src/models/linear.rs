use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_xy, MlpModel, Scorer, Standardizer, TrainConfig};
use crate::linalg::{bce_with_logit, dot, sigmoid, Matrix};
use crate::{Error, Result};

/// `sigmoid(w . standardize(x) + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "MlpModel", try_from = "MlpModel")]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub standardizer: Option<Standardizer>,
}

impl LinearModel {
    pub fn zeros(d: usize) -> Self {
        Self {
            weights: vec![0.0; d],
            bias: 0.0,
            standardizer: None,
        }
    }

    pub(crate) fn standardized_logit(&self, z: &[f64]) -> f64 {
        dot(&self.weights, z) + self.bias
    }
}

impl Scorer for LinearModel {
    fn input_dim(&self) -> usize {
        self.weights.len()
    }

    fn logit(&self, x: &[f64]) -> f64 {
        match &self.standardizer {
            Some(st) => {
                let mut z = vec![0.0; x.len()];
                st.apply_row(x, &mut z);
                self.standardized_logit(&z)
            }
            None => self.standardized_logit(x),
        }
    }
}

impl From<LinearModel> for MlpModel {
    fn from(m: LinearModel) -> Self {
        MlpModel {
            layer_sizes: vec![m.weights.len(), 1],
            weights: vec![m.weights],
            biases: vec![vec![m.bias]],
            standardizer: m.standardizer,
        }
    }
}

impl TryFrom<MlpModel> for LinearModel {
    type Error = Error;

    fn try_from(mut m: MlpModel) -> Result<Self> {
        if m.layer_sizes.len() != 2 || m.layer_sizes[1] != 1 {
            return Err(Error::InvalidConfig(
                "linear model needs layer_sizes [d, 1]".into(),
            ));
        }
        m.check_shapes()?;
        Ok(LinearModel {
            weights: m.weights.remove(0),
            bias: m.biases[0][0],
            standardizer: m.standardizer,
        })
    }
}

/// Weighted objective `sum_i w_i bce_i / sum_i w_i + l2 |w|^2` and its gradient
/// on standardized rows `idx`.
fn objective(
    model: &LinearModel,
    z: &Matrix,
    y: &[u8],
    w: &[f64],
    idx: &[usize],
    l2: f64,
    grad: &mut [f64],
) -> f64 {
    grad.iter_mut().for_each(|g| *g = 0.0);
    let d = model.weights.len();
    let mut loss = 0.0;
    let mut total = 0.0;
    for &i in idx {
        let wi = w[i];
        if wi == 0.0 {
            continue;
        }
        let row = z.row(i);
        let logit = model.standardized_logit(row);
        let t = f64::from(y[i]);
        loss += wi * bce_with_logit(logit, t);
        let r = wi * (sigmoid(logit) - t);
        for (g, v) in grad[..d].iter_mut().zip(row) {
            *g += r * v;
        }
        grad[d] += r;
        total += wi;
    }
    if total > 0.0 {
        loss /= total;
        grad.iter_mut().for_each(|g| *g /= total);
    }
    for (g, wj) in grad[..d].iter_mut().zip(&model.weights) {
        *g += 2.0 * l2 * wj;
    }
    loss + l2 * dot(&model.weights, &model.weights)
}

pub fn fit_logreg(
    x: &Matrix,
    y: &[u8],
    sample_weights: &[f64],
    cfg: &TrainConfig,
) -> Result<LinearModel> {
    fit_logreg_traced(x, y, sample_weights, cfg).map(|(m, _)| m)
}

/// Like [`fit_logreg`], also returning the full-data objective before every
/// epoch and after the last one.
pub fn fit_logreg_traced(
    x: &Matrix,
    y: &[u8],
    sample_weights: &[f64],
    cfg: &TrainConfig,
) -> Result<(LinearModel, Vec<f64>)> {
    cfg.validate()?;
    check_xy(x, y)?;
    if sample_weights.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            got: sample_weights.len(),
        });
    }
    if sample_weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidConfig(
            "sample weights must be finite and non-negative".into(),
        ));
    }
    if sample_weights.iter().sum::<f64>() <= 0.0 {
        return Err(Error::InvalidConfig("sample weights sum to zero".into()));
    }

    let st = Standardizer::fit(x, Some(sample_weights));
    let z = st.apply(x);
    let d = x.cols();
    let mut model = LinearModel::zeros(d);
    let mut grad = vec![0.0; d + 1];
    let all: Vec<usize> = (0..y.len()).collect();
    let mut order = all.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut trace = Vec::with_capacity(cfg.epochs + 1);

    for epoch in 0..cfg.epochs {
        let loss = objective(&model, &z, y, sample_weights, &all, cfg.l2, &mut grad);
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        trace.push(loss);
        match cfg.batch_size {
            Some(b) if b < y.len() => {
                order.shuffle(&mut rng);
                for batch in order.chunks(b) {
                    objective(&model, &z, y, sample_weights, batch, cfg.l2, &mut grad);
                    step(&mut model, &grad, cfg.learning_rate);
                }
            }
            _ => step(&mut model, &grad, cfg.learning_rate),
        }
        if !model.bias.is_finite() || model.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFiniteLoss { epoch });
        }
    }
    let last = objective(&model, &z, y, sample_weights, &all, cfg.l2, &mut grad);
    if !last.is_finite() {
        return Err(Error::NonFiniteLoss { epoch: cfg.epochs });
    }
    trace.push(last);
    model.standardizer = Some(st);
    Ok((model, trace))
}

fn step(model: &mut LinearModel, grad: &[f64], lr: f64) {
    let d = model.weights.len();
    for (w, g) in model.weights.iter_mut().zip(&grad[..d]) {
        *w -= lr * g;
    }
    model.bias -= lr * grad[d];
}
