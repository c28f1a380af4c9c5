use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_xy, Scorer, Standardizer, TrainConfig};
use crate::linalg::{bce_with_logit, sigmoid, Matrix};
use crate::{Error, Result};

/// Dense network: ReLU hidden layers, one logistic output unit.
///
/// `weights[l]` is row-major `layer_sizes[l+1] x layer_sizes[l]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layer_sizes: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub standardizer: Option<Standardizer>,
}

impl MlpModel {
    /// Glorot-uniform weights, zero biases.
    pub fn init(layer_sizes: &[usize], rng: &mut impl Rng) -> Result<MlpModel> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) || layer_sizes.last() != Some(&1) {
            return Err(Error::InvalidConfig(format!(
                "bad layer sizes {layer_sizes:?}"
            )));
        }
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for pair in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
            weights.push(
                (0..fan_in * fan_out)
                    .map(|_| rng.gen_range(-a..a))
                    .collect(),
            );
            biases.push(vec![0.0; fan_out]);
        }
        Ok(MlpModel {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
            standardizer: None,
        })
    }

    pub(crate) fn check_shapes(&self) -> Result<()> {
        let n_layers = self.layer_sizes.len().saturating_sub(1);
        if n_layers == 0 || self.weights.len() != n_layers || self.biases.len() != n_layers {
            return Err(Error::InvalidConfig("layer count mismatch".into()));
        }
        for (l, pair) in self.layer_sizes.windows(2).enumerate() {
            if self.weights[l].len() != pair[0] * pair[1] || self.biases[l].len() != pair[1] {
                return Err(Error::InvalidConfig(format!("layer {l} has wrong shape")));
            }
        }
        if let Some(st) = &self.standardizer {
            if st.mean.len() != self.layer_sizes[0] || st.std.len() != self.layer_sizes[0] {
                return Err(Error::InvalidConfig("standardizer width mismatch".into()));
            }
        }
        let finite = self
            .weights
            .iter()
            .chain(&self.biases)
            .flatten()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidConfig("non-finite parameter".into()));
        }
        Ok(())
    }

    pub fn n_params(&self) -> usize {
        self.weights.iter().chain(&self.biases).map(Vec::len).sum()
    }

    /// Forward pass on a standardized row; fills `acts` with the input and
    /// every hidden activation, returns the output logit.
    pub(crate) fn forward(&self, z: &[f64], acts: &mut Vec<Vec<f64>>) -> f64 {
        acts.clear();
        acts.push(z.to_vec());
        let last = self.weights.len() - 1;
        for l in 0..=last {
            let (n_in, n_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
            let w = &self.weights[l];
            let input = &acts[l];
            let mut out = self.biases[l].clone();
            for (o, row) in out.iter_mut().zip(w.chunks(n_in)) {
                *o += row.iter().zip(input).map(|(a, b)| a * b).sum::<f64>();
            }
            if l == last {
                debug_assert_eq!(n_out, 1);
                return out[0];
            }
            out.iter_mut().for_each(|v| *v = v.max(0.0));
            acts.push(out);
        }
        unreachable!()
    }

    /// Smallest `|pre-activation|` of any hidden unit over the rows of `x`.
    /// Finite-difference checks are only meaningful when this exceeds the step.
    pub fn relu_margin(&self, x: &Matrix) -> f64 {
        let z = self
            .standardizer
            .as_ref()
            .map_or_else(|| x.clone(), |s| s.apply(x));
        let mut margin = f64::INFINITY;
        for r in z.iter_rows() {
            let mut input = r.to_vec();
            for l in 0..self.weights.len() - 1 {
                let mut out = self.biases[l].clone();
                for (o, row) in out
                    .iter_mut()
                    .zip(self.weights[l].chunks(self.layer_sizes[l]))
                {
                    *o += row.iter().zip(&input).map(|(a, b)| a * b).sum::<f64>();
                    margin = margin.min(o.abs());
                }
                out.iter_mut().for_each(|v| *v = v.max(0.0));
                input = out;
            }
        }
        margin
    }

    /// Accumulates `dlogit * d logit / d params` into `gw`/`gb`.
    pub(crate) fn backward(
        &self,
        acts: &[Vec<f64>],
        dlogit: f64,
        gw: &mut [Vec<f64>],
        gb: &mut [Vec<f64>],
    ) {
        let mut delta = vec![dlogit];
        for l in (0..self.weights.len()).rev() {
            let n_in = self.layer_sizes[l];
            let input = &acts[l];
            for (k, &dk) in delta.iter().enumerate() {
                if dk == 0.0 {
                    continue;
                }
                gb[l][k] += dk;
                for (g, a) in gw[l][k * n_in..(k + 1) * n_in].iter_mut().zip(input) {
                    *g += dk * a;
                }
            }
            if l == 0 {
                break;
            }
            let w = &self.weights[l];
            let mut prev = vec![0.0; n_in];
            for (k, &dk) in delta.iter().enumerate() {
                if dk == 0.0 {
                    continue;
                }
                for (p, wv) in prev.iter_mut().zip(&w[k * n_in..(k + 1) * n_in]) {
                    *p += dk * wv;
                }
            }
            for (p, a) in prev.iter_mut().zip(input) {
                if *a <= 0.0 {
                    *p = 0.0;
                }
            }
            delta = prev;
        }
    }

    pub(crate) fn zero_grads(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        (
            self.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            self.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        )
    }

    fn standardize(&self, x: &[f64]) -> Vec<f64> {
        match &self.standardizer {
            Some(st) => {
                let mut z = vec![0.0; x.len()];
                st.apply_row(x, &mut z);
                z
            }
            None => x.to_vec(),
        }
    }
}

impl Scorer for MlpModel {
    fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    fn logit(&self, x: &[f64]) -> f64 {
        let z = self.standardize(x);
        let mut acts = Vec::with_capacity(self.layer_sizes.len());
        self.forward(&z, &mut acts)
    }
}

/// Epoch-at-a-time mini-batch trainer for [`MlpModel`].
///
/// Extra per-record logit gradients can be injected into each epoch, which is
/// how adversarial debiasing shares the exact update sequence of plain training.
pub struct MlpTrainer {
    model: MlpModel,
    z: Matrix,
    y: Vec<u8>,
    cfg: TrainConfig,
    rng: ChaCha8Rng,
    order: Vec<usize>,
    epochs_run: usize,
}

impl MlpTrainer {
    pub fn new(x: &Matrix, y: &[u8], hidden: &[usize], cfg: &TrainConfig) -> Result<Self> {
        cfg.validate()?;
        check_xy(x, y)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let sizes: Vec<usize> = std::iter::once(x.cols())
            .chain(hidden.iter().copied())
            .chain([1])
            .collect();
        let mut model = MlpModel::init(&sizes, &mut rng)?;
        let st = Standardizer::fit(x, None);
        let z = st.apply(x);
        model.standardizer = Some(st);
        Ok(Self {
            model,
            z,
            y: y.to_vec(),
            cfg: cfg.clone(),
            rng,
            order: (0..y.len()).collect(),
            epochs_run: 0,
        })
    }

    pub fn model(&self) -> &MlpModel {
        &self.model
    }

    pub fn into_model(self) -> MlpModel {
        self.model
    }

    pub fn epochs_run(&self) -> usize {
        self.epochs_run
    }

    /// Current output logits on the training rows.
    pub fn train_logits(&self) -> Vec<f64> {
        let mut acts = Vec::new();
        self.z
            .iter_rows()
            .map(|r| self.model.forward(r, &mut acts))
            .collect()
    }

    pub fn epoch(&mut self) -> Result<()> {
        self.epoch_with(|_, _| 0.0, false)
    }

    /// One pass over the data. `extra(i, logit)` is added to the per-record
    /// gradient of the loss with respect to the output logit when `use_extra`.
    pub fn epoch_with(
        &mut self,
        mut extra: impl FnMut(usize, f64) -> f64,
        use_extra: bool,
    ) -> Result<()> {
        let n = self.y.len();
        let batch = match self.cfg.batch_size {
            Some(b) if b < n => {
                self.order.shuffle(&mut self.rng);
                b
            }
            _ => n,
        };
        let mut acts = Vec::with_capacity(self.model.layer_sizes.len());
        let order = std::mem::take(&mut self.order);
        for chunk in order.chunks(batch) {
            let (mut gw, mut gb) = self.model.zero_grads();
            let scale = 1.0 / chunk.len() as f64;
            let mut loss = 0.0;
            for &i in chunk {
                let logit = self.model.forward(self.z.row(i), &mut acts);
                let t = f64::from(self.y[i]);
                loss += bce_with_logit(logit, t);
                let mut g = sigmoid(logit) - t;
                if use_extra {
                    g += extra(i, logit);
                }
                self.model.backward(&acts, g * scale, &mut gw, &mut gb);
            }
            if !loss.is_finite() {
                self.order = order;
                return Err(Error::NonFiniteLoss {
                    epoch: self.epochs_run,
                });
            }
            let lr = self.cfg.learning_rate;
            let l2 = self.cfg.l2;
            for (w, g) in self.model.weights.iter_mut().zip(&gw) {
                for (wv, gv) in w.iter_mut().zip(g) {
                    *wv -= lr * (gv + 2.0 * l2 * *wv);
                }
            }
            for (b, g) in self.model.biases.iter_mut().zip(&gb) {
                for (bv, gv) in b.iter_mut().zip(g) {
                    *bv -= lr * gv;
                }
            }
        }
        self.order = order;
        let finite = self
            .model
            .weights
            .iter()
            .chain(&self.model.biases)
            .flatten()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFiniteLoss {
                epoch: self.epochs_run,
            });
        }
        self.epochs_run += 1;
        Ok(())
    }
}

/// Mini-batch gradient descent on binary cross-entropy.
pub fn fit_mlp(x: &Matrix, y: &[u8], hidden: &[usize], cfg: &TrainConfig) -> Result<MlpModel> {
    let mut trainer = MlpTrainer::new(x, y, hidden, cfg)?;
    for _ in 0..cfg.epochs {
        trainer.epoch()?;
    }
    Ok(trainer.into_model())
}
