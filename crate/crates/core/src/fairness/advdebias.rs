use serde::{Deserialize, Serialize};

use crate::data::{SplitPlan, TabularDataset};
use crate::linalg::{sigmoid, Matrix};
use crate::models::{MlpModel, MlpTrainer, TrainConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvDebiasConfig {
    /// Weight of the discriminator loss subtracted from the task loss.
    pub adversary_weight: f64,
    /// Target epochs per round.
    pub target_steps: usize,
    /// Discriminator gradient steps per round.
    pub disc_steps: usize,
    pub rounds: usize,
    pub hidden: Vec<usize>,
    pub target_cfg: TrainConfig,
    pub disc_cfg: TrainConfig,
}

impl Default for AdvDebiasConfig {
    fn default() -> Self {
        Self {
            adversary_weight: 1.0,
            target_steps: 5,
            disc_steps: 20,
            rounds: 100,
            hidden: vec![32, 32, 32, 32],
            target_cfg: TrainConfig::default(),
            disc_cfg: TrainConfig {
                learning_rate: 1.0,
                ..TrainConfig::default()
            },
        }
    }
}

impl AdvDebiasConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=100.0).contains(&self.adversary_weight) {
            return Err(Error::InvalidConfig(
                "adversary_weight must lie in [0, 100]".into(),
            ));
        }
        if self.rounds == 0 {
            return Err(Error::InvalidConfig("rounds must be positive".into()));
        }
        self.target_cfg.validate()?;
        self.disc_cfg.validate()
    }

    /// Total target epochs, i.e. the budget of the equivalent plain training run.
    pub fn target_epochs(&self) -> usize {
        self.rounds * self.target_steps
    }
}

/// Logistic discriminator on the 1-D soft label: `P(S=1) = sigmoid(a * p + c)`.
#[derive(Debug, Clone, Copy, Default)]
struct Discriminator {
    a: f64,
    c: f64,
}

impl Discriminator {
    fn step(&mut self, scores: &[f64], s: &[u8], w: &[f64], lr: f64, l2: f64) {
        let (mut ga, mut gc) = (0.0, 0.0);
        for ((&p, &t), &wi) in scores.iter().zip(s).zip(w) {
            let e = wi * (sigmoid(self.a * p + self.c) - f64::from(t));
            ga += e * p;
            gc += e;
        }
        let n = scores.len() as f64;
        self.a -= lr * (ga / n + 2.0 * l2 * self.a);
        self.c -= lr * gc / n;
    }
}

/// Alternates discriminator updates (predict `S` from the target's soft
/// label) with target epochs on `task loss - alpha * discriminator loss`,
/// the discriminator frozen during the target phase. The discriminator loss
/// weights both groups equally.
pub fn advdebias_train(
    dataset: &TabularDataset,
    split: &SplitPlan,
    cfg: &AdvDebiasConfig,
) -> Result<MlpModel> {
    cfg.validate()?;
    split.validate(dataset.len())?;
    let train = dataset.subset(&split.tr);
    let s = train.sensitive();
    if !s.contains(&0) || !s.contains(&1) {
        return Err(Error::SingleClassSensitive);
    }
    let x: &Matrix = train.features();
    let mut trainer = MlpTrainer::new(x, train.labels(), &cfg.hidden, &cfg.target_cfg)?;
    let adversarial = cfg.adversary_weight > 0.0;
    let mut disc = Discriminator::default();
    // class-balanced weights (mean 1): the attack is scored by balanced accuracy
    let n1 = s.iter().filter(|&&v| v == 1).count() as f64;
    let group = [s.len() as f64 - n1, n1];
    let w: Vec<f64> = s
        .iter()
        .map(|&v| s.len() as f64 / (2.0 * group[v as usize]))
        .collect();
    let alpha = cfg.adversary_weight;

    for _ in 0..cfg.rounds {
        if adversarial {
            let scores: Vec<f64> = trainer.train_logits().into_iter().map(sigmoid).collect();
            for _ in 0..cfg.disc_steps {
                disc.step(&scores, s, &w, cfg.disc_cfg.learning_rate, cfg.disc_cfg.l2);
            }
            if !(disc.a.is_finite() && disc.c.is_finite()) {
                return Err(Error::NonFiniteLoss {
                    epoch: trainer.epochs_run(),
                });
            }
        }
        let d = disc;
        for _ in 0..cfg.target_steps {
            // d/dlogit of -alpha * bce(s, sigmoid(a * p + c)), p = sigmoid(logit)
            trainer.epoch_with(
                |i, logit| {
                    let p = sigmoid(logit);
                    let e = sigmoid(d.a * p + d.c) - f64::from(s[i]);
                    -alpha * w[i] * e * d.a * p * (1.0 - p)
                },
                adversarial,
            )?;
        }
    }
    Ok(trainer.into_model())
}
