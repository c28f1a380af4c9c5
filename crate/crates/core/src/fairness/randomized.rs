use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::models::{predict_hard, Model, Scorer};
use crate::{Error, HardPredictions, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub model: Model,
    pub tau: f64,
    pub weight: f64,
}

/// Mixture `1_[tau_I, 1] o t_I` where component `I` is drawn with probability `weight`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawClassifier")]
pub struct RandomizedClassifier {
    components: Vec<Component>,
}

#[derive(Deserialize)]
struct RawClassifier {
    components: Vec<Component>,
}

impl TryFrom<RawClassifier> for RandomizedClassifier {
    type Error = Error;

    fn try_from(raw: RawClassifier) -> Result<Self> {
        RandomizedClassifier::new(raw.components)
    }
}

impl RandomizedClassifier {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::InvalidConfig(
                "mixture needs at least one component".into(),
            ));
        };
        let d = first.model.input_dim();
        for c in &components {
            if !(c.weight >= 0.0 && c.weight.is_finite()) {
                return Err(Error::InvalidConfig(
                    "mixture weights must be non-negative".into(),
                ));
            }
            if !(0.0..=1.0).contains(&c.tau) {
                return Err(Error::OutOfRange(c.tau));
            }
            if c.model.input_dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: c.model.input_dim(),
                });
            }
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "mixture weights sum to {total}"
            )));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn input_dim(&self) -> usize {
        self.components[0].model.input_dim()
    }

    fn component_predictions(&self, x: &Matrix) -> Result<Vec<HardPredictions>> {
        self.components
            .iter()
            .map(|c| predict_hard(&c.model, x, c.tau))
            .collect()
    }
}

/// Draws a component independently for every record, then thresholds it.
pub fn sample_prediction(
    rc: &RandomizedClassifier,
    x: &Matrix,
    seed: u64,
) -> Result<HardPredictions> {
    let preds = rc.component_predictions(x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let last = rc.components.len() - 1;
    let out = (0..x.rows())
        .map(|i| {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut pick = last;
            for (k, c) in rc.components.iter().enumerate() {
                acc += c.weight;
                if u < acc {
                    pick = k;
                    break;
                }
            }
            preds[pick].0[i]
        })
        .collect();
    Ok(HardPredictions(out))
}

/// Per-record probability of predicting 1 under the mixture.
pub fn expected_positive(rc: &RandomizedClassifier, x: &Matrix) -> Result<Vec<f64>> {
    let preds = rc.component_predictions(x)?;
    let mut out = vec![0.0; x.rows()];
    for (c, p) in rc.components.iter().zip(&preds) {
        for (o, &v) in out.iter_mut().zip(&p.0) {
            *o += c.weight * f64::from(v);
        }
    }
    Ok(out)
}

/// Exact `[P(Yhat=1 | S=0), P(Yhat=1 | S=1)]` under the mixture, no sampling.
pub fn expected_group_rates(rc: &RandomizedClassifier, x: &Matrix, s: &[u8]) -> Result<[f64; 2]> {
    if s.len() != x.rows() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            got: s.len(),
        });
    }
    let p = expected_positive(rc, x)?;
    let mut sum = [0.0; 2];
    let mut cnt = [0usize; 2];
    for (&v, &g) in p.iter().zip(s) {
        let g = usize::from(g == 1);
        sum[g] += v;
        cnt[g] += 1;
    }
    if cnt[0] == 0 || cnt[1] == 0 {
        return Err(Error::SingleClassSensitive);
    }
    Ok([sum[0] / cnt[0] as f64, sum[1] / cnt[1] as f64])
}
