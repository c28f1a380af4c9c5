use serde::{Deserialize, Serialize};

use super::randomized::{Component, RandomizedClassifier};
use crate::data::{SplitPlan, TabularDataset};
use crate::models::{fit_logreg, predict_hard, LinearModel, Model, TrainConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FairnessConstraint {
    /// `|P(Yhat=1 | S=s) - P(Yhat=1)| <= eps` for both groups.
    DemPar,
    /// `|P(Yhat=1 | S=s, Y=y) - P(Yhat=1 | Y=y)| <= eps` for all four cells.
    EqOdds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EgdConfig {
    pub constraint: FairnessConstraint,
    pub eps: f64,
    pub iterations: usize,
    pub eta: f64,
    /// Total multiplier mass.
    pub bound: f64,
    pub base_cfg: TrainConfig,
}

impl Default for EgdConfig {
    fn default() -> Self {
        Self {
            constraint: FairnessConstraint::DemPar,
            eps: 0.01,
            iterations: 50,
            eta: 1.0,
            bound: 100.0,
            base_cfg: TrainConfig::logreg(),
        }
    }
}

impl EgdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.eps) {
            return Err(Error::InvalidConfig("eps must lie in [0,1]".into()));
        }
        if self.iterations == 0 || self.iterations > 10_000 {
            return Err(Error::InvalidConfig(
                "iterations must lie in [1, 10000]".into(),
            ));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidConfig("eta must be positive".into()));
        }
        if !(self.bound > 0.0 && self.bound.is_finite()) {
            return Err(Error::InvalidConfig("bound must be positive".into()));
        }
        self.base_cfg.validate()
    }
}

/// Multipliers and constraint violations observed at each round.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EgdTrace {
    /// Multipliers after each update; the last coordinate is the slack.
    pub lambdas: Vec<Vec<f64>>,
    /// Signed constraint violations of each round's best response.
    pub violations: Vec<Vec<f64>>,
}

/// Constraint moments: each group `g` compares the positive rate of its
/// members against that of a reference population.
struct Moments {
    /// Group of each record for every moment (`member[g][i]`).
    member: Vec<Vec<bool>>,
    reference: Vec<Vec<bool>>,
    member_count: Vec<f64>,
    reference_count: Vec<f64>,
}

impl Moments {
    fn new(constraint: FairnessConstraint, s: &[u8], y: &[u8]) -> Result<Self> {
        let n = s.len();
        let keys: Vec<(u8, Option<u8>)> = match constraint {
            FairnessConstraint::DemPar => vec![(0, None), (1, None)],
            FairnessConstraint::EqOdds => {
                vec![(0, Some(0)), (0, Some(1)), (1, Some(0)), (1, Some(1))]
            }
        };
        let mut m = Moments {
            member: Vec::new(),
            reference: Vec::new(),
            member_count: Vec::new(),
            reference_count: Vec::new(),
        };
        for (g, cond) in keys {
            let member: Vec<bool> = (0..n)
                .map(|i| s[i] == g && cond.is_none_or(|c| y[i] == c))
                .collect();
            let reference: Vec<bool> = (0..n).map(|i| cond.is_none_or(|c| y[i] == c)).collect();
            let mc = member.iter().filter(|&&b| b).count();
            if mc == 0 {
                return Err(Error::DegenerateGroups(format!(
                    "no training records for s={g}{}",
                    cond.map_or(String::new(), |c| format!(", y={c}"))
                )));
            }
            m.member_count.push(mc as f64);
            m.reference_count
                .push(reference.iter().filter(|&&b| b).count() as f64);
            m.member.push(member);
            m.reference.push(reference);
        }
        Ok(m)
    }

    fn len(&self) -> usize {
        self.member.len()
    }

    /// `rate(members) - rate(reference)` per moment.
    fn gamma(&self, pred: &[u8]) -> Vec<f64> {
        (0..self.len())
            .map(|g| {
                let (mut a, mut b) = (0.0, 0.0);
                for (i, &p) in pred.iter().enumerate() {
                    let p = f64::from(p);
                    if self.member[g][i] {
                        a += p;
                    }
                    if self.reference[g][i] {
                        b += p;
                    }
                }
                a / self.member_count[g] - b / self.reference_count[g]
            })
            .collect()
    }

    /// Derivative of moment `g` with respect to predicting 1 on record `i`.
    fn partial(&self, g: usize, i: usize) -> f64 {
        let mut v = 0.0;
        if self.member[g][i] {
            v += 1.0 / self.member_count[g];
        }
        if self.reference[g][i] {
            v -= 1.0 / self.reference_count[g];
        }
        v
    }
}

/// Multipliers on a simplex of total mass `bound`, from log-weights.
fn project(theta: &[f64], bound: f64) -> Vec<f64> {
    let max = theta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = theta.iter().map(|t| (t - max).exp()).collect();
    let z: f64 = e.iter().sum();
    e.iter().map(|v| bound * v / z).collect()
}

/// Log-weights putting multiplier 1 (or an equal share, if `bound` is small)
/// on each of the `k - 1` constraints and the rest on the slack.
fn initial_log_weights(k: usize, bound: f64) -> Vec<f64> {
    let each = 1.0f64.min(bound / k as f64);
    let slack = bound - each * (k - 1) as f64;
    let mut theta = vec![each.ln(); k];
    theta[k - 1] = slack.ln();
    theta
}

pub fn egd_train(
    dataset: &TabularDataset,
    split: &SplitPlan,
    cfg: &EgdConfig,
) -> Result<RandomizedClassifier> {
    egd_train_traced(dataset, split, cfg).map(|(rc, _)| rc)
}

/// Exponentiated-gradient reduction on the training split.
///
/// Signed constraints `+gamma_g - eps <= 0` and `-gamma_g - eps <= 0` plus one
/// slack coordinate carry multipliers summing to `bound`. Each round fits a
/// weighted logistic regression as best response to the current Lagrangian,
/// then scales every multiplier by `exp(eta * violation)` and renormalizes.
/// Constraint multipliers start at 1 with the slack holding the remaining
/// mass, so the first rounds are close to unconstrained and only violated
/// constraints gain weight.
/// The result mixes the best responses uniformly (thresholds 0.5), merging
/// identical models.
pub fn egd_train_traced(
    dataset: &TabularDataset,
    split: &SplitPlan,
    cfg: &EgdConfig,
) -> Result<(RandomizedClassifier, EgdTrace)> {
    cfg.validate()?;
    split.validate(dataset.len())?;
    let train = dataset.subset(&split.tr);
    let (x, y, s) = (train.features(), train.labels(), train.sensitive());
    if !y.contains(&0) || !y.contains(&1) {
        return Err(Error::DegenerateGroups(
            "training labels contain a single class".into(),
        ));
    }
    let moments = Moments::new(cfg.constraint, s, y)?;
    let n = y.len();
    let k = 2 * moments.len() + 1;
    let mut theta = initial_log_weights(k, cfg.bound);
    let mut lambda = project(&theta, cfg.bound);
    let mut trace = EgdTrace::default();
    let mut responses: Vec<(LinearModel, usize)> = Vec::new();

    let mut labels = vec![0u8; n];
    let mut weights = vec![0.0; n];
    for _ in 0..cfg.iterations {
        // net multiplier per moment
        let mu: Vec<f64> = (0..moments.len())
            .map(|g| lambda[2 * g] - lambda[2 * g + 1])
            .collect();
        for i in 0..n {
            let err = if y[i] == 1 { -1.0 } else { 1.0 } / n as f64;
            let c: f64 = err
                + mu.iter()
                    .enumerate()
                    .map(|(g, m)| m * moments.partial(g, i))
                    .sum::<f64>();
            labels[i] = u8::from(c < 0.0);
            weights[i] = c.abs();
        }
        let model = if weights.iter().sum::<f64>() > 0.0 {
            fit_logreg(x, &labels, &weights, &cfg.base_cfg)?
        } else {
            fit_logreg(x, y, &vec![1.0; n], &cfg.base_cfg)?
        };
        let pred = predict_hard(&model, x, 0.5)?;
        let gamma = moments.gamma(&pred.0);
        let mut violation = Vec::with_capacity(k);
        for g in &gamma {
            violation.push(g - cfg.eps);
            violation.push(-g - cfg.eps);
        }
        violation.push(0.0);
        for (t, v) in theta.iter_mut().zip(&violation) {
            *t += cfg.eta * v;
        }
        lambda = project(&theta, cfg.bound);
        trace.lambdas.push(lambda.clone());
        trace.violations.push(violation);

        match responses.iter_mut().find(|(m, _)| *m == model) {
            Some((_, count)) => *count += 1,
            None => responses.push((model, 1)),
        }
    }

    let total = cfg.iterations as f64;
    let components = responses
        .into_iter()
        .map(|(m, count)| Component {
            model: Model::Linear(m),
            tau: 0.5,
            weight: count as f64 / total,
        })
        .collect();
    Ok((RandomizedClassifier::new(components)?, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_keeps_mass() {
        let l = project(&[0.3, -2.0, 700.0, 1.0, 0.0], 100.0);
        assert!(l.iter().all(|&v| v >= 0.0));
        assert!((l.iter().sum::<f64>() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn constraints_start_at_unit_weight() {
        let l = project(&initial_log_weights(5, 100.0), 100.0);
        for v in &l[..4] {
            assert!((v - 1.0).abs() < 1e-12);
        }
        assert!((l[4] - 96.0).abs() < 1e-9);
        let small = project(&initial_log_weights(5, 2.0), 2.0);
        assert!(small.iter().all(|v| (v - 0.4).abs() < 1e-12));
    }

    #[test]
    fn config_validation() {
        let bad = EgdConfig {
            eps: -0.1,
            ..EgdConfig::default()
        };
        assert!(matches!(bad.validate(), Err(Error::InvalidConfig(_))));
        let bad = EgdConfig {
            iterations: 0,
            ..EgdConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn moments_partial_matches_difference() {
        let s = [0, 0, 1, 1, 1];
        let y = [0, 1, 0, 1, 1];
        let m = Moments::new(FairnessConstraint::DemPar, &s, &y).unwrap();
        let base = [0u8, 1, 0, 0, 1];
        for i in 0..5 {
            let mut hi = base;
            let mut lo = base;
            hi[i] = 1;
            lo[i] = 0;
            for g in 0..m.len() {
                let d = m.gamma(&hi)[g] - m.gamma(&lo)[g];
                assert!((d - m.partial(g, i)).abs() < 1e-12);
            }
        }
    }
}
