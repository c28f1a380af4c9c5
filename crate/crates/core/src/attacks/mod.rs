//! Attribute-inference attacks against soft and hard labels, and a
//! loss-threshold membership attack.
//!
//! The adversary holds an auxiliary set with known `S`, split into a tuning
//! half (`*_tr`) where the attack is fit and an evaluation half (`*_te`)
//! where balanced accuracy is reported.

mod membership;

pub use membership::membership_inference;

use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::metrics::{
    balanced_accuracy, dempar_level, optimal_threshold, roc_curve, theoretical_attack_bound,
};
use crate::models::{fit_logreg, fit_mlp, predict_soft, TrainConfig};
use crate::{Error, HardPredictions, Result, SoftPredictions};

/// The four maps `{0,1} -> {0,1}`, in tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HardAttackFunction {
    Const0,
    Identity,
    Complement,
    Const1,
}

impl HardAttackFunction {
    pub const ALL: [HardAttackFunction; 4] = [
        HardAttackFunction::Const0,
        HardAttackFunction::Identity,
        HardAttackFunction::Complement,
        HardAttackFunction::Const1,
    ];

    pub fn apply(self, x: u8) -> u8 {
        match self {
            HardAttackFunction::Const0 => 0,
            HardAttackFunction::Identity => x,
            HardAttackFunction::Complement => 1 - x,
            HardAttackFunction::Const1 => 1,
        }
    }

    pub fn apply_all(self, xs: &[u8]) -> Vec<u8> {
        xs.iter().map(|&x| self.apply(x)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackResult {
    /// Balanced accuracy on the tuning half.
    pub tuned_accuracy: f64,
    /// Balanced accuracy on the evaluation half.
    pub eval_accuracy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chosen_function: Option<HardAttackFunction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theoretical_bound: Option<f64>,
}

/// Learner mapping the 1-D target score to `P(S=1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum AttackModel {
    Logistic {
        cfg: TrainConfig,
    },
    Mlp {
        hidden: Vec<usize>,
        cfg: TrainConfig,
    },
}

impl Default for AttackModel {
    fn default() -> Self {
        AttackModel::Logistic {
            cfg: TrainConfig::logreg(),
        }
    }
}

fn require_both_groups(s: &[u8]) -> Result<()> {
    let ones = s.iter().filter(|&&v| v == 1).count();
    if ones == 0 || ones == s.len() {
        return Err(Error::SingleClassSensitive);
    }
    Ok(())
}

fn check_pair(pred_len: usize, s: &[u8]) -> Result<()> {
    if pred_len != s.len() {
        return Err(Error::DimensionMismatch {
            expected: s.len(),
            got: pred_len,
        });
    }
    require_both_groups(s)
}

/// Fits the attack model on tuning scores, returns its outputs on both halves.
fn attack_scores(
    scores_tr: &SoftPredictions,
    s_tr: &[u8],
    scores_te: &SoftPredictions,
    s_te: &[u8],
    model: &AttackModel,
) -> Result<(SoftPredictions, SoftPredictions)> {
    check_pair(scores_tr.len(), s_tr)?;
    check_pair(scores_te.len(), s_te)?;
    let x_tr = Matrix::column(&scores_tr.0);
    let x_te = Matrix::column(&scores_te.0);
    match model {
        AttackModel::Logistic { cfg } => {
            let m = fit_logreg(&x_tr, s_tr, &vec![1.0; s_tr.len()], cfg)?;
            Ok((predict_soft(&m, &x_tr)?, predict_soft(&m, &x_te)?))
        }
        AttackModel::Mlp { hidden, cfg } => {
            let m = fit_mlp(&x_tr, s_tr, hidden, cfg)?;
            Ok((predict_soft(&m, &x_tr)?, predict_soft(&m, &x_te)?))
        }
    }
}

fn thresholded_result(
    att_tr: &SoftPredictions,
    s_tr: &[u8],
    att_te: &SoftPredictions,
    s_te: &[u8],
    threshold: f64,
) -> Result<AttackResult> {
    Ok(AttackResult {
        tuned_accuracy: balanced_accuracy(&att_tr.threshold(threshold).0, s_tr)?,
        eval_accuracy: balanced_accuracy(&att_te.threshold(threshold).0, s_te)?,
        threshold: Some(threshold),
        chosen_function: None,
        theoretical_bound: None,
    })
}

/// Soft-label attack with a threshold tuned to the ROC point closest to `(0, 1)`.
pub fn adapt_aia_s(
    scores_tr: &SoftPredictions,
    s_tr: &[u8],
    scores_te: &SoftPredictions,
    s_te: &[u8],
    cfg: &TrainConfig,
) -> Result<AttackResult> {
    adapt_aia_s_with(
        scores_tr,
        s_tr,
        scores_te,
        s_te,
        &AttackModel::Logistic { cfg: cfg.clone() },
    )
}

pub fn adapt_aia_s_with(
    scores_tr: &SoftPredictions,
    s_tr: &[u8],
    scores_te: &SoftPredictions,
    s_te: &[u8],
    model: &AttackModel,
) -> Result<AttackResult> {
    let (att_tr, att_te) = attack_scores(scores_tr, s_tr, scores_te, s_te, model)?;
    let roc = roc_curve(&att_tr, s_tr)?;
    let (threshold, _) = optimal_threshold(&roc);
    thresholded_result(&att_tr, s_tr, &att_te, s_te, threshold)
}

/// Soft-label attack with the conventional fixed threshold 0.5.
pub fn baseline_aia(
    scores_tr: &SoftPredictions,
    s_tr: &[u8],
    scores_te: &SoftPredictions,
    s_te: &[u8],
    cfg: &TrainConfig,
) -> Result<AttackResult> {
    baseline_aia_with(
        scores_tr,
        s_tr,
        scores_te,
        s_te,
        &AttackModel::Logistic { cfg: cfg.clone() },
    )
}

pub fn baseline_aia_with(
    scores_tr: &SoftPredictions,
    s_tr: &[u8],
    scores_te: &SoftPredictions,
    s_te: &[u8],
    model: &AttackModel,
) -> Result<AttackResult> {
    let (att_tr, att_te) = attack_scores(scores_tr, s_tr, scores_te, s_te, model)?;
    thresholded_result(&att_tr, s_tr, &att_te, s_te, 0.5)
}

/// Hard-label attack: picks the best of the four binary maps on the tuning half.
pub fn adapt_aia_h(
    hard_tr: &HardPredictions,
    s_tr: &[u8],
    hard_te: &HardPredictions,
    s_te: &[u8],
) -> Result<AttackResult> {
    check_pair(hard_tr.len(), s_tr)?;
    check_pair(hard_te.len(), s_te)?;
    let mut best = (HardAttackFunction::Const0, f64::NEG_INFINITY);
    for f in HardAttackFunction::ALL {
        let ba = balanced_accuracy(&f.apply_all(&hard_tr.0), s_tr)?;
        if ba > best.1 {
            best = (f, ba);
        }
    }
    let (chosen, tuned) = best;
    let eval = balanced_accuracy(&chosen.apply_all(&hard_te.0), s_te)?;
    let bound = theoretical_attack_bound(dempar_level(hard_tr, s_tr)?)?;
    Ok(AttackResult {
        tuned_accuracy: tuned,
        eval_accuracy: eval,
        threshold: None,
        chosen_function: Some(chosen),
        theoretical_bound: Some(bound),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn counts_table(cells: &[(u8, u8, usize)]) -> (HardPredictions, Vec<u8>) {
        let mut pred = Vec::new();
        let mut s = Vec::new();
        for &(p, g, k) in cells {
            pred.extend(std::iter::repeat_n(p, k));
            s.extend(std::iter::repeat_n(g, k));
        }
        (HardPredictions(pred), s)
    }

    #[test]
    fn worked_hard_label_table() {
        let (pred, s) = counts_table(&[(1, 1, 40), (0, 1, 10), (1, 0, 15), (0, 0, 35)]);
        let r = adapt_aia_h(&pred, &s, &pred, &s).unwrap();
        assert_eq!(r.chosen_function, Some(HardAttackFunction::Identity));
        assert!((r.tuned_accuracy - 0.75).abs() < 1e-15);
        assert!((r.theoretical_bound.unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn dempar_predictions_give_coin_flip() {
        let (pred, s) = counts_table(&[(1, 1, 30), (0, 1, 10), (1, 0, 15), (0, 0, 5)]);
        let r = adapt_aia_h(&pred, &s, &pred, &s).unwrap();
        assert_eq!(r.tuned_accuracy, 0.5);
        assert_eq!(r.chosen_function, Some(HardAttackFunction::Const0));
    }

    #[test]
    fn complement_predictions() {
        let s = vec![0, 1, 1, 0, 1, 0];
        let pred = HardPredictions(s.iter().map(|v| 1 - v).collect());
        let r = adapt_aia_h(&pred, &s, &pred, &s).unwrap();
        assert_eq!(r.chosen_function, Some(HardAttackFunction::Complement));
        assert_eq!(r.eval_accuracy, 1.0);
    }

    #[test]
    fn soft_perfect_leak() {
        let s_tr: Vec<u8> = (0..60).map(|i| u8::from(i % 3 == 0)).collect();
        let s_te: Vec<u8> = (0..30).map(|i| u8::from(i % 4 == 0)).collect();
        let leak =
            |s: &[u8]| SoftPredictions(s.iter().map(|&v| 0.9 * f64::from(v) + 0.05).collect());
        let cfg = TrainConfig::logreg();
        let r = adapt_aia_s(&leak(&s_tr), &s_tr, &leak(&s_te), &s_te, &cfg).unwrap();
        assert_eq!(r.eval_accuracy, 1.0);
        let b = baseline_aia(&leak(&s_tr), &s_tr, &leak(&s_te), &s_te, &cfg).unwrap();
        assert_eq!(b.eval_accuracy, 1.0);
        assert_eq!(b.threshold, Some(0.5));
    }

    #[test]
    fn soft_no_signal() {
        let s: Vec<u8> = (0..50).map(|i| u8::from(i % 5 == 0)).collect();
        let flat = SoftPredictions(vec![0.5; 50]);
        let cfg = TrainConfig::logreg();
        let r = adapt_aia_s(&flat, &s, &flat, &s, &cfg).unwrap();
        assert_eq!(r.eval_accuracy, 0.5);
        assert!(r.tuned_accuracy >= 0.5);
        let b = baseline_aia(&flat, &s, &flat, &s, &cfg).unwrap();
        assert_eq!(b.eval_accuracy, 0.5);
    }

    #[test]
    fn single_group_rejected() {
        let p = HardPredictions(vec![0, 1]);
        assert!(matches!(
            adapt_aia_h(&p, &[1, 1], &p, &[0, 1]),
            Err(Error::SingleClassSensitive)
        ));
        let sp = SoftPredictions(vec![0.2, 0.4]);
        assert!(matches!(
            adapt_aia_s(&sp, &[0, 1], &sp, &[0, 0], &TrainConfig::logreg()),
            Err(Error::SingleClassSensitive)
        ));
    }

    proptest! {
        #[test]
        fn tuned_equals_bound_and_swap_invariance(
            v in (4usize..120).prop_flat_map(|n| (
                proptest::collection::vec(0u8..2, n),
                proptest::collection::vec(0u8..2, n),
            ))
        ) {
            let (pred, mut s) = v;
            s[0] = 0;
            s[1] = 1;
            let pred = HardPredictions(pred);
            let r = adapt_aia_h(&pred, &s, &pred, &s).unwrap();
            prop_assert!(r.tuned_accuracy >= 0.5);
            let level = dempar_level(&pred, &s).unwrap();
            prop_assert!((r.tuned_accuracy - 0.5 * (1.0 + level)).abs() < 1e-12);

            let swapped: Vec<u8> = s.iter().map(|g| 1 - g).collect();
            let q = adapt_aia_h(&pred, &swapped, &pred, &swapped).unwrap();
            prop_assert!((q.tuned_accuracy - r.tuned_accuracy).abs() < 1e-12);
            let expected = match r.chosen_function.unwrap() {
                HardAttackFunction::Identity => HardAttackFunction::Complement,
                HardAttackFunction::Complement => HardAttackFunction::Identity,
                other => other,
            };
            prop_assert_eq!(q.chosen_function.unwrap(), expected);
        }
    }
}
