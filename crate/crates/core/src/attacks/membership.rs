use crate::metrics::{balanced_accuracy, optimal_threshold, roc_curve};
use crate::{Error, Result, SoftPredictions};

/// Loss-threshold membership attack.
///
/// Each record is scored by a strictly decreasing map of its loss onto
/// (0, 1), so that low loss looks like a training member. Losses may be
/// negative (e.g. loss differences against a reference model). Positions alternate between a tuning half (even index)
/// and an evaluation half (odd index) within each class; the ROC-optimal
/// threshold from the tuning half is scored on the evaluation half.
/// Returns balanced accuracy.
/// `0.5 / (1 + l)` above zero, mirrored below; rational, so distinct losses
/// keep distinct scores where a logistic map would underflow.
fn squash(l: f64) -> f64 {
    if l >= 0.0 {
        0.5 / (1.0 + l)
    } else {
        1.0 - 0.5 / (1.0 - l)
    }
}

pub fn membership_inference(losses_members: &[f64], losses_nonmembers: &[f64]) -> Result<f64> {
    if losses_members.len() < 2 || losses_nonmembers.len() < 2 {
        return Err(Error::EmptyInput);
    }
    if losses_members
        .iter()
        .chain(losses_nonmembers)
        .any(|l| !l.is_finite())
    {
        return Err(Error::InvalidConfig("losses must be finite".into()));
    }
    let mut halves = [(Vec::new(), Vec::new()), (Vec::new(), Vec::new())];
    for (label, losses) in [(1u8, losses_members), (0u8, losses_nonmembers)] {
        for (i, &l) in losses.iter().enumerate() {
            let half = &mut halves[i % 2];
            half.0.push(squash(l));
            half.1.push(label);
        }
    }
    let [(tune_scores, tune_labels), (eval_scores, eval_labels)] = halves;
    let roc = roc_curve(&SoftPredictions(tune_scores), &tune_labels)?;
    let (threshold, _) = optimal_threshold(&roc);
    let pred = SoftPredictions(eval_scores).threshold(threshold);
    balanced_accuracy(&pred.0, &eval_labels)
}
