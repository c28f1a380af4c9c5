//! Balanced accuracy, ROC threshold search and group-fairness metrics.

mod roc;

pub use roc::{optimal_threshold, roc_curve, RocCurve, RocPoint};

use serde::{Deserialize, Serialize};

use crate::{Error, HardPredictions, Result};

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            expected: a,
            got: b,
        });
    }
    Ok(())
}

/// `(P(pred=0 | actual=0) + P(pred=1 | actual=1)) / 2`.
pub fn balanced_accuracy(predicted: &[u8], actual: &[u8]) -> Result<f64> {
    check_len(actual.len(), predicted.len())?;
    let mut hit = [0usize; 2];
    let mut tot = [0usize; 2];
    for (&p, &a) in predicted.iter().zip(actual) {
        let a = usize::from(a == 1);
        tot[a] += 1;
        if usize::from(p == 1) == a {
            hit[a] += 1;
        }
    }
    if tot[0] == 0 || tot[1] == 0 {
        return Err(Error::SingleClassActual);
    }
    Ok(0.5 * (hit[0] as f64 / tot[0] as f64 + hit[1] as f64 / tot[1] as f64))
}

/// Plain accuracy of hard predictions.
pub fn accuracy(predicted: &[u8], actual: &[u8]) -> Result<f64> {
    check_len(actual.len(), predicted.len())?;
    if actual.is_empty() {
        return Err(Error::EmptyInput);
    }
    let hits = predicted.iter().zip(actual).filter(|(p, a)| p == a).count();
    Ok(hits as f64 / actual.len() as f64)
}

/// `[P(pred=1 | S=0), P(pred=1 | S=1)]`.
pub fn group_positive_rates(pred: &[u8], s: &[u8]) -> Result<[f64; 2]> {
    check_len(s.len(), pred.len())?;
    let mut pos = [0usize; 2];
    let mut tot = [0usize; 2];
    for (&p, &g) in pred.iter().zip(s) {
        let g = usize::from(g == 1);
        tot[g] += 1;
        pos[g] += usize::from(p == 1);
    }
    if tot[0] == 0 || tot[1] == 0 {
        return Err(Error::SingleClassSensitive);
    }
    Ok([pos[0] as f64 / tot[0] as f64, pos[1] as f64 / tot[1] as f64])
}

/// `|P(pred=1 | S=1) - P(pred=1 | S=0)|`.
pub fn dempar_level(pred: &HardPredictions, s: &[u8]) -> Result<f64> {
    let r = group_positive_rates(&pred.0, s)?;
    Ok((r[1] - r[0]).abs())
}

/// `P(pred=1 | S=s, Y=y)` indexed `[s][y]`.
pub fn conditional_positive_rates(pred: &[u8], s: &[u8], y: &[u8]) -> Result<[[f64; 2]; 2]> {
    check_len(s.len(), pred.len())?;
    check_len(s.len(), y.len())?;
    let mut pos = [[0usize; 2]; 2];
    let mut tot = [[0usize; 2]; 2];
    for ((&p, &g), &t) in pred.iter().zip(s).zip(y) {
        let (g, t) = (usize::from(g == 1), usize::from(t == 1));
        tot[g][t] += 1;
        pos[g][t] += usize::from(p == 1);
    }
    let mut out = [[0.0; 2]; 2];
    for g in 0..2 {
        for t in 0..2 {
            if tot[g][t] == 0 {
                return Err(Error::EmptyCell {
                    s: g as u8,
                    y: t as u8,
                });
            }
            out[g][t] = pos[g][t] as f64 / tot[g][t] as f64;
        }
    }
    Ok(out)
}

/// Largest across-group gap in `P(pred=yhat | S, Y=y)` over `(yhat, y)`.
pub fn eqodds_gap(pred: &HardPredictions, s: &[u8], y: &[u8]) -> Result<f64> {
    let r = conditional_positive_rates(&pred.0, s, y)?;
    Ok((r[0][0] - r[1][0]).abs().max((r[0][1] - r[1][1]).abs()))
}

/// `|P(Y=0 | S=0) - P(Y=0 | S=1)|`.
pub fn dependency_ys(y: &[u8], s: &[u8]) -> Result<f64> {
    let ones = group_positive_rates(y, s)?;
    Ok(((1.0 - ones[0]) - (1.0 - ones[1])).abs())
}

/// Best balanced accuracy reachable by a hard-label attack at a given
/// demographic-parity level: `(1 + level) / 2`.
pub fn theoretical_attack_bound(dempar_level: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&dempar_level) {
        return Err(Error::OutOfRange(dempar_level));
    }
    Ok(0.5 * (1.0 + dempar_level))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRates {
    /// `P(pred=1 | S=s)` for s = 0, 1.
    pub positive_given_s: [f64; 2],
    /// `P(pred=1 | S=s, Y=y)` indexed `[s][y]`; `P(pred=0 | .)` is the complement.
    pub positive_given_s_y: [[f64; 2]; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessSummary {
    pub dempar_level: f64,
    pub eqodds_gap: f64,
    pub dependency_ys: f64,
    pub group_rates: GroupRates,
}

pub fn fairness_summary(pred: &HardPredictions, s: &[u8], y: &[u8]) -> Result<FairnessSummary> {
    let positive_given_s = group_positive_rates(&pred.0, s)?;
    let positive_given_s_y = conditional_positive_rates(&pred.0, s, y)?;
    Ok(FairnessSummary {
        dempar_level: (positive_given_s[1] - positive_given_s[0]).abs(),
        eqodds_gap: eqodds_gap(pred, s, y)?,
        dependency_ys: dependency_ys(y, s)?,
        group_rates: GroupRates {
            positive_given_s,
            positive_given_s_y,
        },
    })
}
