use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, SoftPredictions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub upsilon: f64,
    pub fpr: f64,
    pub tpr: f64,
}

impl RocPoint {
    /// Squared distance to the perfect operating point `(fpr, tpr) = (0, 1)`.
    pub fn objective(&self) -> f64 {
        (1.0 - self.tpr).powi(2) + self.fpr.powi(2)
    }
}

/// Operating points at every distinct confusion matrix, ascending in threshold.
///
/// Candidates are `0`, the midpoints between adjacent distinct scores, and a
/// sentinel just above 1; a record is predicted positive when its score is
/// at least the threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
}

/// Threshold above every score in [0,1].
pub const SENTINEL: f64 = 1.0 + f64::EPSILON;

impl RocCurve {
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "upsilon,fpr,tpr")?;
        for p in &self.points {
            writeln!(w, "{},{},{}", p.upsilon, p.fpr, p.tpr)?;
        }
        Ok(())
    }
}

pub fn roc_curve(scores: &SoftPredictions, positives: &[u8]) -> Result<RocCurve> {
    let s = &scores.0;
    if s.len() != positives.len() {
        return Err(Error::DimensionMismatch {
            expected: s.len(),
            got: positives.len(),
        });
    }
    let n_pos = positives.iter().filter(|&&p| p == 1).count();
    let n_neg = positives.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClassActual);
    }
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[a].total_cmp(&s[b]));

    // Walk distinct score values ascending; `above_*` counts records at or
    // above the current value.
    let mut points = vec![RocPoint {
        upsilon: 0.0,
        fpr: 1.0,
        tpr: 1.0,
    }];
    let (mut above_pos, mut above_neg) = (n_pos, n_neg);
    let mut i = 0;
    while i < order.len() {
        let v = s[order[i]];
        let mut j = i;
        while j < order.len() && s[order[j]] == v {
            if positives[order[j]] == 1 {
                above_pos -= 1;
            } else {
                above_neg -= 1;
            }
            j += 1;
        }
        if j < order.len() {
            let next = s[order[j]];
            let mid = 0.5 * (v + next);
            points.push(RocPoint {
                upsilon: if mid > v { mid } else { next },
                fpr: above_neg as f64 / n_neg as f64,
                tpr: above_pos as f64 / n_pos as f64,
            });
        }
        i = j;
    }
    points.push(RocPoint {
        upsilon: SENTINEL,
        fpr: 0.0,
        tpr: 0.0,
    });
    Ok(RocCurve { points })
}

/// `argmin (1 - TPR)^2 + FPR^2` over the curve; ties go to the smallest threshold.
pub fn optimal_threshold(roc: &RocCurve) -> (f64, f64) {
    let mut best = (f64::NAN, f64::INFINITY);
    for p in &roc.points {
        let obj = p.objective();
        if obj < best.1 {
            best = (p.upsilon, obj);
        }
    }
    best
}
