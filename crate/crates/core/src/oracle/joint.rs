use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::attacks::HardAttackFunction;
use crate::{Error, Result};

const SUM_TOL: f64 = 1e-12;

/// Law of `(Yhat, S)`, indexed `p[yhat][s]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution2 {
    p: [[f64; 2]; 2],
}

/// Law of `(Yhat, S, Y)`, indexed `p[yhat][s][y]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution3 {
    p: [[[f64; 2]; 2]; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum JointDistribution {
    Two(JointDistribution2),
    Three(JointDistribution3),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountTable {
    Two([[u64; 2]; 2]),
    Three([[[u64; 2]; 2]; 2]),
}

fn check_entries<'a>(values: impl Iterator<Item = &'a f64>) -> Result<()> {
    let mut sum = 0.0;
    for &v in values {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::InvalidJoint(format!(
                "negative or non-finite entry {v}"
            )));
        }
        sum += v;
    }
    if (sum - 1.0).abs() > SUM_TOL {
        return Err(Error::InvalidJoint(format!("entries sum to {sum}")));
    }
    Ok(())
}

impl JointDistribution2 {
    pub fn new(p: [[f64; 2]; 2]) -> Result<Self> {
        check_entries(p.iter().flatten())?;
        let j = Self { p };
        if j.p_s(0) <= 0.0 || j.p_s(1) <= 0.0 {
            return Err(Error::InvalidJoint("an S-marginal is zero".into()));
        }
        Ok(j)
    }

    pub fn table(&self) -> [[f64; 2]; 2] {
        self.p
    }

    pub fn p_s(&self, s: usize) -> f64 {
        self.p[0][s] + self.p[1][s]
    }

    /// `P(Yhat = yhat | S = s)`.
    pub fn cond(&self, yhat: usize, s: usize) -> f64 {
        self.p[yhat][s] / self.p_s(s)
    }

    pub fn dempar_level(&self) -> f64 {
        (self.cond(1, 1) - self.cond(1, 0)).abs()
    }

    /// Relabels `S <-> 1 - S`.
    pub fn swap_s(&self) -> Self {
        Self {
            p: [[self.p[0][1], self.p[0][0]], [self.p[1][1], self.p[1][0]]],
        }
    }

    /// Product of the marginals: the closest table satisfying demographic parity.
    pub fn independent_version(&self) -> Self {
        let py1 = self.p[1][0] + self.p[1][1];
        let ps = [self.p_s(0), self.p_s(1)];
        Self {
            p: [
                [(1.0 - py1) * ps[0], (1.0 - py1) * ps[1]],
                [py1 * ps[0], py1 * ps[1]],
            ],
        }
    }
}

impl JointDistribution3 {
    pub fn new(p: [[[f64; 2]; 2]; 2]) -> Result<Self> {
        check_entries(p.iter().flatten().flatten())?;
        let j = Self { p };
        if j.p_s(0) <= 0.0 || j.p_s(1) <= 0.0 {
            return Err(Error::InvalidJoint("an S-marginal is zero".into()));
        }
        Ok(j)
    }

    pub fn table(&self) -> [[[f64; 2]; 2]; 2] {
        self.p
    }

    pub fn p_s(&self, s: usize) -> f64 {
        (0..2)
            .flat_map(|yh| (0..2).map(move |y| (yh, y)))
            .map(|(yh, y)| self.p[yh][s][y])
            .sum()
    }

    pub fn p_sy(&self, s: usize, y: usize) -> f64 {
        self.p[0][s][y] + self.p[1][s][y]
    }

    /// `P(Y = y | S = s)`.
    pub fn p_y_given_s(&self, y: usize, s: usize) -> f64 {
        self.p_sy(s, y) / self.p_s(s)
    }

    fn require_cells(&self) -> Result<()> {
        for s in 0..2 {
            for y in 0..2 {
                if self.p_sy(s, y) <= 0.0 {
                    return Err(Error::DegenerateCell(format!("P(S={s}, Y={y}) = 0")));
                }
            }
        }
        Ok(())
    }

    /// `P(Yhat = 1 | S = s, Y = y)`.
    pub fn positive_rate(&self, s: usize, y: usize) -> f64 {
        self.p[1][s][y] / self.p_sy(s, y)
    }

    /// Largest across-group gap of `P(Yhat=1 | S, Y=y)`.
    pub fn eqodds_gap(&self) -> Result<f64> {
        self.require_cells()?;
        Ok((0..2)
            .map(|y| (self.positive_rate(0, y) - self.positive_rate(1, y)).abs())
            .fold(0.0, f64::max))
    }

    /// Marginal law of `(Yhat, S)`.
    pub fn marginal_yhat_s(&self) -> Result<JointDistribution2> {
        let mut p = [[0.0; 2]; 2];
        for (yh, row) in p.iter_mut().enumerate() {
            for (s, v) in row.iter_mut().enumerate() {
                *v = self.p[yh][s][0] + self.p[yh][s][1];
            }
        }
        JointDistribution2::new(p)
    }
}

fn normalize<const N: usize>(counts: [u64; N]) -> Result<[f64; N]> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::ZeroTotal);
    }
    Ok(counts.map(|c| c as f64 / total as f64))
}

/// Normalizes a table of counts.
pub fn joint_from_counts(counts: CountTable) -> Result<JointDistribution> {
    match counts {
        CountTable::Two(c) => {
            let f = normalize([c[0][0], c[0][1], c[1][0], c[1][1]])?;
            JointDistribution2::new([[f[0], f[1]], [f[2], f[3]]]).map(JointDistribution::Two)
        }
        CountTable::Three(c) => {
            let flat: Vec<u64> = c.iter().flatten().flatten().copied().collect();
            let f = normalize::<8>(flat.try_into().expect("eight cells"))?;
            JointDistribution3::new([[[f[0], f[1]], [f[2], f[3]]], [[f[4], f[5]], [f[6], f[7]]]])
                .map(JointDistribution::Three)
        }
    }
}

fn ba_of(attack: HardAttackFunction, j: &JointDistribution2) -> f64 {
    // P(b(Yhat) = target | S = s) summed over the yhat values that map to target
    let hit = |s: usize, target: u8| -> f64 {
        (0..2u8)
            .filter(|&yh| attack.apply(yh) == target)
            .map(|yh| j.cond(yh as usize, s))
            .sum()
    };
    0.5 * (hit(0, 0) + hit(1, 1))
}

/// Best balanced accuracy over the four maps `{0,1} -> {0,1}`, by enumeration.
pub fn exact_attack_ba(j: &JointDistribution2) -> (HardAttackFunction, f64) {
    let mut best = (HardAttackFunction::Const0, f64::NEG_INFINITY);
    for f in HardAttackFunction::ALL {
        let ba = ba_of(f, j);
        if ba > best.1 {
            best = (f, ba);
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub equal: bool,
}

/// Compares the enumerated attack optimum with `(1 + dempar level) / 2`.
pub fn dp_theorem_check(j: &JointDistribution2) -> TheoremCheck {
    let lhs = exact_attack_ba(j).1;
    let rhs = 0.5 * (1.0 + j.dempar_level());
    TheoremCheck {
        lhs,
        rhs,
        equal: (lhs - rhs).abs() < SUM_TOL,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub direct_ba: f64,
    pub formula_ba: f64,
}

/// Balanced accuracy of `attack o Yhat` under an equalized-odds law, computed
/// from the table and from the closed form
/// `1/2 + 1/2 (P(Y=0|S=0) - P(Y=0|S=1)) (P(Shat=1|S=1,Y=1) - P(Shat=1|S=1,Y=0))`.
pub fn eqodds_closed_form(
    j: &JointDistribution3,
    attack: HardAttackFunction,
) -> Result<ClosedForm> {
    let gap = j.eqodds_gap()?;
    if gap >= SUM_TOL {
        return Err(Error::NotEqOdds(gap));
    }
    Ok(ClosedForm {
        direct_ba: direct_ba(j, attack),
        formula_ba: formula_ba(j, attack, 1.0),
    })
}

pub(crate) fn direct_ba(j: &JointDistribution3, attack: HardAttackFunction) -> f64 {
    let p = j.table();
    let mut hit = [0.0; 2];
    for (yh, plane) in p.iter().enumerate() {
        let shat = attack.apply(yh as u8) as usize;
        for (s, row) in plane.iter().enumerate() {
            if shat == s {
                hit[s] += row[0] + row[1];
            }
        }
    }
    0.5 * (hit[0] / j.p_s(0) + hit[1] / j.p_s(1))
}

/// Closed form with the bracket multiplied by `sign` (1 is correct).
pub(crate) fn formula_ba(j: &JointDistribution3, attack: HardAttackFunction, sign: f64) -> f64 {
    let shat1 = |s: usize, y: usize| -> f64 {
        (0..2u8)
            .filter(|&yh| attack.apply(yh) == 1)
            .map(|yh| j.table()[yh as usize][s][y])
            .sum::<f64>()
            / j.p_sy(s, y)
    };
    let dep = j.p_y_given_s(0, 0) - j.p_y_given_s(0, 1);
    0.5 + 0.5 * dep * sign * (shat1(1, 1) - shat1(1, 0))
}

/// Best hard-label attack balanced accuracy on the `(Yhat, S)` marginal of `j`.
pub fn eqodds_attack_ba(j: &JointDistribution3) -> Result<(HardAttackFunction, f64)> {
    Ok(exact_attack_ba(&j.marginal_yhat_s()?))
}

fn unit(v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::OutOfRange(v));
    }
    Ok(())
}

/// Law with group-independent TPR and FPR:
/// `P(Yhat=1 | S, Y=1) = tpr`, `P(Yhat=1 | S, Y=0) = fpr`.
///
/// `p_y_given_s = (P(Y=1|S=0), P(Y=1|S=1))`.
pub fn make_eqodds_joint(
    p_y_given_s: (f64, f64),
    p_s1: f64,
    tpr: f64,
    fpr: f64,
) -> Result<JointDistribution3> {
    for v in [p_y_given_s.0, p_y_given_s.1, p_s1, tpr, fpr] {
        unit(v)?;
    }
    let ps = [1.0 - p_s1, p_s1];
    let py1 = [p_y_given_s.0, p_y_given_s.1];
    let rate = [fpr, tpr];
    let mut p = [[[0.0; 2]; 2]; 2];
    for s in 0..2 {
        for y in 0..2 {
            let cell = ps[s] * if y == 1 { py1[s] } else { 1.0 - py1[s] };
            if cell <= 0.0 {
                return Err(Error::DegenerateCell(format!("P(S={s}, Y={y}) = 0")));
            }
            p[1][s][y] = cell * rate[y];
            p[0][s][y] = cell * (1.0 - rate[y]);
        }
    }
    JointDistribution3::new(p)
}

/// Seeded random law from normalized exponential variates, redrawn until every
/// required marginal is at least 1e-6 (S-marginals in 2-D, `(S, Y)` cells in 3-D).
pub fn random_joint(seed: u64, dims: usize) -> Result<JointDistribution> {
    if dims != 2 && dims != 3 {
        return Err(Error::InvalidConfig(format!(
            "dims must be 2 or 3, got {dims}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let k = if dims == 2 { 4 } else { 8 };
        let raw: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = raw.iter().sum();
        let f: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let candidate = if dims == 2 {
            JointDistribution2::new([[f[0], f[1]], [f[2], f[3]]]).map(JointDistribution::Two)
        } else {
            JointDistribution3::new([[[f[0], f[1]], [f[2], f[3]]], [[f[4], f[5]], [f[6], f[7]]]])
                .map(JointDistribution::Three)
        };
        let ok = match &candidate {
            Ok(JointDistribution::Two(j)) => j.p_s(0) >= 1e-6 && j.p_s(1) >= 1e-6,
            Ok(JointDistribution::Three(j)) => (0..4).all(|c| j.p_sy(c / 2, c % 2) >= 1e-6),
            Err(_) => false,
        };
        if ok {
            return candidate;
        }
    }
}
