use serde::{Deserialize, Serialize};

use super::joint::{
    direct_ba, dp_theorem_check, exact_attack_ba, formula_ba, make_eqodds_joint, random_joint,
    JointDistribution,
};
use crate::attacks::HardAttackFunction;
use crate::{Error, Result};

/// Which closed form the equalized-odds check compares against.
///
/// `Flipped` negates the bracket; it exists so that callers can confirm the
/// checker actually detects a wrong formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FormulaVariant {
    #[default]
    Correct,
    Flipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub cases: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    fn new(name: &str, cases: usize, max_deviation: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            cases,
            max_deviation,
            tolerance,
            passed: max_deviation <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub sweeps: usize,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

const GRID: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

/// Runs every identity over `sweeps` random tables plus a fixed parameter grid.
pub fn verify_theorems(
    sweeps: usize,
    seed: u64,
    variant: FormulaVariant,
) -> Result<VerificationReport> {
    if sweeps == 0 {
        return Err(Error::InvalidConfig("sweeps must be at least 1".into()));
    }
    let sign = match variant {
        FormulaVariant::Correct => 1.0,
        FormulaVariant::Flipped => -1.0,
    };
    let mut checks = Vec::new();

    // optimal hard attack vs (1 + dempar level) / 2, plus the fair projection of each table
    let (mut dev, mut fair_dev, mut swap_dev) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..sweeps as u64 {
        let JointDistribution::Two(j) = random_joint(seed.wrapping_add(k), 2)? else {
            unreachable!("requested a 2-D law")
        };
        let c = dp_theorem_check(&j);
        dev = dev.max((c.lhs - c.rhs).abs());
        swap_dev = swap_dev.max((c.lhs - exact_attack_ba(&j.swap_s()).1).abs());
        let fair = j.independent_version();
        fair_dev = fair_dev.max((exact_attack_ba(&fair).1 - 0.5).abs());
        // a non-fair table must be strictly attackable
        if j.dempar_level() > 1e-12 && c.lhs <= 0.5 {
            fair_dev = fair_dev.max(1.0);
        }
    }
    checks.push(CheckResult::new("dempar_bound_random", sweeps, dev, 1e-12));
    checks.push(CheckResult::new(
        "dempar_swap_invariance",
        sweeps,
        swap_dev,
        1e-12,
    ));
    checks.push(CheckResult::new(
        "dempar_half_iff_fair",
        sweeps,
        fair_dev,
        1e-12,
    ));

    // closed form on the grid and on random equalized-odds laws
    let mut grid_dev = 0.0f64;
    let mut half_dev = 0.0f64;
    let mut grid_cases = 0;
    for &p0 in &GRID {
        for &p1 in &GRID {
            for &tpr in &GRID {
                for &fpr in &GRID {
                    let j = make_eqodds_joint((p0, p1), 0.5, tpr, fpr)?;
                    for f in HardAttackFunction::ALL {
                        grid_dev = grid_dev.max((direct_ba(&j, f) - formula_ba(&j, f, sign)).abs());
                    }
                    let best = exact_attack_ba(&j.marginal_yhat_s()?).1;
                    let leaks = p0 != p1 && tpr != fpr;
                    half_dev = half_dev.max(if leaks {
                        if best > 0.5 {
                            0.0
                        } else {
                            1.0
                        }
                    } else {
                        (best - 0.5).abs()
                    });
                    grid_cases += 1;
                }
            }
        }
    }
    checks.push(CheckResult::new(
        "eqodds_closed_form_grid",
        grid_cases,
        grid_dev,
        1e-10,
    ));
    checks.push(CheckResult::new(
        "eqodds_half_iff",
        grid_cases,
        half_dev,
        1e-12,
    ));

    let mut rand_dev = 0.0f64;
    for k in 0..sweeps as u64 {
        let JointDistribution::Three(r) = random_joint(seed.wrapping_add(k), 3)? else {
            unreachable!("requested a 3-D law")
        };
        // reuse the random cell mass for the group/label law, random rates for the classifier
        let t = r.table();
        let (tpr, fpr) = (t[1][0][0] / r.p_s(0), t[1][1][1] / r.p_s(1));
        let j = make_eqodds_joint(
            (r.p_y_given_s(1, 0), r.p_y_given_s(1, 1)),
            r.p_s(1),
            tpr.clamp(0.0, 1.0),
            fpr.clamp(0.0, 1.0),
        )?;
        for f in HardAttackFunction::ALL {
            rand_dev = rand_dev.max((direct_ba(&j, f) - formula_ba(&j, f, sign)).abs());
        }
    }
    checks.push(CheckResult::new(
        "eqodds_closed_form_random",
        sweeps,
        rand_dev,
        1e-10,
    ));

    let passed = checks.iter().all(|c| c.passed);
    Ok(VerificationReport {
        sweeps,
        seed,
        checks,
        passed,
    })
}
