//! Exact checks on finite joint distributions.
//!
//! Under demographic-parity level `d` the best hard-label attack has
//! balanced accuracy `(1 + d) / 2`; under equalized odds the attack is a
//! product of the label dependency and the classifier's TPR/FPR separation.

use fairleak::attacks::HardAttackFunction;
use fairleak::oracle::{
    eqodds_closed_form, exact_attack_ba, make_eqodds_joint, verify_theorems, FormulaVariant,
    JointDistribution2,
};

fn main() -> fairleak::Result<()> {
    // rows: yhat, columns: s
    let j = JointDistribution2::new([[0.30, 0.10], [0.20, 0.40]])?;
    let (f, ba) = exact_attack_ba(&j);
    println!(
        "dp level {:.2}: best attack {f:?} reaches {ba:.2}",
        j.dempar_level()
    );

    let eo = make_eqodds_joint((0.2, 0.5), 0.5, 0.9, 0.1)?;
    let cf = eqodds_closed_form(&eo, HardAttackFunction::Identity)?;
    println!(
        "equalized odds: direct {:.4}, closed form {:.4}",
        cf.direct_ba, cf.formula_ba
    );

    for variant in [FormulaVariant::Correct, FormulaVariant::Flipped] {
        let report = verify_theorems(200, 7, variant)?;
        println!(
            "{variant:?}: {}",
            if report.passed {
                "all checks pass"
            } else {
                "caught"
            }
        );
        for c in report.checks.iter().filter(|c| !c.passed) {
            println!("  {} deviates by {:.3e}", c.name, c.max_deviation);
        }
    }
    Ok(())
}
