//! Exact calculations on finite joint laws of `(Yhat, S)` and `(Yhat, S, Y)`.
//!
//! These are independent of any trained model and serve as the reference
//! for the attack/fairness identities checked elsewhere in the crate.

mod joint;
mod verify;

pub use joint::{
    dp_theorem_check, eqodds_attack_ba, eqodds_closed_form, exact_attack_ba, joint_from_counts,
    make_eqodds_joint, random_joint, ClosedForm, CountTable, JointDistribution, JointDistribution2,
    JointDistribution3, TheoremCheck,
};
pub use verify::{verify_theorems, CheckResult, FormulaVariant, VerificationReport};
