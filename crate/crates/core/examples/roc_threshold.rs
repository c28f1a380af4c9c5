//! ROC operating points and the threshold closest to the perfect corner.

use fairleak::metrics::{optimal_threshold, roc_curve};
use fairleak::SoftPredictions;

fn main() -> fairleak::Result<()> {
    let scores = SoftPredictions(vec![0.05, 0.2, 0.35, 0.4, 0.55, 0.6, 0.8, 0.9]);
    let labels = [0, 0, 1, 0, 1, 0, 1, 1];
    let roc = roc_curve(&scores, &labels)?;
    roc.write_csv(std::io::stdout())?;
    let (upsilon, objective) = optimal_threshold(&roc);
    println!("best threshold {upsilon:.3} ((1-TPR)^2 + FPR^2 = {objective:.3})");
    Ok(())
}
