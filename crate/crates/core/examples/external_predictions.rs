//! Auditing an external model from its predictions alone.
//!
//! Writes a predictions CSV (score, sensitive attribute, label) as another
//! toolkit might, then attacks it without access to the model.

use fairleak::cli::{attack_predictions, AuditConfig, SeedPlan};
use fairleak::data::{load_predictions_csv, write_predictions_csv, PredictionFile, Predictions};
use fairleak::SoftPredictions;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> fairleak::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sensitive: Vec<u8> = (0..1000).map(|_| u8::from(rng.gen_bool(0.7))).collect();
    // scores drift upward for s = 1
    let scores: Vec<f64> = sensitive
        .iter()
        .map(|&s| (rng.gen_range(0.0..0.8) + 0.2 * f64::from(s)).min(1.0))
        .collect();
    let file = PredictionFile {
        predictions: Predictions::Soft(SoftPredictions(scores)),
        sensitive,
        labels: None,
    };

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("predictions.csv");
    write_predictions_csv(&file, &path)?;
    let loaded = load_predictions_csv(&path)?;

    let table = attack_predictions(&loaded, &AuditConfig::default(), &SeedPlan::from_base(5))?;
    for (name, rec) in &table {
        println!("{name:<12} eval BA {:.3}", rec.result.eval_accuracy);
    }
    Ok(())
}
