//! Loss-threshold membership inference on a deliberately overfit network.

use fairleak::attacks::membership_inference;
use fairleak::data::{make_split, synth_biased, SynthSpec};
use fairleak::models::{fit_mlp, per_record_bce, TrainConfig};

fn main() -> fairleak::Result<()> {
    // few records and noisy labels, so the network memorizes
    let spec = SynthSpec {
        n: 400,
        mean_shift: 0.3,
        d: 10,
        ..SynthSpec::default()
    };
    let ds = synth_biased(&spec, 9)?;
    let split = make_split(&ds, 0.5, 0.5, 10, false)?;
    let (tr, te) = (ds.subset(&split.tr), ds.subset(&split.te));

    for epochs in [5, 100, 1000] {
        let cfg = TrainConfig {
            epochs,
            learning_rate: 0.1,
            batch_size: Some(16),
            seed: 9,
            ..TrainConfig::default()
        };
        let model = fit_mlp(tr.features(), tr.labels(), &[64, 64], &cfg)?;
        let members = per_record_bce(&model, tr.features(), tr.labels());
        let others = per_record_bce(&model, te.features(), te.labels());
        let m = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        println!(
            "{epochs:>5} epochs: loss {:.3} / {:.3}, membership BA {:.3}",
            m(&members),
            m(&others),
            membership_inference(&members, &others)?
        );
    }
    Ok(())
}
