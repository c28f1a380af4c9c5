//! Adversarial debiasing: the target network is trained against a
//! discriminator that tries to recover `S` from its score. Raising the
//! adversary weight trades accuracy for less leakage.
//!
//! Each run trains a 4x32 network; use `--release`.

use fairleak::attacks::adapt_aia_s;
use fairleak::data::{make_split, synth_biased, SynthSpec};
use fairleak::fairness::{advdebias_train, AdvDebiasConfig};
use fairleak::metrics::accuracy;
use fairleak::models::{predict_hard, predict_soft, TrainConfig};

fn main() -> fairleak::Result<()> {
    let spec = SynthSpec {
        n: 2000,
        p_s1: 0.9,
        p_y1_given_s: (0.1, 0.9),
        mean_shift: 3.0,
        leak_shift: 1.0,
        ..SynthSpec::default()
    };
    let ds = synth_biased(&spec, 0)?;
    let split = make_split(&ds, 0.5, 0.5, 1, true)?;
    let (aux_tr, aux_te, te) = (
        ds.subset(&split.aux_tr),
        ds.subset(&split.aux_te),
        ds.subset(&split.te),
    );

    for alpha in [0.0, 1.0, 3.0] {
        let cfg = AdvDebiasConfig {
            adversary_weight: alpha,
            ..AdvDebiasConfig::default()
        };
        let model = advdebias_train(&ds, &split, &cfg)?;
        let attack = adapt_aia_s(
            &predict_soft(&model, aux_tr.features())?,
            aux_tr.sensitive(),
            &predict_soft(&model, aux_te.features())?,
            aux_te.sensitive(),
            &TrainConfig::logreg(),
        )?;
        let acc = accuracy(&predict_hard(&model, te.features(), 0.5)?.0, te.labels())?;
        println!(
            "alpha {alpha}: soft attack {:.3}, accuracy {acc:.3}",
            attack.eval_accuracy
        );
    }
    Ok(())
}
