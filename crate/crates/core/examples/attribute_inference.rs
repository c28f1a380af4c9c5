//! Soft- and hard-label attribute inference against a censored target.
//!
//! The target never sees `S`, yet its scores still reveal it: features are
//! shifted by `S` and `Y` depends on `S`. The adaptive attack tunes its
//! threshold on the attacker's ROC curve; the baseline uses 0.5, which is a
//! poor choice when 90% of records have `S = 1`.

use fairleak::attacks::{adapt_aia_h, adapt_aia_s, baseline_aia};
use fairleak::data::{make_split, synth_biased, SynthSpec};
use fairleak::metrics::{dempar_level, theoretical_attack_bound};
use fairleak::models::{fit_logreg, predict_soft, TrainConfig};

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
    let tr = ds.subset(&split.tr);
    let target = fit_logreg(
        tr.features(),
        tr.labels(),
        &vec![1.0; tr.len()],
        &TrainConfig::logreg(),
    )?;

    let (aux_tr, aux_te) = (ds.subset(&split.aux_tr), ds.subset(&split.aux_te));
    let soft_tr = predict_soft(&target, aux_tr.features())?;
    let soft_te = predict_soft(&target, aux_te.features())?;
    let cfg = TrainConfig::logreg();

    let adaptive = adapt_aia_s(
        &soft_tr,
        aux_tr.sensitive(),
        &soft_te,
        aux_te.sensitive(),
        &cfg,
    )?;
    let baseline = baseline_aia(
        &soft_tr,
        aux_tr.sensitive(),
        &soft_te,
        aux_te.sensitive(),
        &cfg,
    )?;
    println!(
        "soft labels: adaptive {:.3} (threshold {:.3}), baseline {:.3}",
        adaptive.eval_accuracy,
        adaptive.threshold.unwrap_or(f64::NAN),
        baseline.eval_accuracy
    );

    let (hard_tr, hard_te) = (soft_tr.threshold(0.5), soft_te.threshold(0.5));
    let hard = adapt_aia_h(&hard_tr, aux_tr.sensitive(), &hard_te, aux_te.sensitive())?;
    let bound = theoretical_attack_bound(dempar_level(&hard_tr, aux_tr.sensitive())?)?;
    println!(
        "hard labels: {:?} scores {:.3} on tuning data (bound {bound:.3}), {:.3} on evaluation data",
        hard.chosen_function.unwrap(),
        hard.tuned_accuracy,
        hard.eval_accuracy
    );
    Ok(())
}
