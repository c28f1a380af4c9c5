//! Exponentiated-gradient training under demographic parity, swept over the
//! constraint slack: tighter slack means a fairer mixture and a weaker
//! hard-label attack, at some cost in accuracy.

use fairleak::cli::egd_sweep;
use fairleak::data::{make_split, synth_biased, SynthSpec};
use fairleak::fairness::{egd_train, EgdConfig};

fn main() -> fairleak::Result<()> {
    let spec = SynthSpec {
        n: 2000,
        p_s1: 0.9,
        p_y1_given_s: (0.1, 0.9),
        mean_shift: 3.0,
        leak_shift: 1.0,
        ..SynthSpec::default()
    };
    let ds = synth_biased(&spec, 3)?;
    let split = make_split(&ds, 0.5, 0.5, 4, true)?;

    println!("{:>6} {:>8} {:>8} {:>8}", "eps", "dp", "attack", "acc");
    for row in egd_sweep(
        &ds,
        &split,
        &EgdConfig::default(),
        &[1.0, 0.3, 0.1, 0.03, 0.01],
        5,
    )? {
        println!(
            "{:>6} {:>8.3} {:>8.3} {:>8.3}",
            row.eps, row.dempar_level, row.attack_accuracy, row.accuracy
        );
    }

    let rc = egd_train(&ds, &split, &EgdConfig::default())?;
    println!(
        "eps=0.01 mixture has {} distinct components",
        rc.components().len()
    );
    Ok(())
}
