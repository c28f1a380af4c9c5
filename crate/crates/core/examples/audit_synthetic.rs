//! End-to-end audit of a synthetic dataset: split, train, attack, defend.
//!
//! `cargo run --release --example audit_synthetic`

use fairleak::cli::{audit_dataset, AuditConfig, DefenseConfig, TargetKind};
use fairleak::data::{synth_biased, SynthSpec};
use fairleak::fairness::EgdConfig;
use fairleak::models::TrainConfig;

fn main() -> fairleak::Result<()> {
    let spec = SynthSpec {
        n: 2000,
        p_s1: 0.9,
        p_y1_given_s: (0.1, 0.9),
        mean_shift: 3.0,
        leak_shift: 1.0,
        ..SynthSpec::default()
    };
    let ds = synth_biased(&spec, 42)?;
    let cfg = AuditConfig {
        target: TargetKind::Logreg,
        target_cfg: TrainConfig::logreg(),
        defense: DefenseConfig::Egd(EgdConfig::default()),
        ..AuditConfig::default()
    };
    let report = audit_dataset(&ds, &cfg, 42)?.report;

    if let Some(u) = &report.target_utility {
        println!("target accuracy {:.3}", u.accuracy);
    }
    if let Some(f) = &report.fairness {
        println!(
            "dempar level {:.3}, eqodds gap {:.3}",
            f.dempar_level, f.eqodds_gap
        );
    }
    for (name, rec) in &report.attacks {
        println!("{name:<12} eval BA {:.3}", rec.result.eval_accuracy);
    }
    if let Some(d) = &report.defense {
        println!("-- after {}:", d.method);
        for (name, rec) in &d.attacks {
            println!("{name:<12} eval BA {:.3}", rec.result.eval_accuracy);
        }
    }
    Ok(())
}
