use fairleak::attacks::membership_inference;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Frozen from `brute_force_ba` on `gaussian_losses(2024)`.
const GOLDEN: f64 = 0.6970000000000001;

fn gaussian_losses(seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let members = Normal::new(0.3, 0.2).unwrap();
    let others = Normal::new(0.5, 0.2).unwrap();
    let a = (0..2000).map(|_| members.sample(&mut rng)).collect();
    let b = (0..2000).map(|_| others.sample(&mut rng)).collect();
    (a, b)
}

fn squash(l: f64) -> f64 {
    if l >= 0.0 {
        0.5 / (1.0 + l)
    } else {
        1.0 - 0.5 / (1.0 - l)
    }
}

fn ba(scores: &[(f64, u8)], t: f64) -> f64 {
    let rate = |class: u8| {
        let members: Vec<f64> = scores
            .iter()
            .filter(|p| p.1 == class)
            .map(|p| p.0)
            .collect();
        members
            .iter()
            .filter(|&&s| (s >= t) == (class == 1))
            .count() as f64
            / members.len() as f64
    };
    0.5 * (rate(0) + rate(1))
}

/// Scans every cut between adjacent distinct tuning scores by direct
/// counting, keeps the lowest cut with the smallest `(1-TPR)^2 + FPR^2`,
/// and scores the held-out half at that cut.
fn brute_force_ba(members: &[f64], others: &[f64]) -> f64 {
    let mut tune = Vec::new();
    let mut eval = Vec::new();
    for (label, losses) in [(1u8, members), (0u8, others)] {
        for (i, &l) in losses.iter().enumerate() {
            if i % 2 == 0 { &mut tune } else { &mut eval }.push((squash(l), label));
        }
    }
    let mut distinct: Vec<f64> = tune.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let mut cuts = vec![0.0];
    cuts.extend(distinct.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    cuts.push(f64::INFINITY);
    let objective = |t: f64| {
        let count = |class: u8| tune.iter().filter(|p| p.1 == class && p.0 >= t).count() as f64;
        let total = |class: u8| tune.iter().filter(|p| p.1 == class).count() as f64;
        let (tpr, fpr) = (count(1) / total(1), count(0) / total(0));
        (1.0 - tpr).powi(2) + fpr.powi(2)
    };
    let best = cuts
        .iter()
        .copied()
        .fold((f64::NAN, f64::INFINITY), |acc, t| {
            let o = objective(t);
            if o < acc.1 {
                (t, o)
            } else {
                acc
            }
        })
        .0;
    ba(&eval, best)
}

#[test]
fn overlapping_gaussians_match_brute_force_golden() {
    let (members, others) = gaussian_losses(2024);
    let got = membership_inference(&members, &others).unwrap();
    let brute = brute_force_ba(&members, &others);
    println!("library {got:.17}, brute force {brute:.17}");
    assert_eq!(got, brute);
    assert!(got > 0.5 && got < 0.8, "{got}");
    assert_eq!(got, GOLDEN);
}

#[test]
fn same_vector_is_coin_flip() {
    let (members, _) = gaussian_losses(7);
    assert_eq!(membership_inference(&members, &members).unwrap(), 0.5);
}
