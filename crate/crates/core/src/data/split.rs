use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::TabularDataset;
use crate::{Error, Result};

/// Index sets for training, testing and the adversary's auxiliary halves.
///
/// `aux_tr` and `aux_te` partition `te`; `tr` and `te` partition all rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub seed: u64,
    pub tr: Vec<usize>,
    pub te: Vec<usize>,
    pub aux_tr: Vec<usize>,
    pub aux_te: Vec<usize>,
}

impl SplitPlan {
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![0u8; n];
        for &i in self.tr.iter().chain(&self.te) {
            if i >= n {
                return Err(Error::DegenerateSplit(format!("index {i} out of range")));
            }
            seen[i] += 1;
        }
        if seen.iter().any(|&c| c != 1) {
            return Err(Error::DegenerateSplit(
                "tr/te do not partition the rows".into(),
            ));
        }
        let mut aux = [self.aux_tr.clone(), self.aux_te.clone()].concat();
        aux.sort_unstable();
        if aux != self.te {
            return Err(Error::DegenerateSplit(
                "aux_tr/aux_te do not partition te".into(),
            ));
        }
        Ok(())
    }
}

fn fraction_ok(f: f64) -> bool {
    f > 0.0 && f < 1.0
}

/// Number of S=1 records for a sub-split of size `size`, drawn from a parent
/// holding `parent_s1` positives out of `parent_size`, such that both the
/// sub-split and its complement stay within one record of `p * size`.
fn stratified_count(size: usize, parent_size: usize, parent_s1: usize, p: f64) -> usize {
    let target = size as f64 * p;
    let complement_target = parent_s1 as f64 - (parent_size - size) as f64 * p;
    let lo = (target.max(complement_target) - 1.0 - 1e-9).ceil().max(0.0);
    let hi = (target.min(complement_target) + 1.0 + 1e-9).floor();
    let pick = target.round().clamp(lo, hi.max(lo));
    let parent_s0 = parent_size - parent_s1;
    (pick as usize).clamp(size.saturating_sub(parent_s0), parent_s1.min(size))
}

/// Seeded train/test split, with `te` further split into adversary halves.
pub fn make_split(
    dataset: &TabularDataset,
    te_fraction: f64,
    aux_tr_fraction: f64,
    seed: u64,
    stratify_on_s: bool,
) -> Result<SplitPlan> {
    if !fraction_ok(te_fraction) || !fraction_ok(aux_tr_fraction) {
        return Err(Error::InvalidConfig(
            "split fractions must lie in (0,1)".into(),
        ));
    }
    let n = dataset.len();
    let n_te = (te_fraction * n as f64).round() as usize;
    if n_te < 2 || n_te >= n {
        return Err(Error::DegenerateSplit(format!(
            "te_fraction {te_fraction} on {n} rows leaves an empty split"
        )));
    }
    let n_aux_tr = ((aux_tr_fraction * n_te as f64).round() as usize).clamp(1, n_te - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let (mut te, mut tr, mut aux_tr, mut aux_te);
    if stratify_on_s {
        let s = dataset.sensitive();
        let mut ones: Vec<usize> = (0..n).filter(|&i| s[i] == 1).collect();
        let mut zeros: Vec<usize> = (0..n).filter(|&i| s[i] == 0).collect();
        if ones.is_empty() || zeros.is_empty() {
            return Err(Error::DegenerateSplit(
                "sensitive attribute has a single group".into(),
            ));
        }
        ones.shuffle(&mut rng);
        zeros.shuffle(&mut rng);
        let p = ones.len() as f64 / n as f64;
        let te1 = stratified_count(n_te, n, ones.len(), p);
        let te0 = n_te - te1;
        let aux1 = stratified_count(n_aux_tr, n_te, te1, p);
        let aux0 = n_aux_tr - aux1;
        aux_tr = [&ones[..aux1], &zeros[..aux0]].concat();
        aux_te = [&ones[aux1..te1], &zeros[aux0..te0]].concat();
        te = [&ones[..te1], &zeros[..te0]].concat();
        tr = [&ones[te1..], &zeros[te0..]].concat();
        for (name, part) in [
            ("tr", &tr),
            ("te", &te),
            ("aux_tr", &aux_tr),
            ("aux_te", &aux_te),
        ] {
            let k = part.iter().filter(|&&i| s[i] == 1).count();
            if k == 0 || k == part.len() {
                return Err(Error::DegenerateSplit(format!(
                    "{name} has a single S group"
                )));
            }
        }
    } else {
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(&mut rng);
        te = all[..n_te].to_vec();
        tr = all[n_te..].to_vec();
        aux_tr = te[..n_aux_tr].to_vec();
        aux_te = te[n_aux_tr..].to_vec();
    }
    for v in [&mut tr, &mut te, &mut aux_tr, &mut aux_te] {
        v.sort_unstable();
    }
    Ok(SplitPlan {
        seed,
        tr,
        te,
        aux_tr,
        aux_te,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use proptest::prelude::*;

    fn dataset(sensitive: Vec<u8>) -> TabularDataset {
        let n = sensitive.len();
        TabularDataset::new(Matrix::zeros(n, 1), vec![0; n], sensitive, vec!["a".into()]).unwrap()
    }

    #[test]
    fn ten_rows_arithmetic() {
        let d = dataset(vec![0, 1, 0, 1, 0, 1, 0, 1, 0, 1]);
        let plan = make_split(&d, 0.2, 0.8, 3, false).unwrap();
        assert_eq!(plan.tr.len(), 8);
        assert_eq!(plan.te.len(), 2);
        assert_eq!((plan.aux_tr.len(), plan.aux_te.len()), (1, 1));
        let again = make_split(&d, 0.2, 0.8, 3, false).unwrap();
        assert_eq!(plan, again);
    }

    #[test]
    fn stratified_single_group_is_degenerate() {
        let d = dataset(vec![1, 1]);
        assert!(matches!(
            make_split(&d, 0.5, 0.5, 0, true),
            Err(Error::DegenerateSplit(_))
        ));
    }

    #[test]
    fn bad_fraction_rejected() {
        let d = dataset(vec![0, 1, 0, 1]);
        assert!(make_split(&d, 1.0, 0.5, 0, false).is_err());
        assert!(make_split(&d, 0.5, 0.0, 0, false).is_err());
    }

    proptest! {
        #[test]
        fn split_partitions(n in 20usize..400, te in 0.1f64..0.6, aux in 0.2f64..0.8, seed in any::<u64>()) {
            let d = dataset((0..n).map(|i| (i % 3 == 0) as u8).collect());
            let plan = make_split(&d, te, aux, seed, false).unwrap();
            prop_assert!(plan.validate(n).is_ok());
            prop_assert_eq!(plan.te.len(), (te * n as f64).round() as usize);
        }

        #[test]
        fn stratified_within_one_record(n in 200usize..600, p1 in 0.1f64..0.9, seed in any::<u64>()) {
            let s: Vec<u8> = (0..n).map(|i| ((i as f64) < p1 * n as f64) as u8).collect();
            let d = dataset(s.clone());
            let global = s.iter().filter(|&&v| v == 1).count() as f64 / n as f64;
            let plan = make_split(&d, 0.2, 0.5, seed, true).unwrap();
            prop_assert!(plan.validate(n).is_ok());
            for part in [&plan.tr, &plan.te, &plan.aux_tr, &plan.aux_te] {
                let k = part.iter().filter(|&&i| s[i] == 1).count() as f64;
                prop_assert!((k - global * part.len() as f64).abs() <= 1.0 + 1e-9);
            }
        }
    }
}
