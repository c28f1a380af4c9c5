use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::TabularDataset;
use crate::linalg::Matrix;
use crate::{Error, Result};

/// Parameters of the biased Gaussian generator.
///
/// Features are `x = mean_shift * y * e0 + leak_shift * s * e1 + N(0, I)`,
/// so `S` leaks into the features through `x1` and, when
/// `p_y1_given_s` differs across groups, through `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n: usize,
    pub p_s1: f64,
    /// `(P(Y=1|S=0), P(Y=1|S=1))`
    pub p_y1_given_s: (f64, f64),
    pub mean_shift: f64,
    pub leak_shift: f64,
    pub d: usize,
    pub exact_frequency: bool,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n: 1000,
            p_s1: 0.5,
            p_y1_given_s: (0.5, 0.5),
            mean_shift: 1.0,
            leak_shift: 0.0,
            d: 2,
            exact_frequency: true,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let probs = [self.p_s1, self.p_y1_given_s.0, self.p_y1_given_s.1];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidSpec("probabilities must lie in [0,1]".into()));
        }
        if self.n < 4 {
            return Err(Error::InvalidSpec("n must be at least 4".into()));
        }
        if self.d == 0 {
            return Err(Error::InvalidSpec("d must be at least 1".into()));
        }
        if !(self.mean_shift >= 0.0 && self.leak_shift >= 0.0)
            || !self.mean_shift.is_finite()
            || !self.leak_shift.is_finite()
        {
            return Err(Error::InvalidSpec(
                "shifts must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Expected count of each `(s, y)` cell, ordered (0,0), (0,1), (1,0), (1,1).
    pub fn cell_quotas(&self) -> [f64; 4] {
        let n = self.n as f64;
        let (q0, q1) = self.p_y1_given_s;
        let p = self.p_s1;
        [
            n * (1.0 - p) * (1.0 - q0),
            n * (1.0 - p) * q0,
            n * p * (1.0 - q1),
            n * p * q1,
        ]
    }
}

/// Integer counts summing to `total`: floors of `quotas`, with the remaining
/// units handed to the largest fractional parts (earlier index wins ties).
pub fn apportion_largest_remainder(quotas: &[f64], total: usize) -> Vec<usize> {
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor().max(0.0) as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..quotas.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().cycle().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

pub fn synth_biased(spec: &SynthSpec, seed: u64) -> Result<TabularDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells: Vec<(u8, u8)> = if spec.exact_frequency {
        let counts = apportion_largest_remainder(&spec.cell_quotas(), spec.n);
        let keys = [(0, 0), (0, 1), (1, 0), (1, 1)];
        let mut cells: Vec<(u8, u8)> = keys
            .iter()
            .zip(counts)
            .flat_map(|(&k, c)| std::iter::repeat_n(k, c))
            .collect();
        cells.shuffle(&mut rng);
        cells
    } else {
        (0..spec.n)
            .map(|_| {
                let s = u8::from(rng.gen_bool(spec.p_s1));
                let q = if s == 1 {
                    spec.p_y1_given_s.1
                } else {
                    spec.p_y1_given_s.0
                };
                (s, u8::from(rng.gen_bool(q)))
            })
            .collect()
    };

    let mut data = Vec::with_capacity(spec.n * spec.d);
    for &(s, y) in &cells {
        for j in 0..spec.d {
            let mut v: f64 = rng.sample(StandardNormal);
            if j == 0 {
                v += spec.mean_shift * f64::from(y);
            }
            if j == 1 {
                v += spec.leak_shift * f64::from(s);
            }
            data.push(v);
        }
    }
    let names = (0..spec.d).map(|j| format!("x{j}")).collect();
    TabularDataset::new(
        Matrix::new(spec.n, spec.d, data)?,
        cells.iter().map(|c| c.1).collect(),
        cells.iter().map(|c| c.0).collect(),
        names,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::class_balance;
    use crate::metrics::dependency_ys;
    use proptest::prelude::*;

    #[test]
    fn exact_s_marginal() {
        let spec = SynthSpec {
            n: 100,
            p_s1: 0.9,
            ..SynthSpec::default()
        };
        let d = synth_biased(&spec, 1).unwrap();
        assert_eq!(d.sensitive().iter().filter(|&&s| s == 1).count(), 90);
        assert_eq!(class_balance(&d).0, 0.9);
    }

    #[test]
    fn dependency_from_generator() {
        let equal = SynthSpec {
            n: 400,
            p_s1: 0.3,
            p_y1_given_s: (0.5, 0.5),
            ..SynthSpec::default()
        };
        let d = synth_biased(&equal, 2).unwrap();
        assert_eq!(dependency_ys(d.labels(), d.sensitive()).unwrap(), 0.0);

        let biased = SynthSpec {
            n: 1000,
            p_s1: 0.9,
            p_y1_given_s: (0.2, 0.8),
            ..SynthSpec::default()
        };
        let d = synth_biased(&biased, 2).unwrap();
        // table: S=0 -> 80 y0 / 20 y1, S=1 -> 180 y0 / 720 y1
        assert!((dependency_ys(d.labels(), d.sensitive()).unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn invalid_specs() {
        let bad = SynthSpec {
            p_s1: 1.5,
            ..SynthSpec::default()
        };
        assert!(matches!(synth_biased(&bad, 0), Err(Error::InvalidSpec(_))));
        let small = SynthSpec {
            n: 3,
            ..SynthSpec::default()
        };
        assert!(matches!(
            synth_biased(&small, 0),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn deterministic_given_seed() {
        let spec = SynthSpec {
            leak_shift: 1.0,
            ..SynthSpec::default()
        };
        assert_eq!(
            synth_biased(&spec, 9).unwrap(),
            synth_biased(&spec, 9).unwrap()
        );
        assert_ne!(
            synth_biased(&spec, 9).unwrap(),
            synth_biased(&spec, 10).unwrap()
        );
    }

    #[test]
    fn largest_remainder_tie_goes_to_first() {
        assert_eq!(
            apportion_largest_remainder(&[2.5, 2.5, 2.5, 2.5], 10),
            vec![3, 3, 2, 2]
        );
    }

    proptest! {
        #[test]
        fn exact_cells_follow_apportionment(
            n in 4usize..3000, p in 0.0f64..=1.0, q0 in 0.0f64..=1.0, q1 in 0.0f64..=1.0, seed in any::<u64>()
        ) {
            let spec = SynthSpec { n, p_s1: p, p_y1_given_s: (q0, q1), d: 1, ..SynthSpec::default() };
            let d = synth_biased(&spec, seed).unwrap();
            let mut counts = [0usize; 4];
            for (&s, &y) in d.sensitive().iter().zip(d.labels()) {
                counts[(2 * s + y) as usize] += 1;
            }
            let quotas = spec.cell_quotas();
            prop_assert_eq!(counts.iter().sum::<usize>(), n);
            for (c, q) in counts.iter().zip(quotas) {
                prop_assert!((*c as f64 - q).abs() < 1.0 + 1e-9);
            }
            prop_assert_eq!(counts.to_vec(), apportion_largest_remainder(&quotas, n));
        }
    }
}
