//! Sample-size bounds, weighted sampling and proportional allocation across parties.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{LabeledPoint, WeightedDataset};

/// Deterministic RNG for stream `stream` of a run seeded with `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSizeParams {
    pub epsilon: f64,
    /// VC dimension of the hypothesis class.
    pub vc_dim: usize,
    pub constant_multiplier: f64,
    pub failure_prob: f64,
}

impl SampleSizeParams {
    /// Multiplier 1 and failure probability 1/2, so the amplification factor is 1.
    pub fn new(epsilon: f64, vc_dim: usize) -> Self {
        Self { epsilon, vc_dim, constant_multiplier: 1.0, failure_prob: 0.5 }
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidInput(format!("epsilon must lie in (0,1), got {}", self.epsilon)));
        }
        if self.vc_dim == 0 {
            return Err(Error::InvalidInput("VC dimension must be positive".into()));
        }
        if !(self.constant_multiplier > 0.0 && self.constant_multiplier.is_finite()) {
            return Err(Error::InvalidInput("constant multiplier must be positive".into()));
        }
        if !(self.failure_prob > 0.0 && self.failure_prob < 1.0) {
            return Err(Error::InvalidInput("failure probability must lie in (0,1)".into()));
        }
        Ok(())
    }
}

/// `ceil(C · min{(ν/ε)·log₂(ν/ε), ν/ε²} · max(1, log₂(1/δ)))`.
pub fn sample_size(p: &SampleSizeParams) -> Result<usize> {
    p.validate()?;
    let ratio = p.vc_dim as f64 / p.epsilon;
    let log_branch = ratio * ratio.log2();
    let square_branch = p.vc_dim as f64 / (p.epsilon * p.epsilon);
    let amplify = (1.0 / p.failure_prob).log2().max(1.0);
    let size = (p.constant_multiplier * log_branch.min(square_branch) * amplify).ceil();
    Ok((size as usize).max(1))
}

/// Per-round sample that keeps every round's weighted error below `c = 1/5`
/// over all `log(1/ε)` rounds: `ceil(C · 25d · log₂log₂(1/ε))`, at least 1.
pub fn round_sample_size(dim: usize, epsilon: f64, multiplier: f64) -> usize {
    let loglog = (1.0 / epsilon).log2().log2().max(1.0);
    ((multiplier * 25.0 * dim as f64 * loglog).ceil() as usize).max(1)
}

/// `m` i.i.d. indices drawn with probability proportional to the dataset weights.
pub fn weighted_sample_indices<R: Rng + ?Sized>(ds: &WeightedDataset, m: usize, rng: &mut R) -> Result<Vec<usize>> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(ds.total_weight() > 0.0) {
        return Err(Error::ZeroWeight);
    }
    let dist = WeightedIndex::new(ds.weights()).map_err(|_| Error::ZeroWeight)?;
    Ok((0..m).map(|_| dist.sample(rng)).collect())
}

/// `m` points drawn with replacement according to the weights, reproducible from `seed`.
pub fn weighted_sample(ds: &WeightedDataset, m: usize, seed: u64) -> Result<Vec<LabeledPoint>> {
    let mut rng = rng_for(seed, 0);
    let idx = weighted_sample_indices(ds, m, &mut rng)?;
    Ok(idx.into_iter().map(|i| ds.point(i).clone()).collect())
}

/// Splits `s` draws among parties in proportion to `sizes` (counts or total weights).
///
/// Each of the `s` draws picks a party independently, so the counts always
/// sum to `s` and party `i` expects `s · sizes[i] / Σ sizes`.
pub fn proportional_allocation_with<R: Rng + ?Sized>(sizes: &[f64], s: usize, rng: &mut R) -> Result<Vec<usize>> {
    if sizes.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
        return Err(Error::InvalidInput("party sizes must be finite and nonnegative".into()));
    }
    if !sizes.iter().any(|&v| v > 0.0) {
        return Err(Error::ZeroWeight);
    }
    let mut counts = vec![0usize; sizes.len()];
    let positive: Vec<usize> = (0..sizes.len()).filter(|&i| sizes[i] > 0.0).collect();
    if positive.len() == 1 {
        counts[positive[0]] = s;
        return Ok(counts);
    }
    let dist = WeightedIndex::new(sizes).map_err(|_| Error::ZeroWeight)?;
    for _ in 0..s {
        counts[dist.sample(rng)] += 1;
    }
    Ok(counts)
}

pub fn proportional_allocation(sizes: &[f64], s: usize, seed: u64) -> Result<Vec<usize>> {
    proportional_allocation_with(sizes, s, &mut rng_for(seed, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Label;

    fn dataset(weights: &[f64]) -> WeightedDataset {
        let points = (0..weights.len()).map(|i| LabeledPoint::new(vec![i as f64], Label::Positive)).collect();
        WeightedDataset::with_weights(1, points, weights.to_vec()).unwrap()
    }

    fn counts(ds: &WeightedDataset, m: usize, seed: u64) -> Vec<usize> {
        let mut c = vec![0; ds.len()];
        for i in weighted_sample_indices(ds, m, &mut rng_for(seed, 0)).unwrap() {
            c[i] += 1;
        }
        c
    }

    #[test]
    fn sample_size_examples() {
        assert_eq!(sample_size(&SampleSizeParams::new(0.05, 50)).unwrap(), 9966);
        assert_eq!(sample_size(&SampleSizeParams::new(0.5, 1)).unwrap(), 2);
        let coarse = sample_size(&SampleSizeParams::new(0.1, 10)).unwrap();
        let fine = sample_size(&SampleSizeParams::new(0.05, 10)).unwrap();
        assert!(coarse <= fine);
    }

    #[test]
    fn sample_size_amplifies_for_small_failure_probability() {
        let mut p = SampleSizeParams::new(0.05, 50);
        p.failure_prob = 0.125;
        assert_eq!(sample_size(&p).unwrap(), (1000.0 * 1000f64.log2() * 3.0f64).ceil() as usize);
    }

    #[test]
    fn sample_size_rejects_bad_params() {
        assert!(sample_size(&SampleSizeParams::new(0.0, 5)).is_err());
        assert!(sample_size(&SampleSizeParams::new(1.0, 5)).is_err());
        assert!(sample_size(&SampleSizeParams::new(0.1, 0)).is_err());
    }

    #[test]
    fn round_sample_size_matches_formula() {
        // 25 · 5 · log₂log₂(20) = 263.96…
        assert_eq!(round_sample_size(5, 0.05, 1.0), 264);
        assert_eq!(round_sample_size(5, 0.6, 1.0), 125);
    }

    #[test]
    fn all_weight_on_one_point() {
        let ds = dataset(&[0.0, 2.0, 0.0]);
        let drawn = weighted_sample(&ds, 5, 3).unwrap();
        assert_eq!(drawn.len(), 5);
        assert!(drawn.iter().all(|p| p.coords == vec![1.0]));
    }

    #[test]
    fn weighted_sample_is_seeded() {
        let ds = dataset(&[1.0, 2.0, 3.0]);
        assert_eq!(weighted_sample(&ds, 50, 9).unwrap(), weighted_sample(&ds, 50, 9).unwrap());
        assert_ne!(weighted_sample(&ds, 50, 9).unwrap(), weighted_sample(&ds, 50, 10).unwrap());
    }

    #[test]
    fn weighted_sample_errors() {
        assert!(matches!(weighted_sample(&WeightedDataset::new(1).unwrap(), 3, 0), Err(Error::EmptyDataset)));
        assert!(matches!(weighted_sample(&dataset(&[0.0, 0.0]), 3, 0), Err(Error::ZeroWeight)));
    }

    #[test]
    fn uniform_frequencies_within_three_sigma() {
        let m = 100_000;
        let c = counts(&dataset(&[1.0; 4]), m, 11);
        let sigma = (m as f64 * 0.25 * 0.75).sqrt();
        for &ci in &c {
            assert!((ci as f64 - 25_000.0).abs() <= 3.0 * sigma, "{c:?}");
        }
        // Pearson chi-square with 3 degrees of freedom; 16.27 is the 1e-3 critical value.
        let chi2: f64 = c.iter().map(|&o| (o as f64 - 25_000.0).powi(2) / 25_000.0).sum();
        assert!(chi2 < 16.27, "chi2 = {chi2}");
    }

    #[test]
    fn skewed_frequencies_within_three_sigma() {
        let m = 100_000;
        let c = counts(&dataset(&[1.0, 3.0]), m, 12);
        let sigma = (m as f64 * 0.25 * 0.75).sqrt();
        assert!((c[0] as f64 - 25_000.0).abs() <= 3.0 * sigma, "{c:?}");
        assert!((c[1] as f64 - 75_000.0).abs() <= 3.0 * sigma, "{c:?}");
    }

    #[test]
    fn allocation_examples() {
        let c = proportional_allocation(&[30.0, 70.0], 100, 1).unwrap();
        assert_eq!(c.iter().sum::<usize>(), 100);
        assert_eq!(proportional_allocation(&[0.0, 12.0, 0.0], 40, 1).unwrap(), vec![0, 40, 0]);
        assert!(matches!(proportional_allocation(&[0.0, 0.0], 4, 1), Err(Error::ZeroWeight)));
        assert!(proportional_allocation(&[-1.0, 2.0], 4, 1).is_err());
    }

    #[test]
    fn allocation_expectation() {
        // Average over many seeds approaches s · share.
        let trials = 400;
        let mut sum = [0usize; 2];
        for seed in 0..trials {
            let c = proportional_allocation(&[30.0, 70.0], 100, seed).unwrap();
            sum[0] += c[0];
            sum[1] += c[1];
        }
        let mean0 = sum[0] as f64 / trials as f64;
        // Var of the mean = 100·0.3·0.7 / 400.
        assert!((mean0 - 30.0).abs() < 3.0 * (21.0f64 / trials as f64).sqrt(), "{mean0}");
    }

    #[test]
    fn equal_parties_within_three_sigma() {
        let s = 40_000;
        let c = proportional_allocation(&[1.0; 4], s, 5).unwrap();
        let sigma = (s as f64 * 0.25 * 0.75).sqrt();
        for &ci in &c {
            assert!((ci as f64 - 10_000.0).abs() <= 3.0 * sigma, "{c:?}");
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn allocation_conserves_total(
                sizes in prop::collection::vec(0.0f64..100.0, 1..8).prop_filter("some mass", |v| v.iter().any(|&x| x > 0.0)),
                s in 0usize..500,
                seed in any::<u64>(),
            ) {
                let c = proportional_allocation(&sizes, s, seed).unwrap();
                prop_assert_eq!(c.iter().sum::<usize>(), s);
                for (ci, size) in c.iter().zip(&sizes) {
                    if *size == 0.0 {
                        prop_assert_eq!(*ci, 0);
                    }
                }
            }

            #[test]
            fn sample_size_monotone(eps in 0.01f64..0.9, delta in 0.001f64..0.5, nu in 1usize..200) {
                let base = SampleSizeParams { epsilon: eps, vc_dim: nu, constant_multiplier: 1.0, failure_prob: delta };
                let coarser = SampleSizeParams { epsilon: (eps * 1.1).min(0.99), ..base };
                let bigger = SampleSizeParams { vc_dim: nu + 1, ..base };
                prop_assert!(sample_size(&coarser).unwrap() <= sample_size(&base).unwrap());
                prop_assert!(sample_size(&bigger).unwrap() >= sample_size(&base).unwrap());
            }
        }
    }
}
