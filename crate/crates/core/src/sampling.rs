//! Discrete distributions proportional to squared row or column norms.

use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::scalar::Real;

/// Precomputed inverse-CDF table for one index distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingWeights {
    weights: Vec<f64>,
    total: f64,
    cumulative: Vec<f64>,
}

impl SamplingWeights {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w / self.total).collect()
    }

    /// Draws index `i` with probability `weights[i] / total`.
    ///
    /// A draw landing exactly on a cumulative boundary goes to the lower index.
    #[inline]
    pub fn sample(&self, rng: &mut RandomSource) -> usize {
        let u = rng.uniform() * self.total;
        let i = self.cumulative.partition_point(|&c| c < u);
        i.min(self.cumulative.len() - 1)
    }
}

/// Builds the sampling table; fails on any non-positive weight.
pub fn build_weights<T: Real>(norms_sq: &[T]) -> Result<SamplingWeights> {
    if norms_sq.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let mut weights = Vec::with_capacity(norms_sq.len());
    let mut cumulative = Vec::with_capacity(norms_sq.len());
    let mut acc = 0.0;
    for (index, w) in norms_sq.iter().enumerate() {
        let w = w.to_f64_lossy();
        if !w.is_finite() || w <= 0.0 {
            return Err(Error::ZeroWeight { index, value: w });
        }
        acc += w;
        weights.push(w);
        cumulative.push(acc);
    }
    Ok(SamplingWeights {
        weights,
        total: acc,
        cumulative,
    })
}

pub fn sample_index(w: &SamplingWeights, rng: &mut RandomSource) -> usize {
    w.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn probabilities_examples() {
        let w = build_weights(&[9.0f64, 16.0]).unwrap();
        let p = w.probabilities();
        assert!((p[0] - 0.36).abs() < 1e-15 && (p[1] - 0.64).abs() < 1e-15);
        let w = build_weights(&[1.0f64; 4]).unwrap();
        assert_eq!(w.probabilities(), vec![0.25; 4]);
        assert_eq!(
            build_weights(&[5.0f64, 0.0]),
            Err(Error::ZeroWeight {
                index: 1,
                value: 0.0
            })
        );
    }

    #[test]
    fn singleton_always_zero() {
        let w = build_weights(&[3.5f64]).unwrap();
        let mut rng = RandomSource::new(1);
        assert!((0..1000).all(|_| w.sample(&mut rng) == 0));
    }

    #[test]
    fn law_of_large_numbers() {
        let w = build_weights(&[9.0f64, 16.0]).unwrap();
        let mut rng = RandomSource::new(2024);
        let n = 1_000_000;
        let ones = (0..n).filter(|_| w.sample(&mut rng) == 1).count();
        let freq = ones as f64 / n as f64;
        assert!((freq - 0.64).abs() < 0.01, "freq {freq}");
    }

    #[test]
    fn same_seed_same_indices() {
        let w = build_weights(&[1.0f64, 2.0, 3.0, 4.0]).unwrap();
        let mut a = RandomSource::new(5);
        let mut b = RandomSource::new(5);
        let sa: Vec<_> = (0..10_000).map(|_| w.sample(&mut a)).collect();
        let sb: Vec<_> = (0..10_000).map(|_| w.sample(&mut b)).collect();
        assert_eq!(sa, sb);
    }

    #[test]
    fn boundary_resolves_low() {
        let w = build_weights(&[1.0f64, 1.0]).unwrap();
        assert_eq!(w.cumulative().partition_point(|&c| c < 1.0), 0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn table_invariants(ws in prop::collection::vec(1e-3f64..1e3, 1..100)) {
            let w = build_weights(&ws).unwrap();
            let direct: f64 = ws.iter().sum();
            prop_assert!((w.total() - direct).abs() <= 1e-12 * direct);
            prop_assert!(w.cumulative().windows(2).all(|c| c[0] <= c[1]));
            prop_assert_eq!(*w.cumulative().last().unwrap(), w.total());
        }

        #[test]
        fn empirical_distribution_close(ws in prop::collection::vec(0.05f64..10.0, 1..100), seed in any::<u64>()) {
            let w = build_weights(&ws).unwrap();
            let mut rng = RandomSource::new(seed);
            // 1e5 draws give an expected TV near 0.0126 for 100 equal weights.
            let n = 400_000;
            let mut counts = vec![0usize; ws.len()];
            for _ in 0..n {
                counts[w.sample(&mut rng)] += 1;
            }
            let tv: f64 = counts
                .iter()
                .zip(w.probabilities())
                .map(|(&c, p)| (c as f64 / n as f64 - p).abs())
                .sum::<f64>()
                / 2.0;
            prop_assert!(tv < 0.01, "total variation {}", tv);
        }
    }
}
