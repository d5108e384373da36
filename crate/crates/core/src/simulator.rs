//! Seeded Monte Carlo realisation of the string-generation process.
//!
//! Trials are split into fixed blocks of [`BLOCK_SIZE`]. Block `b` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` with its stream set to `b`, so each
//! block's sequence depends only on `(seed, b)`. Blocks run in parallel on
//! the ambient rayon pool, and all aggregation is exact integer arithmetic.
//! The report is therefore bit-identical for any worker count.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::Params;
use crate::rational::to_f64;

pub const BLOCK_SIZE: u64 = 1 << 16;
pub const STEP_CAP: u64 = 1 << 63;
pub const RNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.9), seed_from_u64(seed), stream = block index";

/// Number of draws until the first run of `n` copies of symbol 0.
pub fn generate_one<R: Rng + ?Sized>(params: Params, rng: &mut R) -> Result<u64> {
    let (m, n) = (params.m(), u64::from(params.n()));
    let mut run = 0u64;
    let mut draws = 0u64;
    while run < n {
        if draws == STEP_CAP {
            return Err(Error::StepCap(STEP_CAP));
        }
        draws += 1;
        if rng.random_range(0..m) == 0 {
            run += 1;
        } else {
            run = 0;
        }
    }
    Ok(draws)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub params: Params,
    pub trials: u64,
    pub seed: u64,
    pub rng: &'static str,
    pub block_size: u64,
    pub mean: f64,
    /// Unbiased sample variance (divisor `trials - 1`).
    pub variance: f64,
    pub std_error_of_mean: f64,
    pub min_len: u64,
    pub max_len: u64,
    pub histogram: BTreeMap<u64, u64>,
}

#[derive(Debug, Default)]
struct BlockStats {
    sum: BigInt,
    sum_sq: BigInt,
    min: u64,
    max: u64,
    histogram: BTreeMap<u64, u64>,
}

impl BlockStats {
    fn merge(mut self, other: BlockStats) -> BlockStats {
        if self.histogram.is_empty() {
            return other;
        }
        if other.histogram.is_empty() {
            return self;
        }
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
        for (len, count) in other.histogram {
            *self.histogram.entry(len).or_default() += count;
        }
        self
    }
}

fn run_block(params: Params, seed: u64, block: u64, trials: u64) -> Result<BlockStats> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    let mut sum = 0u128;
    let mut sum_sq = 0u128;
    let mut stats = BlockStats {
        min: u64::MAX,
        ..BlockStats::default()
    };
    for _ in 0..trials {
        let len = generate_one(params, &mut rng)?;
        let wide = u128::from(len);
        sum += wide;
        sum_sq += wide * wide;
        stats.min = stats.min.min(len);
        stats.max = stats.max.max(len);
        *stats.histogram.entry(len).or_default() += 1;
    }
    stats.sum = sum.into();
    stats.sum_sq = sum_sq.into();
    Ok(stats)
}

pub fn simulate(params: Params, trials: u64, seed: u64) -> Result<SimReport> {
    if trials < 2 {
        return Err(Error::domain("trials", trials, "need at least 2 trials for a sample variance"));
    }
    let blocks = trials.div_ceil(BLOCK_SIZE);
    let per_block: Vec<BlockStats> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let count = BLOCK_SIZE.min(trials - b * BLOCK_SIZE);
            run_block(params, seed, b, count)
        })
        .collect::<Result<_>>()?;
    let total = per_block.into_iter().fold(BlockStats::default(), BlockStats::merge);

    let t = BigInt::from(trials);
    let mean = BigRational::new(total.sum.clone(), t.clone());
    let spread = &t * &total.sum_sq - &total.sum * &total.sum;
    let variance = BigRational::new(spread, &t * (&t - 1));
    let variance_f = to_f64(&variance);
    Ok(SimReport {
        params,
        trials,
        seed,
        rng: RNG_NAME,
        block_size: BLOCK_SIZE,
        mean: to_f64(&mean),
        variance: variance_f,
        std_error_of_mean: (variance_f / trials as f64).sqrt(),
        min_len: total.min,
        max_len: total.max,
        histogram: total.histogram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(m: u32, n: u32) -> Params {
        Params::new(m, n).unwrap()
    }

    #[test]
    fn single_letter_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..10 {
            assert_eq!(generate_one(p(1, n), &mut rng).unwrap(), u64::from(n));
        }
        let r = simulate(p(1, 5), 100, 3).unwrap();
        assert_eq!(r.mean, 5.0);
        assert_eq!(r.variance, 0.0);
        assert_eq!(r.histogram, BTreeMap::from([(5, 100)]));
    }

    #[test]
    fn lengths_never_undershoot() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            assert!(generate_one(p(3, 3), &mut rng).unwrap() >= 3);
        }
    }

    #[test]
    fn geometric_frequencies() {
        let r = simulate(p(2, 1), 200_000, 99).unwrap();
        for k in 1..=6u64 {
            let expected = 0.5f64.powi(k as i32);
            let observed = r.histogram[&k] as f64 / r.trials as f64;
            let band = 4.0 * (expected * (1.0 - expected) / r.trials as f64).sqrt();
            assert!((observed - expected).abs() < band, "k={k}: {observed} vs {expected}");
        }
    }

    #[test]
    fn report_invariants() {
        let r = simulate(p(2, 3), 70_000, 5).unwrap();
        assert_eq!(r.histogram.values().sum::<u64>(), r.trials);
        assert!(r.min_len >= 3 && r.mean >= 3.0);
        assert_eq!(*r.histogram.keys().next().unwrap(), r.min_len);
        assert_eq!(*r.histogram.keys().last().unwrap(), r.max_len);
    }

    #[test]
    fn too_few_trials() {
        assert!(matches!(simulate(p(2, 2), 1, 0), Err(Error::Domain { name: "trials", .. })));
    }

    #[test]
    fn seed_changes_the_sample() {
        let a = simulate(p(2, 2), 1000, 1).unwrap();
        let b = simulate(p(2, 2), 1000, 2).unwrap();
        assert_ne!(a.histogram, b.histogram);
        assert_eq!(a, simulate(p(2, 2), 1000, 1).unwrap());
    }
}
