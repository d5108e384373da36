//! Transfer-matrix route to the waiting-time distribution.
//!
//! States `0..n` track the current run length of the target symbol; state
//! `n` is the absorbing "run complete" state. Column `j` of the adjacency
//! matrix lists the outgoing edges of state `j`, weighted by how many
//! symbols follow that edge. `W = A / m` is column-substochastic and the
//! bottom-left entry of `W^k` is the probability that the run first
//! completes after exactly `k` draws.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::matrix::RationalMatrix;
use crate::params::Params;
use crate::rational::{int, ratio, ExactRational};

pub fn build_adjacency(params: Params) -> Result<RationalMatrix> {
    params.require_alphabet(2)?;
    let n = params.n() as usize;
    let others = int(params.m() - 1);
    Ok(RationalMatrix::from_fn(n + 1, n + 1, |i, j| {
        if i == 0 && j < n {
            others.clone()
        } else if i == j + 1 {
            ExactRational::one()
        } else {
            ExactRational::zero()
        }
    }))
}

pub fn build_w(params: Params) -> Result<RationalMatrix> {
    Ok(build_adjacency(params)?.scale(&ratio(1, params.m())))
}

/// `(I - W)^{-1}` by exact elimination.
pub fn fundamental_inverse(params: Params) -> Result<RationalMatrix> {
    let w = build_w(params)?;
    let size = w.rows();
    (&RationalMatrix::identity(size) - &w).inverse()
}

/// `(I - W)^{-1}` written down from its closed entry pattern: entry `(i, j)`
/// is `m^(n-i)`, minus `m^(j-i)` above the diagonal.
pub fn pattern_inverse(params: Params) -> Result<RationalMatrix> {
    params.require_alphabet(2)?;
    let n = params.n() as usize;
    let m = BigInt::from(params.m());
    let pow = |e: usize| num_traits::pow(m.clone(), e);
    Ok(RationalMatrix::from_fn(n + 1, n + 1, |i, j| {
        let mut v = pow(n - i);
        if j > i {
            v -= pow(j - i);
        }
        ExactRational::from_integer(v)
    }))
}

/// Walk counts `A^k e_0` for `k = 0, 1, ...`: entry `j` is the number of
/// length-`k` strings that leave the walk in state `j`.
struct WalkCounts {
    adjacency: Vec<Vec<BigInt>>,
    counts: Vec<BigInt>,
}

impl WalkCounts {
    fn new(params: Params) -> Result<Self> {
        let a = build_adjacency(params)?;
        let adjacency = (0..a.rows())
            .map(|i| a.row(i).iter().map(|e| e.to_integer()).collect())
            .collect();
        let mut counts = vec![BigInt::zero(); a.rows()];
        counts[0] = BigInt::one();
        Ok(WalkCounts { adjacency, counts })
    }

    fn step(&mut self) {
        self.counts = self
            .adjacency
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&self.counts)
                    .filter(|(a, _)| !a.is_zero())
                    .map(|(a, c)| a * c)
                    .sum()
            })
            .collect();
    }
}

/// `e_n^T W^k e_0 = (e_n^T A^k e_0) / m^k`: probability that the run first
/// completes at draw `k`.
pub fn success_probability(params: Params, k: u64) -> Result<ExactRational> {
    let mut walk = WalkCounts::new(params)?;
    for _ in 0..k {
        walk.step();
    }
    let total = num_traits::pow(BigInt::from(params.m()), k as usize);
    Ok(ExactRational::new(walk.counts[params.n() as usize].clone(), total))
}

fn unit(len: usize, at: usize) -> Vec<ExactRational> {
    let mut v = vec![ExactRational::zero(); len];
    v[at] = ExactRational::one();
    v
}

/// Exact truncated law of the waiting time.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionTable {
    pub params: Params,
    /// `(k, p_k)` for `k = n, n+1, ...`; earlier steps have zero mass.
    pub probs: Vec<(u64, ExactRational)>,
    /// Exact residual `1 - sum(p_k)`.
    pub tail: ExactRational,
}

impl DistributionTable {
    // sum weight(k) * p_k, accumulated over the common denominator m^K
    // (every p_k's reduced denominator divides it).
    fn weighted_sum(&self, weight: impl Fn(u64) -> BigInt) -> ExactRational {
        let common = num_traits::pow(BigInt::from(self.params.m()), self.last_step() as usize);
        let numer: BigInt = self
            .probs
            .iter()
            .map(|(k, p)| weight(*k) * p.numer() * (&common / p.denom()))
            .sum();
        ExactRational::new(numer, common)
    }

    pub fn cumulative(&self) -> ExactRational {
        self.weighted_sum(|_| BigInt::one())
    }

    pub fn last_step(&self) -> u64 {
        self.probs.last().map_or(0, |(k, _)| *k)
    }

    /// `sum k * p_k` over the emitted rows.
    pub fn truncated_mean(&self) -> ExactRational {
        self.weighted_sum(BigInt::from)
    }

    /// Upper bound on `E[xi] - truncated_mean()`.
    ///
    /// With `K` the last emitted step and `q = m^-n`, the missing mass is
    /// `E[xi; xi > K] = K * P(xi > K) + sum_{k >= K} P(xi > k)`. From any
    /// state, `n` consecutive target draws complete the run, so
    /// `P(xi > K + jn) <= tail * (1 - q)^j` and the sum is at most
    /// `n * tail / q`. The bound is `tail * (K + n * m^n)`.
    pub fn mean_gap_bound(&self) -> ExactRational {
        let steps = int(self.last_step()) + int(self.params.n()) * int(num_traits::pow(BigInt::from(self.params.m()), self.params.n() as usize));
        &self.tail * steps
    }
}

fn prime_factors(mut m: u32) -> Vec<u32> {
    let mut primes = Vec::new();
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            primes.push(p);
            while m.is_multiple_of(p) {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        primes.push(m);
    }
    primes
}

// numer / denom in lowest terms, where every prime of denom is in `primes`.
// Avoids a full big-integer gcd.
fn reduce_over_power(mut numer: BigInt, mut denom: BigInt, primes: &[u32]) -> ExactRational {
    if numer.is_zero() {
        return ExactRational::zero();
    }
    for &p in primes {
        let p = BigInt::from(p);
        loop {
            let (q, r) = numer.div_rem(&p);
            if !r.is_zero() || !denom.is_multiple_of(&p) {
                break;
            }
            numer = q;
            denom /= &p;
        }
    }
    ExactRational::new_raw(numer, denom)
}

/// Emits `p_n, p_{n+1}, ...` until the exact residual mass drops to
/// `tail_bound` or below.
pub fn distribution(params: Params, tail_bound: &ExactRational) -> Result<DistributionTable> {
    if *tail_bound <= ExactRational::zero() || *tail_bound >= ExactRational::one() {
        return Err(Error::domain(
            "tail_bound",
            crate::rational::format_rational(tail_bound),
            "must lie strictly between 0 and 1",
        ));
    }
    let n = params.n() as usize;
    let m = BigInt::from(params.m());
    let primes = prime_factors(params.m());
    let mut walk = WalkCounts::new(params)?;
    let mut probs = Vec::new();
    // After k steps: strings = m^k and absorbed = number of length-k strings
    // whose run has already completed, so the residual is
    // (strings - absorbed) / m^k.
    let mut strings = BigInt::one();
    let mut absorbed = BigInt::zero();
    let mut k = 0u64;
    loop {
        walk.step();
        k += 1;
        strings *= &m;
        absorbed *= &m;
        let hits = &walk.counts[n];
        absorbed += hits;
        if k < params.n() as u64 {
            continue;
        }
        probs.push((k, reduce_over_power(hits.clone(), strings.clone(), &primes)));
        let residual = &strings - &absorbed;
        if &residual * tail_bound.denom() <= tail_bound.numer() * &strings {
            let transient: BigInt = walk.counts[..n].iter().sum();
            if transient != residual {
                return Err(Error::Invariant(format!(
                    "residual count {residual} disagrees with transient count {transient}"
                )));
            }
            let tail = ExactRational::new(residual, strings);
            return Ok(DistributionTable { params, probs, tail });
        }
    }
}

/// Precomputed `W` and `(I - W)^{-1}` for evaluating the matrix-form moments.
///
/// Moments are reduced left to right as row vector times matrix, so no
/// matrix power of the inverse is ever formed.
#[derive(Debug, Clone)]
pub struct TransferEngine {
    params: Params,
    w: RationalMatrix,
    inverse: RationalMatrix,
}

impl TransferEngine {
    pub fn new(params: Params) -> Result<Self> {
        let w = build_w(params)?;
        let inverse = (&RationalMatrix::identity(w.rows()) - &w).inverse()?;
        Ok(TransferEngine { params, w, inverse })
    }

    pub fn params(&self) -> Params {
        self.params
    }

    pub fn w(&self) -> &RationalMatrix {
        &self.w
    }

    pub fn fundamental_inverse(&self) -> &RationalMatrix {
        &self.inverse
    }

    fn final_row(&self) -> Vec<ExactRational> {
        unit(self.w.rows(), self.params.n() as usize)
    }

    /// `e_n^T W (I-W)^{-2} e_0`.
    pub fn expectation(&self) -> ExactRational {
        let mut row = self.w.left_mul(&self.final_row());
        for _ in 0..2 {
            row = self.inverse.left_mul(&row);
        }
        row.swap_remove(0)
    }

    /// `e_n^T W (I+W) (I-W)^{-3} e_0`.
    pub fn second_moment(&self) -> ExactRational {
        let mut row = self.w.left_mul(&self.final_row());
        // row * (I + W)
        let shifted = self.w.left_mul(&row);
        row = row.iter().zip(&shifted).map(|(a, b)| a + b).collect();
        for _ in 0..3 {
            row = self.inverse.left_mul(&row);
        }
        row.swap_remove(0)
    }

    pub fn variance(&self) -> ExactRational {
        let e = self.expectation();
        self.second_moment() - &e * &e
    }
}

pub fn expectation_matrix(params: Params) -> Result<ExactRational> {
    Ok(TransferEngine::new(params)?.expectation())
}

pub fn second_moment_matrix(params: Params) -> Result<ExactRational> {
    Ok(TransferEngine::new(params)?.second_moment())
}

pub fn variance_matrix(params: Params) -> Result<ExactRational> {
    Ok(TransferEngine::new(params)?.variance())
}

/// Iterator over the Neumann partial sums `sum_{k=0}^{K} W^k`, `K = 0, 1, ...`.
#[derive(Debug, Clone)]
pub struct NeumannPartialSums {
    w: RationalMatrix,
    power: RationalMatrix,
    sum: RationalMatrix,
}

impl NeumannPartialSums {
    pub fn new(params: Params) -> Result<Self> {
        let w = build_w(params)?;
        let size = w.rows();
        Ok(NeumannPartialSums {
            w,
            power: RationalMatrix::identity(size),
            sum: RationalMatrix::zeros(size, size),
        })
    }
}

impl Iterator for NeumannPartialSums {
    type Item = RationalMatrix;

    fn next(&mut self) -> Option<RationalMatrix> {
        self.sum = &self.sum + &self.power;
        self.power = &self.power * &self.w;
        Some(self.sum.clone())
    }
}
