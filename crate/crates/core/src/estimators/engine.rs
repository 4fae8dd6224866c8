//! Deterministic enumeration and Monte-Carlo reduction machinery.
//!
//! Work is split into fixed chunks whose partial results are combined in
//! chunk order, so results do not depend on the rayon thread count.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{GcnError, Result};

/// Default cap on tuple evaluations for exact enumeration.
pub const DEFAULT_CAP: f64 = 1e8;

const ORDERED_CHUNK: u64 = 1 << 14;
const MC_CHUNK: u64 = 1 << 12;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        iter.into_iter().for_each(|x| s.add(x));
        s
    }
}

/// Errors out when `n^arity` exceeds `cap`.
pub fn check_cap(n: usize, arity: usize, cap: f64) -> Result<()> {
    let required = (n as f64).powi(arity as i32);
    if required > cap {
        return Err(GcnError::CapExceeded { required, cap });
    }
    Ok(())
}

/// `sum_t f(t)` over all ordered `k`-tuples of `0..n`.
pub fn sum_ordered<F>(n: usize, k: usize, f: F) -> f64
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    if k == 0 {
        return f(&[]);
    }
    if n == 0 {
        return 0.0;
    }
    let total = (n as u64).pow(k as u32);
    let chunks = total.div_ceil(ORDERED_CHUNK);
    let partials: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * ORDERED_CHUNK;
            let end = (start + ORDERED_CHUNK).min(total);
            let mut idx = vec![0usize; k];
            let mut rem = start;
            for slot in idx.iter_mut().rev() {
                *slot = (rem % n as u64) as usize;
                rem /= n as u64;
            }
            let mut acc = CompensatedSum::default();
            for _ in start..end {
                acc.add(f(&idx));
                for slot in idx.iter_mut().rev() {
                    *slot += 1;
                    if *slot < n {
                        break;
                    }
                    *slot = 0;
                }
            }
            acc.value()
        })
        .collect();
    partials.into_iter().collect::<CompensatedSum>().value()
}

/// `sum f(t)` over strictly increasing `k`-tuples of `0..n`.
pub fn sum_combinations<F>(n: usize, k: usize, f: F) -> f64
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    if k == 0 {
        return f(&[]);
    }
    if k > n {
        return 0.0;
    }
    let partials: Vec<f64> = (0..=(n - k))
        .into_par_iter()
        .map(|first| {
            let mut idx: Vec<usize> = (first..first + k).collect();
            let mut acc = CompensatedSum::default();
            loop {
                acc.add(f(&idx));
                // advance slots 1..k, keeping slot 0 fixed
                let mut j = k;
                loop {
                    if j == 1 {
                        return acc.value();
                    }
                    j -= 1;
                    if idx[j] < n - k + j {
                        idx[j] += 1;
                        for m in (j + 1)..k {
                            idx[m] = idx[m - 1] + 1;
                        }
                        break;
                    }
                }
            }
        })
        .collect();
    partials.into_iter().collect::<CompensatedSum>().value()
}

/// Visits every strictly increasing `k`-tuple in lexicographic order.
pub fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut j = k;
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            if idx[j] < n - k + j {
                idx[j] += 1;
                for m in (j + 1)..k {
                    idx[m] = idx[m - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Visits every tuple of the Cartesian product of `sets` in lexicographic
/// order; stops early when `f` returns false.
pub fn for_each_product(sets: &[Vec<usize>], mut f: impl FnMut(&[usize]) -> bool) {
    if sets.iter().any(Vec::is_empty) {
        return;
    }
    let mut pos = vec![0usize; sets.len()];
    let mut tuple: Vec<usize> = sets.iter().map(|s| s[0]).collect();
    loop {
        if !f(&tuple) {
            return;
        }
        let mut j = sets.len();
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            pos[j] += 1;
            if pos[j] < sets[j].len() {
                tuple[j] = sets[j][pos[j]];
                break;
            }
            pos[j] = 0;
            tuple[j] = sets[j][0];
        }
    }
}

/// Number of ordered tuples of a product of sets.
pub fn product_size(sets: &[Vec<usize>]) -> f64 {
    sets.iter().map(|s| s.len() as f64).product()
}

/// Inverse-CDF sampler over a discrete probability vector.
#[derive(Debug, Clone)]
pub struct WeightedSampler {
    cdf: Vec<f64>,
}

impl WeightedSampler {
    pub fn new(weights: &[f64]) -> Self {
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        if let Some(last) = cdf.last_mut() {
            *last = f64::INFINITY;
        }
        let total = acc;
        for c in cdf.iter_mut() {
            if c.is_finite() {
                *c /= total;
            }
        }
        Self { cdf }
    }

    /// Index `i` with `cdf[i-1] <= u < cdf[i]`.
    #[inline]
    pub fn sample(&self, u: f64) -> usize {
        self.cdf
            .partition_point(|&c| c <= u)
            .min(self.cdf.len() - 1)
    }
}

/// Uniform `[0, 1)` double from the top 53 bits of a word.
#[inline]
pub fn unit_f64(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Counter-based stream: draw `j` of sample `s` is keystream word pair
/// `s * draws_per_sample + j` of ChaCha8 keyed by `seed`, so every sample
/// is addressable independently of evaluation order.
pub fn stream_at(seed: u64, sample: u64, draws_per_sample: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(2 * (sample as u128) * (draws_per_sample as u128));
    rng
}

/// Independent generator for an indexed sub-experiment (trial, point, ...).
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Running mean / second central moment (Welford), mergeable (Chan et al.).
#[derive(Debug, Clone, Copy, Default)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / count as f64;
        let m2 = self.m2
            + other.m2
            + delta * delta * (self.count as f64 * other.count as f64) / count as f64;
        Moments { count, mean, m2 }
    }

    /// Standard error of the mean (0 for fewer than two samples).
    pub fn std_error(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        (self.m2 / (self.count - 1) as f64 / self.count as f64).sqrt()
    }
}

/// Monte-Carlo mean of `f` over `samples` tuples of `arity` indices drawn
/// i.i.d. from `sampler`.
pub fn monte_carlo<F>(
    sampler: &WeightedSampler,
    arity: usize,
    samples: u64,
    seed: u64,
    f: F,
) -> Moments
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    let chunks = samples.div_ceil(MC_CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * MC_CHUNK;
            let end = (start + MC_CHUNK).min(samples);
            let mut rng = stream_at(seed, start, arity as u64);
            let mut idx = vec![0usize; arity];
            let mut m = Moments::default();
            for _ in start..end {
                for slot in idx.iter_mut() {
                    *slot = sampler.sample(unit_f64(rng.next_u64()));
                }
                m.push(f(&idx));
            }
            m
        })
        .collect();
    parts.into_iter().fold(Moments::default(), Moments::merge)
}
