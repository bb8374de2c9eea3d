//! Random-sampling baseline: draw `k` i.i.d. points from the certificate
//! weights and measure how far their mean lands from the target.
//!
//! Every trial seeds its own ChaCha8 stream from `(seed, k, trial)`, so the
//! report does not depend on how trials are scheduled.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::greedy::{ConvexTarget, PointSet};
use crate::lp_geometry::{norm_slice, SpaceSpec};

/// Name of the generator recorded in every report.
pub const GENERATOR: &str = "ChaCha8Rng(seed_from_u64; stream = k << 32 | trial)";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplingReport {
    pub k_values: Vec<usize>,
    /// `per_k_errors[j][t]` is the error of trial `t` at `k_values[j]`.
    pub per_k_errors: Vec<Vec<f64>>,
    pub seed: u64,
    pub generator: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorSummary {
    pub k: usize,
    pub median: f64,
    pub mean: f64,
    pub max: f64,
}

/// Inverse-CDF sampler over a fixed ascending index order.
struct CumulativeWeights {
    cdf: Vec<f64>,
}

impl CumulativeWeights {
    fn new(weights: &[f64]) -> Self {
        let mut acc = 0.0;
        let cdf = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        CumulativeWeights { cdf }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> usize {
        let total = *self.cdf.last().unwrap();
        let u = rng.random::<f64>() * total;
        let idx = self.cdf.partition_point(|&c| c <= u);
        idx.min(self.cdf.len() - 1)
    }
}

fn trial_rng(seed: u64, k: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((k as u64) << 32) | trial as u64);
    rng
}

/// Monte Carlo errors `||a - (1/k) sum samples||_p` for every `k` and trial.
pub fn maurey_sample(
    set: &PointSet,
    target: &ConvexTarget,
    space: &SpaceSpec,
    k_values: &[usize],
    trials: usize,
    seed: u64,
) -> Result<SamplingReport> {
    maurey_sample_with(set, target, space, k_values, trials, seed, Execution::default())
}

pub fn maurey_sample_with(
    set: &PointSet,
    target: &ConvexTarget,
    space: &SpaceSpec,
    k_values: &[usize],
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<SamplingReport> {
    space.check_dim(set.dim())?;
    let weights = target.weights.as_ref().ok_or(Error::MissingWeights)?;
    target.validate(set)?;
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    if k_values.is_empty() || k_values[0] == 0 || k_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("k values must be nonempty, positive and strictly ascending".into()));
    }
    if k_values.last().copied().unwrap_or(0) as u64 > u32::MAX as u64 || trials as u64 > u32::MAX as u64 {
        return Err(Error::InvalidInput("k and trial counts must fit in 32 bits".into()));
    }

    let sampler = CumulativeWeights::new(weights);
    let centered: Vec<Vec<f64>> = set.points().iter().map(|x| x.sub(&target.a).into_inner()).collect();
    let p = space.p();
    let dim = space.dim();

    let per_k_errors = k_values
        .iter()
        .map(|&k| {
            exec.map_range(trials, |trial| {
                let mut rng = trial_rng(seed, k, trial);
                let mut sum = vec![0.0; dim];
                for _ in 0..k {
                    let x = &centered[sampler.draw(&mut rng)];
                    for (s, c) in sum.iter_mut().zip(x) {
                        *s += c;
                    }
                }
                norm_slice(&sum, p) / k as f64
            })
        })
        .collect();

    Ok(SamplingReport {
        k_values: k_values.to_vec(),
        per_k_errors,
        seed,
        generator: GENERATOR,
    })
}

/// Median (lower-middle for even counts), mean and max per `k`.
pub fn summarize(report: &SamplingReport) -> Vec<ErrorSummary> {
    report
        .k_values
        .iter()
        .zip(&report.per_k_errors)
        .map(|(&k, errors)| {
            let mut sorted = errors.clone();
            sorted.sort_by(f64::total_cmp);
            let n = sorted.len();
            ErrorSummary {
                k,
                median: sorted[(n - 1) / 2],
                mean: sorted.iter().sum::<f64>() / n as f64,
                max: sorted[n - 1],
            }
        })
        .collect()
}

/// `1, 2, 4, ...` up to `k_max`, with `k_max` appended if it is not a power of two.
pub fn power_of_two_grid(k_max: usize) -> Vec<usize> {
    let mut ks = Vec::new();
    let mut k = 1usize;
    while k <= k_max {
        ks.push(k);
        match k.checked_mul(2) {
            Some(next) => k = next,
            None => break,
        }
    }
    if ks.last() != Some(&k_max) && k_max > 0 {
        ks.push(k_max);
    }
    ks
}
