//! Monte-Carlo estimator of the improvement distribution, used as a
//! correctness oracle and as the runtime baseline.
//!
//! Sampling is keyed by a ChaCha8 stream per fixed-size chunk, so the draw
//! sequence is identical no matter how chunks would be scheduled.

use std::time::Instant;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dist::{BiGaussian, HviDistribution};
use crate::gauss::{self, QuadratureConfig};
use crate::pareto::{ParetoFront2D, Point2};

/// Number of samples served by one RNG stream.
const CHUNK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub n_samples: usize,
    pub seed: u64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum McError {
    #[error("empirical CDF of an empty sample")]
    EmptySample,
}

/// A uniform draw strictly inside (0, 1).
fn unit_open(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}

fn normal_draw(rng: &mut ChaCha8Rng, mu: f64, sigma: f64) -> f64 {
    mu + sigma * gauss::std_quantile(unit_open(rng))
}

/// Draws objective points from the predictive law and returns the
/// generalized hypervolume improvement of each. Deterministic per seed.
pub fn sample_hvi(front: &ParetoFront2D, pred: &BiGaussian, cfg: &McConfig) -> Vec<f64> {
    let mut out = Vec::with_capacity(cfg.n_samples);
    let chunks = (cfg.n_samples as u64).div_ceil(CHUNK);
    for chunk in 0..chunks {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(chunk);
        let lo = chunk * CHUNK;
        let hi = (lo + CHUNK).min(cfg.n_samples as u64);
        for _ in lo..hi {
            let y1 = normal_draw(&mut rng, pred.mu1, pred.sigma1);
            let y2 = normal_draw(&mut rng, pred.mu2, pred.sigma2);
            out.push(front.generalized_hvi(Point2::new(y1, y2)));
        }
    }
    out
}

/// Fraction of samples not exceeding `delta`.
pub fn empirical_cdf(samples: &[f64], delta: f64) -> Result<f64, McError> {
    if samples.is_empty() {
        return Err(McError::EmptySample);
    }
    let count = samples.iter().filter(|&&s| s <= delta).count();
    Ok(count as f64 / samples.len() as f64)
}

/// Empirical distribution with sorted samples for fast repeated queries.
#[derive(Debug, Clone)]
pub struct EmpiricalDistribution {
    sorted: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(mut samples: Vec<f64>) -> Result<Self, McError> {
        if samples.is_empty() {
            return Err(McError::EmptySample);
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self { sorted: samples })
    }

    pub fn cdf(&self, delta: f64) -> f64 {
        let k = self.sorted.partition_point(|&s| s <= delta);
        k as f64 / self.sorted.len() as f64
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    /// Largest deviation from `cdf` over all sample points (the
    /// Kolmogorov–Smirnov statistic against a right-continuous CDF).
    pub fn sup_distance<F: Fn(f64) -> f64>(&self, cdf: F) -> f64 {
        let n = self.sorted.len() as f64;
        let mut sup: f64 = 0.0;
        for (idx, &x) in self.sorted.iter().enumerate() {
            let f = cdf(x);
            sup = sup.max((f - idx as f64 / n).abs());
            sup = sup.max((f - (idx as f64 + 1.0) / n).abs());
        }
        sup
    }
}

/// One row of the exact-vs-MC timing table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingRow {
    pub n: usize,
    pub t_exact_s: f64,
    pub t_mc_s: f64,
}

/// Measures the time to evaluate the improvement CDF at the predictive
/// mean's improvement value, exactly (build + one CDF evaluation) versus by
/// Monte Carlo (`mc_cfg.n_samples` draws + one empirical CDF query). Reports
/// the median of `reps` single-threaded repetitions after one discarded
/// warm-up round per front.
pub fn timing_comparison(
    fronts: &[ParetoFront2D],
    pred: &BiGaussian,
    mc_cfg: &McConfig,
    quad: &QuadratureConfig,
    reps: usize,
) -> Vec<TimingRow> {
    let reps = reps.max(1);
    fronts
        .iter()
        .map(|front| {
            let probe = front.generalized_hvi(pred.mean());
            let mut t_exact = Vec::with_capacity(reps);
            let mut t_mc = Vec::with_capacity(reps);
            for rep in 0..=reps {
                let start = Instant::now();
                let dist = HviDistribution::build(front, pred, quad).expect("valid inputs");
                let exact = dist.marginal_cdf(probe);
                let exact_elapsed = start.elapsed().as_secs_f64();

                let start = Instant::now();
                let samples = sample_hvi(front, pred, mc_cfg);
                let mc = empirical_cdf(&samples, probe).expect("non-empty samples");
                let mc_elapsed = start.elapsed().as_secs_f64();

                std::hint::black_box((exact, mc));
                if rep > 0 {
                    t_exact.push(exact_elapsed);
                    t_mc.push(mc_elapsed);
                }
            }
            TimingRow {
                n: front.len(),
                t_exact_s: median(&mut t_exact),
                t_mc_s: median(&mut t_mc),
            }
        })
        .collect()
}

/// Deterministic front for the timing benchmark: `n` points spread along
/// the segment `y1 + y2 = 10` inside `[0, 10]^2` with a small seeded jitter,
/// reference point `(11, 11)`.
pub fn bench_front(n: usize, seed: u64) -> ParetoFront2D {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    for i in 0..n {
        let y1 = 10.0 * (i as f64 + 0.5) / n as f64;
        // Jitter below half the spacing keeps the staircase strict.
        let jitter = (unit_open(&mut rng) - 0.5) * 4.0 / n as f64;
        points.push(Point2::new(y1, 10.0 - y1 + jitter));
    }
    ParetoFront2D::new(points, Point2::new(11.0, 11.0)).expect("strictly ordered by construction")
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}
