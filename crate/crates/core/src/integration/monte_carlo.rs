//! Monte Carlo oracles.
//!
//! Samples are split into fixed shards of [`SHARD_SIZE`]. Shard `s` draws
//! from ChaCha8 keyed by the user seed with stream id `s`, so each shard's
//! numbers are fixed by `(seed, s)` alone. Shards may run on any number of
//! workers; their statistics are merged in shard order, which makes every
//! estimate a deterministic function of `(seed, samples)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::IntegralResult;
use crate::error::{domain, Error, Result};
use crate::geometry::{ln_ball_volume, ln_sphere_area};
use crate::polynomial::{Coefficient, MultiPoly};

pub const SHARD_SIZE: u64 = 1 << 14;

/// Above this dimension hit-or-miss sampling is refused: its acceptance
/// ratio `V_n / 2^n` is below `1e-9` at n = 26.
pub const HIT_OR_MISS_MAX_DIM: usize = 25;

/// Named constructor for the per-shard generator.
pub struct StreamRng;

impl StreamRng {
    pub fn shard(seed: u64, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        rng
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BallVolumeEstimator {
    /// Uniform points in `[-1, 1]^n`, counting hits in the ball.
    HitOrMiss,
    /// Importance sampling from `N(0, I/(n+1))`, weighted by the inverse density.
    GaussianRatio,
}

#[derive(Clone, Copy, Debug, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let d = other.mean - self.mean;
        let mean = self.mean + d * other.count as f64 / count as f64;
        let m2 = self.m2 + other.m2 + d * d * (self.count as f64 * other.count as f64) / count as f64;
        Self { count, mean, m2 }
    }

    /// Standard error of the mean.
    fn std_error(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        (self.m2 / (self.count - 1) as f64 / self.count as f64).sqrt()
    }
}

fn sharded<F>(samples: u64, seed: u64, sample: F) -> Moments
where
    F: Fn(&mut ChaCha8Rng, &mut Vec<f64>) -> f64 + Sync,
{
    let shards = samples.div_ceil(SHARD_SIZE);
    let parts: Vec<Moments> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = StreamRng::shard(seed, s);
            let mut scratch = Vec::new();
            let count = SHARD_SIZE.min(samples - s * SHARD_SIZE);
            let mut m = Moments::default();
            for _ in 0..count {
                m.push(sample(&mut rng, &mut scratch));
            }
            m
        })
        .collect();
    parts.into_iter().fold(Moments::default(), Moments::merge)
}

fn gaussian_direction(rng: &mut ChaCha8Rng, n: usize, out: &mut Vec<f64>) {
    out.clear();
    loop {
        out.extend((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            out.iter_mut().for_each(|v| *v /= norm);
            return;
        }
        out.clear();
    }
}

/// Flat term list for fast repeated evaluation.
struct Compiled {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl Compiled {
    fn new<C: Coefficient>(p: &MultiPoly<C>) -> Self {
        let terms = p
            .terms()
            .map(|(idx, c)| {
                let powers =
                    idx.exponents().iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, &e)| (i, e as i32)).collect();
                (c.to_f64(), powers)
            })
            .collect();
        Self { terms }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(c, pw)| pw.iter().fold(*c, |acc, &(i, e)| acc * x[i].powi(e))).sum()
    }
}

fn check_samples(samples: u64) -> Result<()> {
    if samples == 0 {
        return domain("Monte Carlo integration needs at least one sample");
    }
    Ok(())
}

/// `∫_{∂B_r} p dΣ` from uniformly distributed directions (normalised Gaussians).
pub fn mc_poly_sphere<C: Coefficient>(p: &MultiPoly<C>, r: f64, samples: u64, seed: u64) -> Result<IntegralResult> {
    check_samples(samples)?;
    let n = p.dimension();
    let f = Compiled::new(p);
    let m = sharded(samples, seed, |rng, x| {
        gaussian_direction(rng, n, x);
        x.iter_mut().for_each(|v| *v *= r);
        f.eval(x)
    });
    let area = ln_sphere_area(n, r).exp();
    Ok(IntegralResult::estimate(area * m.mean, area * m.std_error()))
}

/// `∫_{B_r} p dx` by exact radial inversion: direction uniform, radius `r U^{1/n}`.
pub fn mc_poly_ball<C: Coefficient>(p: &MultiPoly<C>, r: f64, samples: u64, seed: u64) -> Result<IntegralResult> {
    check_samples(samples)?;
    let n = p.dimension();
    let f = Compiled::new(p);
    let inv_n = 1.0 / n as f64;
    let m = sharded(samples, seed, |rng, x| {
        gaussian_direction(rng, n, x);
        let s = r * rng.random::<f64>().powf(inv_n);
        x.iter_mut().for_each(|v| *v *= s);
        f.eval(x)
    });
    let vol = ln_ball_volume(n, r).exp();
    Ok(IntegralResult::estimate(vol * m.mean, vol * m.std_error()))
}

/// Estimate `Vol(B^n)` with standard error.
pub fn mc_ball_volume(n: usize, samples: u64, seed: u64, estimator: BallVolumeEstimator) -> Result<IntegralResult> {
    check_samples(samples)?;
    if n == 0 {
        return domain("dimension must be positive");
    }
    match estimator {
        BallVolumeEstimator::HitOrMiss => {
            if n > HIT_OR_MISS_MAX_DIM {
                return Err(Error::Refused(format!(
                    "hit-or-miss in dimension {n}: acceptance ratio V_n/2^n is too small for a usable hit count; \
                     use the Gaussian-ratio estimator"
                )));
            }
            let m = sharded(samples, seed, |rng, _| {
                let mut sq = 0.0;
                for _ in 0..n {
                    let v = 2.0 * rng.random::<f64>() - 1.0;
                    sq += v * v;
                }
                if sq < 1.0 {
                    1.0
                } else {
                    0.0
                }
            });
            let cube = 2f64.powi(n as i32);
            Ok(IntegralResult::estimate(cube * m.mean, cube * m.std_error()))
        }
        BallVolumeEstimator::GaussianRatio => {
            let var = 1.0 / (n as f64 + 1.0);
            let sd = var.sqrt();
            let shift = (n as f64 + 1.0) / 2.0;
            // weights rescaled by exp(-shift) so they lie in (0, 1]
            let m = sharded(samples, seed, |rng, _| {
                let mut sq = 0.0;
                for _ in 0..n {
                    let z = sd * rng.sample::<f64, _>(StandardNormal);
                    sq += z * z;
                }
                if sq < 1.0 {
                    (sq / (2.0 * var) - shift).exp()
                } else {
                    0.0
                }
            });
            if m.mean == 0.0 {
                return Ok(IntegralResult::estimate(0.0, 0.0));
            }
            let ln_scale = n as f64 / 2.0 * (2.0 * std::f64::consts::PI * var).ln() + shift;
            let ln_value = ln_scale + m.mean.ln();
            let value = ln_value.exp();
            let mut out = IntegralResult::estimate(value, value * m.std_error() / m.mean);
            out.log_abs_value = ln_value;
            Ok(out)
        }
    }
}
