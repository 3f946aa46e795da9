//! Brute-force Monte Carlo cross-checks of the spectral engine.
//!
//! Every trajectory `i` draws from its own ChaCha stream `(seed, i)`.
//! Trajectories are grouped into a fixed set of batches that depends only on
//! the trajectory count; batches run in parallel and are reduced in index
//! order with compensated sums, so estimates are bitwise reproducible for
//! any thread count.

mod averaging;
mod correlation;
mod trajectory;

pub use averaging::{averaged_exponential, mc_averaged_exponential, IntervalSet, Sign};
pub use correlation::{
    mc_autocorrelation, mc_autocorrelation_white, mc_spectrum, white_noise_dt, Autocorrelation, TauGrid,
};
pub use trajectory::{phase_integral, sample_trajectory, Trajectory, TrajectorySampler};

use crate::error::{invalid, Result};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::ops::Range;

/// Default trajectory count for averaged-exponential checks.
pub const DEFAULT_AVERAGING_TRAJECTORIES: usize = 100_000;
/// Default trajectory count for spectra.
pub const DEFAULT_SPECTRUM_TRAJECTORIES: usize = 20_000;
/// Default burn-in before the correlation window, in units of `1/γ`.
pub const DEFAULT_BURN_IN: f64 = 20.0;
/// Shortest burn-in accepted without a warning, in units of `1/γ`.
pub const MIN_BURN_IN: f64 = 10.0;

const MAX_BATCHES: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryConfig {
    pub seed: u64,
    pub n_trajectories: usize,
    pub t_start: f64,
    pub t_end: f64,
}

impl TrajectoryConfig {
    pub fn new(seed: u64, n_trajectories: usize, t_start: f64, t_end: f64) -> Result<Self> {
        let cfg = Self {
            seed,
            n_trajectories,
            t_start,
            t_end,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Span with the default burn-in followed by a correlation window of
    /// length `tau_max`.
    pub fn for_correlation(seed: u64, n_trajectories: usize, gamma: f64, tau_max: f64) -> Result<Self> {
        Self::new(seed, n_trajectories, 0.0, DEFAULT_BURN_IN / gamma + tau_max)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trajectories == 0 {
            return Err(invalid("n_trajectories must be >= 1"));
        }
        if !(self.t_start.is_finite() && self.t_end.is_finite() && self.t_end > self.t_start) {
            return Err(invalid(format!("bad trajectory span [{}, {}]", self.t_start, self.t_end)));
        }
        Ok(())
    }
}

/// Independent random stream for trajectory `index`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MCEstimate {
    pub mean: Complex64,
    /// `sqrt((var Re + var Im) / n)` with unbiased sample variances.
    pub std_error: f64,
    pub n_samples: usize,
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
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

    pub fn merge(&mut self, other: &Self) {
        self.add(other.sum);
        self.add(other.comp);
    }
}

/// Running first and second moments of complex samples.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Moments {
    re: Neumaier,
    im: Neumaier,
    re2: Neumaier,
    im2: Neumaier,
    n: usize,
}

impl Moments {
    pub(crate) fn push(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
        self.re2.add(z.re * z.re);
        self.im2.add(z.im * z.im);
        self.n += 1;
    }

    pub(crate) fn merge(&mut self, other: &Self) {
        self.re.merge(&other.re);
        self.im.merge(&other.im);
        self.re2.merge(&other.re2);
        self.im2.merge(&other.im2);
        self.n += other.n;
    }

    pub(crate) fn mean(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value()) / self.n as f64
    }

    pub(crate) fn estimate(&self) -> MCEstimate {
        let n = self.n as f64;
        let mean = self.mean();
        let var = |s2: &Neumaier, m: f64| {
            if self.n > 1 {
                ((s2.value() - n * m * m) / (n - 1.0)).max(0.0)
            } else {
                0.0
            }
        };
        let std_error = ((var(&self.re2, mean.re) + var(&self.im2, mean.im)) / n).sqrt();
        MCEstimate {
            mean,
            std_error,
            n_samples: self.n,
        }
    }
}

/// Fixed partition of `0..n` into at most `MAX_BATCHES` contiguous ranges.
pub(crate) fn batches(n: usize) -> Vec<Range<usize>> {
    let count = n.clamp(1, MAX_BATCHES);
    (0..count).map(|b| b * n / count..(b + 1) * n / count).collect()
}
