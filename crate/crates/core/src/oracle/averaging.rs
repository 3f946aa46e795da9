use super::{batches, phase_integral, trajectory_rng, MCEstimate, Moments, TrajectoryConfig, TrajectorySampler};
use crate::error::{invalid, Result};
use crate::linalg::{expm, ComplexMatrix};
use crate::noise::{stationary_distribution, transition_matrix, MarkovNoiseSpec};
use num_complex::Complex64;
use rayon::prelude::*;

/// Sign `η` between the two phase factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Ordered times `t_a < t_b ≤ t_c < t_d` (equalities allowed for empty
/// intervals).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalSet {
    pub t_a: f64,
    pub t_b: f64,
    pub t_c: f64,
    pub t_d: f64,
}

impl IntervalSet {
    pub fn new(t_a: f64, t_b: f64, t_c: f64, t_d: f64) -> Result<Self> {
        if !(t_a <= t_b && t_b <= t_c && t_c <= t_d) || ![t_a, t_b, t_c, t_d].iter().all(|t| t.is_finite()) {
            return Err(invalid(format!("interval times must satisfy a <= b <= c <= d, got {t_a}, {t_b}, {t_c}, {t_d}")));
        }
        Ok(Self { t_a, t_b, t_c, t_d })
    }

    pub fn shifted(&self, s: f64) -> Self {
        Self {
            t_a: self.t_a + s,
            t_b: self.t_b + s,
            t_c: self.t_c + s,
            t_d: self.t_d + s,
        }
    }
}

/// `1ᵀ e^{B(t_d − t_c)} P(t_c − t_b) e^{B^η (t_b − t_a)} p`, the stationary
/// average of `exp(iΦ(t_d, t_c) + iηΦ(t_b, t_a))`. `B^η` is `B` or `B*`.
pub fn averaged_exponential(noise: &MarkovNoiseSpec, iv: &IntervalSet, sign: Sign) -> Result<Complex64> {
    let pst = stationary_distribution(noise)?;
    let b = noise.b_matrix();
    let first = match sign {
        Sign::Plus => b.clone(),
        Sign::Minus => b.conj(),
    };
    let mut v: Vec<Complex64> = pst.probabilities().iter().map(|&x| Complex64::new(x, 0.0)).collect();
    v = expm(&first, iv.t_b - iv.t_a)?.matvec(&v);
    v = ComplexMatrix::from_real(&transition_matrix(noise, iv.t_c - iv.t_b)?).matvec(&v);
    v = expm(&b, iv.t_d - iv.t_c)?.matvec(&v);
    Ok(v.iter().sum())
}

/// Monte Carlo estimate of the same average over trajectories spanning
/// `[cfg.t_start, cfg.t_end]`, which must contain the intervals.
pub fn mc_averaged_exponential(
    noise: &MarkovNoiseSpec,
    cfg: &TrajectoryConfig,
    iv: &IntervalSet,
    sign: Sign,
) -> Result<MCEstimate> {
    cfg.validate()?;
    if iv.t_a < cfg.t_start || iv.t_d > cfg.t_end {
        return Err(invalid("intervals must lie within the trajectory span"));
    }
    let sampler = TrajectorySampler::new(noise)?;
    let levels = noise.levels();
    let eta = sign.value();
    let partial = batches(cfg.n_trajectories)
        .into_par_iter()
        .map(|range| {
            let mut m = Moments::default();
            for i in range {
                let tr = sampler.sample(cfg.t_start, cfg.t_end, &mut trajectory_rng(cfg.seed, i as u64));
                let phi = phase_integral(&tr, levels, iv.t_c, iv.t_d)? + eta * phase_integral(&tr, levels, iv.t_a, iv.t_b)?;
                m.push(Complex64::from_polar(1.0, phi));
            }
            Ok(m)
        })
        .collect::<Result<Vec<Moments>>>()?;
    let mut total = Moments::default();
    for m in &partial {
        total.merge(m);
    }
    Ok(total.estimate())
}
