use super::{trajectory_rng, TrajectoryConfig};
use crate::error::{Error, Result};
use crate::noise::{stationary_distribution, MarkovNoiseSpec};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::Exp1;

/// One piecewise-constant realization of the noise state on
/// `[t_start, t_end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    t_start: f64,
    t_end: f64,
    jump_times: Vec<f64>,
    /// `states[0]` holds on `[t_start, jump_times[0])`, `states[i]` on
    /// `[jump_times[i-1], jump_times[i])`.
    states: Vec<usize>,
}

impl Trajectory {
    pub fn span(&self) -> (f64, f64) {
        (self.t_start, self.t_end)
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn state_indices(&self) -> &[usize] {
        &self.states
    }

    pub fn jump_count(&self) -> usize {
        self.jump_times.len()
    }

    /// Piecewise-constant segments `(start, end, state)` covering the span.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, usize)> + '_ {
        let starts = std::iter::once(self.t_start).chain(self.jump_times.iter().copied());
        let ends = self.jump_times.iter().copied().chain(std::iter::once(self.t_end));
        starts.zip(ends).zip(&self.states).map(|((a, b), &s)| (a, b, s))
    }

    /// Time spent in each of `k` states.
    pub fn occupation(&self, k: usize) -> Vec<f64> {
        let mut occ = vec![0.0; k];
        for (a, b, s) in self.segments() {
            occ[s] += b - a;
        }
        occ
    }
}

/// Precomputed sampling tables for one generator.
#[derive(Debug, Clone)]
pub struct TrajectorySampler {
    initial: WeightedIndex<f64>,
    exit_rates: Vec<f64>,
    jumps: Vec<Option<WeightedIndex<f64>>>,
}

impl TrajectorySampler {
    pub fn new(noise: &MarkovNoiseSpec) -> Result<Self> {
        let pst = stationary_distribution(noise)?;
        let initial = WeightedIndex::new(pst.probabilities().iter().copied())
            .map_err(|e| Error::DegenerateChain(e.to_string()))?;
        let c = noise.generator();
        let k = noise.dim();
        let exit_rates: Vec<f64> = (0..k).map(|n| -c[(n, n)]).collect();
        let jumps = (0..k)
            .map(|n| {
                if exit_rates[n] > 0.0 {
                    WeightedIndex::new((0..k).map(|m| if m == n { 0.0 } else { c[(m, n)] })).ok()
                } else {
                    None
                }
            })
            .collect();
        Ok(Self {
            initial,
            exit_rates,
            jumps,
        })
    }

    /// Jump-chain sampling: initial state from the stationary law, holding
    /// time `Exp(−C_nn)`, next state with probability `C_mn / (−C_nn)`.
    pub fn sample<R: Rng>(&self, t_start: f64, t_end: f64, rng: &mut R) -> Trajectory {
        let mut state = self.initial.sample(rng);
        let mut t = t_start;
        let mut jump_times = Vec::new();
        let mut states = vec![state];
        loop {
            let Some(next) = &self.jumps[state] else { break };
            let hold: f64 = Exp1.sample(rng);
            t += hold / self.exit_rates[state];
            if t >= t_end {
                break;
            }
            state = next.sample(rng);
            jump_times.push(t);
            states.push(state);
        }
        Trajectory {
            t_start,
            t_end,
            jump_times,
            states,
        }
    }
}

/// Trajectory `stream` of the ensemble described by `cfg`.
pub fn sample_trajectory(noise: &MarkovNoiseSpec, cfg: &TrajectoryConfig, stream: u64) -> Result<Trajectory> {
    cfg.validate()?;
    let sampler = TrajectorySampler::new(noise)?;
    Ok(sampler.sample(cfg.t_start, cfg.t_end, &mut trajectory_rng(cfg.seed, stream)))
}

/// `Φ(t_b, t_a) = ∫_{t_a}^{t_b} Δ(s) ds`, summed exactly over segments.
pub fn phase_integral(traj: &Trajectory, levels: &[f64], t_a: f64, t_b: f64) -> Result<f64> {
    let (start, end) = traj.span();
    for t in [t_a, t_b] {
        if !(t >= start && t <= end) {
            return Err(Error::OutOfSpan { time: t, start, end });
        }
    }
    let (lo, hi, sign) = if t_a <= t_b { (t_a, t_b, 1.0) } else { (t_b, t_a, -1.0) };
    let mut phi = 0.0;
    for (a, b, s) in traj.segments() {
        if b <= lo {
            continue;
        }
        if a >= hi {
            break;
        }
        phi += levels[s] * (b.min(hi) - a.max(lo));
    }
    Ok(sign * phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::RealMatrix;
    use crate::noise::{build_single_telegraph, TelegraphSpec};

    fn telegraph(beta: f64, x: f64) -> MarkovNoiseSpec {
        build_single_telegraph(&TelegraphSpec {
            beta,
            asymmetry: x,
            splitting: 1.0,
            mean_detuning: 0.0,
            n_sources: 1,
        })
        .unwrap()
    }

    #[test]
    fn mean_jump_count() {
        let beta = 0.7;
        let t = 50.0;
        let noise = telegraph(beta, 0.0);
        let cfg = TrajectoryConfig::new(3, 1, 0.0, t).unwrap();
        let n = 4000;
        let counts: Vec<f64> = (0..n)
            .map(|i| sample_trajectory(&noise, &cfg, i).unwrap().jump_count() as f64)
            .collect();
        let mean = counts.iter().sum::<f64>() / n as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        // Each state is left at rate β for the symmetric telegraph.
        assert!((mean - beta * t).abs() < 3.0 * se, "{mean} vs {}", beta * t);
    }

    #[test]
    fn absorbing_lower_state_never_jumps() {
        let noise = telegraph(1.0, 1.0);
        let cfg = TrajectoryConfig::new(11, 1, 0.0, 100.0).unwrap();
        for i in 0..200 {
            let tr = sample_trajectory(&noise, &cfg, i).unwrap();
            assert_eq!(tr.state_indices(), &[0]);
        }
    }

    #[test]
    fn occupation_fractions_approach_stationary_law() {
        let noise = telegraph(2.0, 0.4);
        let cfg = TrajectoryConfig::new(5, 1, 0.0, 200.0).unwrap();
        let sampler = TrajectorySampler::new(&noise).unwrap();
        let fractions: Vec<f64> = (0..400)
            .map(|i| {
                let tr = sampler.sample(cfg.t_start, cfg.t_end, &mut trajectory_rng(cfg.seed, i));
                tr.occupation(2)[0] / 200.0
            })
            .collect();
        let n = fractions.len() as f64;
        let mean = fractions.iter().sum::<f64>() / n;
        let se = (fractions.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
        assert!((mean - 0.7).abs() < 3.0 * se, "{mean}");
    }

    #[test]
    fn phase_of_constant_trajectory() {
        let noise = MarkovNoiseSpec::new(vec![0.3], RealMatrix::zeros(1)).unwrap();
        let cfg = TrajectoryConfig::new(0, 1, 0.0, 10.0).unwrap();
        let tr = sample_trajectory(&noise, &cfg, 0).unwrap();
        assert!((phase_integral(&tr, noise.levels(), 0.0, 10.0).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn symmetric_jump_cancels_phase() {
        let tr = Trajectory {
            t_start: 0.0,
            t_end: 4.0,
            jump_times: vec![2.0],
            states: vec![0, 1],
        };
        assert_eq!(phase_integral(&tr, &[-0.5, 0.5], 0.0, 4.0).unwrap(), 0.0);
    }

    #[test]
    fn phase_is_additive_and_checks_span() {
        let noise = telegraph(3.0, -0.2);
        let cfg = TrajectoryConfig::new(1, 1, 0.0, 5.0).unwrap();
        let tr = sample_trajectory(&noise, &cfg, 42).unwrap();
        let l = noise.levels();
        let whole = phase_integral(&tr, l, 0.3, 4.1).unwrap();
        let parts = phase_integral(&tr, l, 0.3, 2.2).unwrap() + phase_integral(&tr, l, 2.2, 4.1).unwrap();
        assert!((whole - parts).abs() < 1e-14);
        assert!(matches!(phase_integral(&tr, l, -1.0, 1.0), Err(Error::OutOfSpan { .. })));
    }

    #[test]
    fn same_stream_same_trajectory() {
        let noise = telegraph(1.5, 0.1);
        let cfg = TrajectoryConfig::new(77, 1, 0.0, 30.0).unwrap();
        assert_eq!(sample_trajectory(&noise, &cfg, 9).unwrap(), sample_trajectory(&noise, &cfg, 9).unwrap());
        assert_ne!(sample_trajectory(&noise, &cfg, 9).unwrap(), sample_trajectory(&noise, &cfg, 10).unwrap());
    }
}
