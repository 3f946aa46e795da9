use super::{batches, trajectory_rng, MCEstimate, Moments, TrajectoryConfig, TrajectorySampler, MIN_BURN_IN};
use crate::engine::{FrequencyGrid, PhysicalParams, Spectrum};
use crate::error::{invalid, Error, Result};
use crate::noise::{MarkovNoiseSpec, WhiteNoiseSpec};
use num_complex::Complex64;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

/// Largest admitted `e^{−Γ τ_max}` when transforming a correlation function.
const TAU_WINDOW_RESIDUAL: f64 = 1e-4;

/// White-noise time step in units of `min(1/γ, 1/D)`.
const WHITE_STEP: f64 = 0.01;

/// Uniform lag grid `τ_j = j · step`, `j = 0..points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauGrid {
    pub step: f64,
    pub points: usize,
}

impl TauGrid {
    pub fn new(step: f64, points: usize) -> Result<Self> {
        let g = Self { step, points };
        g.validate()?;
        Ok(g)
    }

    /// Smallest grid with the given step whose window satisfies the
    /// instrumental decay requirement of [`mc_spectrum`].
    pub fn covering_decay(step: f64, instr_gamma: f64) -> Result<Self> {
        if !(instr_gamma > 0.0) {
            return Err(invalid("instrumental width must be > 0"));
        }
        let tau_max = -TAU_WINDOW_RESIDUAL.ln() / instr_gamma * 1.01;
        Self::new(step, (tau_max / step).ceil() as usize + 1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) || self.points < 2 {
            return Err(invalid(format!("bad lag grid: step {}, {} points", self.step, self.points)));
        }
        Ok(())
    }

    pub fn tau_max(&self) -> f64 {
        self.step * (self.points - 1) as f64
    }

    pub fn taus(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(|j| j as f64 * self.step)
    }
}

/// Monte Carlo estimate of `G(τ) = ⟨p*(t) p(t + τ)⟩`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Autocorrelation {
    pub tau: TauGrid,
    pub values: Vec<MCEstimate>,
    /// Per-batch means of `G`, used to propagate errors into spectra.
    pub batch_means: Vec<Vec<Complex64>>,
    pub warnings: Vec<String>,
}

impl Autocorrelation {
    pub fn means(&self) -> Vec<Complex64> {
        self.values.iter().map(|v| v.mean).collect()
    }
}

/// Closed-form step of `dp/dt = a p + c` over `dt`.
#[derive(Debug, Clone, Copy)]
struct Propagator {
    a: Complex64,
    c: Complex64,
}

impl Propagator {
    fn new(detuning: f64, p: &PhysicalParams) -> Self {
        Self {
            a: Complex64::new(-0.5 * p.gamma, detuning),
            c: Complex64::new(0.0, 0.5 * p.rabi),
        }
    }

    fn factors(&self, dt: f64) -> (Complex64, Complex64) {
        let e = (self.a * dt).exp();
        (e, self.c * (e - 1.0) / self.a)
    }

    fn advance(&self, state: Complex64, dt: f64) -> Complex64 {
        let (e, k) = self.factors(dt);
        state * e + k
    }

    /// Fixed point `−c/a`.
    fn stationary(&self) -> Complex64 {
        -self.c / self.a
    }
}

/// Burn-in length and warnings for a span and lag window.
fn burn_in(cfg: &TrajectoryConfig, p: &PhysicalParams, tau: &TauGrid) -> Result<(f64, Vec<String>)> {
    cfg.validate()?;
    p.validate()?;
    tau.validate()?;
    let burn = cfg.t_end - tau.tau_max() - cfg.t_start;
    if burn < 0.0 {
        return Err(invalid(format!(
            "lag window {} exceeds the trajectory span {}",
            tau.tau_max(),
            cfg.t_end - cfg.t_start
        )));
    }
    let mut warnings = Vec::new();
    if burn * p.gamma < MIN_BURN_IN {
        warnings.push(format!(
            "burn-in of {:.3}/gamma is shorter than {MIN_BURN_IN}/gamma; the polarization may not be stationary",
            burn * p.gamma
        ));
    }
    Ok((burn, warnings))
}

/// Combines per-trajectory products `p*(t₀) p(t₀ + τ_j)` into estimates.
fn reduce<F>(n_trajectories: usize, points: usize, sample: F) -> Result<(Vec<MCEstimate>, Vec<Vec<Complex64>>)>
where
    F: Fn(usize) -> Result<Vec<Complex64>> + Sync,
{
    let per_batch = batches(n_trajectories)
        .into_par_iter()
        .map(|range| {
            let mut m = vec![Moments::default(); points];
            for i in range {
                for (acc, g) in m.iter_mut().zip(sample(i)?) {
                    acc.push(g);
                }
            }
            Ok(m)
        })
        .collect::<Result<Vec<Vec<Moments>>>>()?;
    let mut total = vec![Moments::default(); points];
    for m in &per_batch {
        for (t, b) in total.iter_mut().zip(m) {
            t.merge(b);
        }
    }
    let batch_means = per_batch.iter().map(|m| m.iter().map(Moments::mean).collect()).collect();
    Ok((total.iter().map(Moments::estimate).collect(), batch_means))
}

fn products(window: &[Complex64]) -> Vec<Complex64> {
    let origin = window[0].conj();
    window.iter().map(|&x| origin * x).collect()
}

/// `G(τ)` for Markov noise. Each trajectory starts from the frozen
/// stationary polarization of its initial state, evolves exactly across
/// every constant segment, and contributes one lag window at the end of the
/// span.
pub fn mc_autocorrelation(
    noise: &MarkovNoiseSpec,
    p: &PhysicalParams,
    cfg: &TrajectoryConfig,
    tau: &TauGrid,
) -> Result<Autocorrelation> {
    let (burn, warnings) = burn_in(cfg, p, tau)?;
    let sampler = TrajectorySampler::new(noise)?;
    let props: Vec<Propagator> = noise.levels().iter().map(|&d| Propagator::new(d, p)).collect();
    let cached: Vec<(Complex64, Complex64)> = props.iter().map(|pr| pr.factors(tau.step)).collect();
    let t0 = cfg.t_start + burn;

    let (values, batch_means) = reduce(cfg.n_trajectories, tau.points, |i| {
        let tr = sampler.sample(cfg.t_start, cfg.t_end, &mut trajectory_rng(cfg.seed, i as u64));
        let mut window = Vec::with_capacity(tau.points);
        let mut state = props[tr.state_indices()[0]].stationary();
        let mut t = cfg.t_start;
        // True while `t` sits exactly on the previous lag point.
        let mut on_grid = false;
        for (_, end, s) in tr.segments() {
            loop {
                let j = window.len();
                if j == tau.points {
                    break;
                }
                let target = t0 + j as f64 * tau.step;
                if target > end {
                    break;
                }
                state = if on_grid {
                    let (e, k) = cached[s];
                    state * e + k
                } else {
                    props[s].advance(state, target - t)
                };
                window.push(state);
                t = target;
                on_grid = true;
            }
            if window.len() == tau.points {
                break;
            }
            if end > t {
                state = props[s].advance(state, end - t);
                t = end;
                on_grid = false;
            }
        }
        // The last lag point can fall a rounding error beyond `t_end`.
        while window.len() < tau.points {
            let s = *tr.state_indices().last().unwrap();
            let target = t0 + window.len() as f64 * tau.step;
            state = props[s].advance(state, target - t);
            window.push(state);
            t = target;
        }
        Ok(products(&window))
    })?;
    Ok(Autocorrelation {
        tau: *tau,
        values,
        batch_means,
        warnings,
    })
}

/// Time step for white-noise trajectories: `0.01 · min(1/γ, 1/D)`, reduced
/// so that it divides the lag step.
pub fn white_noise_dt(wn: &WhiteNoiseSpec, p: &PhysicalParams, tau_step: f64) -> f64 {
    let base = WHITE_STEP / p.gamma.max(wn.diffusion);
    tau_step / (tau_step / base).ceil()
}

/// `G(τ)` for white noise. The accumulated phase over each step `dt` is
/// drawn from `N(Δ̄ dt, D dt)` and the detuning is held at `φ/dt` within
/// the step.
pub fn mc_autocorrelation_white(
    wn: &WhiteNoiseSpec,
    p: &PhysicalParams,
    cfg: &TrajectoryConfig,
    tau: &TauGrid,
) -> Result<Autocorrelation> {
    wn.validate()?;
    let (burn, warnings) = burn_in(cfg, p, tau)?;
    let dt = white_noise_dt(wn, p, tau.step);
    let per_lag = (tau.step / dt).round() as usize;
    let burn_steps = (burn / dt).ceil().max(1.0) as usize;
    let burn_dt = burn / burn_steps as f64;
    let phase = |h: f64| Normal::new(wn.mean_detuning * h, (wn.diffusion * h).sqrt()).map_err(|e| invalid(e.to_string()));
    let (burn_law, law) = (phase(burn_dt)?, phase(dt)?);
    let start = Propagator::new(wn.mean_detuning, p).stationary();

    let step = |state: Complex64, h: f64, law: &Normal<f64>, rng: &mut dyn rand::RngCore| {
        let phi: f64 = if wn.diffusion > 0.0 { law.sample(rng) } else { wn.mean_detuning * h };
        Propagator::new(phi / h, p).advance(state, h)
    };

    let (values, batch_means) = reduce(cfg.n_trajectories, tau.points, |i| {
        let mut rng = trajectory_rng(cfg.seed, i as u64);
        let mut state = start;
        if burn > 0.0 {
            for _ in 0..burn_steps {
                state = step(state, burn_dt, &burn_law, &mut rng);
            }
        }
        let mut window = Vec::with_capacity(tau.points);
        window.push(state);
        for _ in 1..tau.points {
            for _ in 0..per_lag {
                state = step(state, dt, &law, &mut rng);
            }
            window.push(state);
        }
        Ok(products(&window))
    })?;
    Ok(Autocorrelation {
        tau: *tau,
        values,
        batch_means,
        warnings,
    })
}

/// `F(δω) = Re ∫₀^{τ_max} e^{(iδω − Γ)τ} G(τ) dτ` by the trapezoid rule.
///
/// The error band is the spread of the per-batch spectra divided by
/// `√batches`; with a single batch it falls back to `Σ w_j e^{−Γτ_j} σ_j`.
pub fn mc_spectrum(acf: &Autocorrelation, p: &PhysicalParams, grid: &FrequencyGrid) -> Result<Spectrum> {
    p.validate()?;
    p.require_broadening()?;
    let tau = &acf.tau;
    let residual = (-p.instr_gamma * tau.tau_max()).exp();
    if residual >= TAU_WINDOW_RESIDUAL {
        return Err(Error::TauWindowTooShort { residual });
    }
    // Trapezoid weights with the instrumental decay folded in.
    let weights: Vec<f64> = tau
        .taus()
        .enumerate()
        .map(|(j, t)| {
            let end = j == 0 || j == tau.points - 1;
            tau.step * if end { 0.5 } else { 1.0 } * (-p.instr_gamma * t).exp()
        })
        .collect();
    let transform = |g: &[Complex64], w: f64| {
        let rot = Complex64::from_polar(1.0, w * tau.step);
        let mut phase = Complex64::new(1.0, 0.0);
        let mut sum = 0.0;
        for (gj, wj) in g.iter().zip(&weights) {
            sum += wj * (phase * gj).re;
            phase *= rot;
        }
        sum
    };
    let means = acf.means();
    let total: Vec<f64> = grid.offsets().par_iter().map(|&w| transform(&means, w)).collect();
    let band: Vec<f64> = if acf.batch_means.len() > 1 {
        let b = acf.batch_means.len() as f64;
        grid.offsets()
            .par_iter()
            .map(|&w| {
                let f: Vec<f64> = acf.batch_means.iter().map(|g| transform(g, w)).collect();
                let m = f.iter().sum::<f64>() / b;
                let var = f.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (b - 1.0);
                (var / b).sqrt()
            })
            .collect()
    } else {
        let bound: f64 = acf.values.iter().zip(&weights).map(|(v, w)| w * v.std_error).sum();
        vec![bound; grid.len()]
    };
    let mut s = Spectrum::total_only(grid.clone(), total);
    s.mc_error = Some(band);
    Ok(s)
}
