//! Noise-process specifications and their stationary laws.
//!
//! Generators use the column convention: entry `(m, n)` is the jump rate
//! from state `n` to state `m`, so probability vectors are columns and every
//! column of a generator sums to zero.

use crate::error::{invalid, Error, Result};
use crate::linalg::{expm_real, solve_real, ComplexMatrix, RealMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Column-sum tolerance, relative to `max(1, largest rate)`.
const GENERATOR_TOL: f64 = 1e-12;

/// Phase diffusion with coefficient `D` around a mean detuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WhiteNoiseSpec {
    pub diffusion: f64,
    pub mean_detuning: f64,
}

impl WhiteNoiseSpec {
    pub fn new(diffusion: f64, mean_detuning: f64) -> Result<Self> {
        let spec = Self {
            diffusion,
            mean_detuning,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.diffusion >= 0.0 && self.diffusion.is_finite()) {
            return Err(invalid(format!("diffusion must be finite and >= 0, got {}", self.diffusion)));
        }
        if !self.mean_detuning.is_finite() {
            return Err(invalid("mean detuning must be finite"));
        }
        Ok(())
    }
}

/// Symmetric or asymmetric telegraph noise from `n_sources` independent
/// two-state fluctuators.
///
/// Rates are parametrized as `up = beta (1 - x)` and `down = beta (1 + x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TelegraphSpec {
    pub beta: f64,
    pub asymmetry: f64,
    pub splitting: f64,
    pub mean_detuning: f64,
    pub n_sources: usize,
}

impl TelegraphSpec {
    /// Single symmetric source.
    pub fn symmetric(beta: f64, splitting: f64, mean_detuning: f64) -> Self {
        Self {
            beta,
            asymmetry: 0.0,
            splitting,
            mean_detuning,
            n_sources: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            problems.push(format!("beta must be finite and > 0, got {}", self.beta));
        }
        if !(self.splitting > 0.0 && self.splitting.is_finite()) {
            problems.push(format!("splitting must be finite and > 0, got {}", self.splitting));
        }
        if !(self.asymmetry.abs() <= 1.0) {
            problems.push(format!("asymmetry must lie in [-1, 1], got {}", self.asymmetry));
        }
        if !self.mean_detuning.is_finite() {
            problems.push("mean detuning must be finite".into());
        }
        if self.n_sources == 0 {
            problems.push("n_sources must be >= 1".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(invalid(problems.join("; ")))
        }
    }

    /// `(up, down)` switching rates.
    pub fn rates(&self) -> (f64, f64) {
        (self.beta * (1.0 - self.asymmetry), self.beta * (1.0 + self.asymmetry))
    }
}

/// Finite-state stationary Markov detuning process.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovNoiseSpec {
    levels: Vec<f64>,
    generator: RealMatrix,
}

impl MarkovNoiseSpec {
    pub fn new(levels: Vec<f64>, generator: RealMatrix) -> Result<Self> {
        let k = levels.len();
        if k == 0 {
            return Err(invalid("at least one detuning level is required"));
        }
        if generator.dim() != k {
            return Err(invalid(format!(
                "generator is {0}x{0} but there are {k} levels",
                generator.dim()
            )));
        }
        if levels.iter().any(|l| !l.is_finite()) || generator.as_slice().iter().any(|c| !c.is_finite()) {
            return Err(invalid("levels and generator entries must be finite"));
        }
        let scale = generator.norm_max().max(1.0);
        let mut problems = Vec::new();
        for n in 0..k {
            for m in 0..k {
                let c = generator[(m, n)];
                if m != n && c < 0.0 {
                    problems.push(format!("negative rate {c} at ({m}, {n})"));
                }
            }
            if generator[(n, n)] > 0.0 {
                problems.push(format!("positive diagonal entry at ({n}, {n})"));
            }
            let sum = generator.column_sum(n);
            if sum.abs() > GENERATOR_TOL * scale {
                problems.push(format!("column {n} sums to {sum:e}"));
            }
        }
        if !problems.is_empty() {
            return Err(invalid(problems.join("; ")));
        }
        Ok(Self { levels, generator })
    }

    /// Generator with the diagonal filled in so that columns sum to zero.
    pub fn from_rates(levels: Vec<f64>, rates: &RealMatrix) -> Result<Self> {
        let k = rates.dim();
        let mut gen = rates.clone();
        for n in 0..k {
            gen[(n, n)] = 0.0;
            let out: f64 = (0..k).map(|m| gen[(m, n)]).sum();
            gen[(n, n)] = -out;
        }
        Self::new(levels, gen)
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn generator(&self) -> &RealMatrix {
        &self.generator
    }

    /// `B = C + i diag(levels)`.
    pub fn b_matrix(&self) -> ComplexMatrix {
        let mut b = ComplexMatrix::from_real(&self.generator);
        for (j, &l) in self.levels.iter().enumerate() {
            b[(j, j)] += Complex64::new(0.0, l);
        }
        b
    }

    /// Largest absolute rate.
    pub fn rate_scale(&self) -> f64 {
        self.generator.norm_max()
    }
}

/// Probability vector annihilated by the generator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryDistribution {
    probabilities: Vec<f64>,
    reducible: bool,
}

impl StationaryDistribution {
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// True when some state cannot reach every other one (for example a
    /// telegraph with `|x| = 1`). The law is still unique but concentrated
    /// on the closed class.
    pub fn is_reducible(&self) -> bool {
        self.reducible
    }

    /// `Σ p_j v_j`.
    pub fn mean_of(&self, values: &[f64]) -> f64 {
        self.probabilities.iter().zip(values).map(|(p, v)| p * v).sum()
    }
}

pub fn build_single_telegraph(spec: &TelegraphSpec) -> Result<MarkovNoiseSpec> {
    spec.validate()?;
    if spec.n_sources != 1 {
        return Err(invalid(format!("single telegraph needs n_sources = 1, got {}", spec.n_sources)));
    }
    build_multi_telegraph(spec)
}

/// Tridiagonal generator on the number `j = 0..=N` of sources in the upper
/// state, with equally spaced levels scaled by `1/√N`.
pub fn build_multi_telegraph(spec: &TelegraphSpec) -> Result<MarkovNoiseSpec> {
    spec.validate()?;
    let n = spec.n_sources;
    let (up, down) = spec.rates();
    let root = (n as f64).sqrt();
    let levels = (0..=n)
        .map(|j| spec.mean_detuning - root * spec.splitting / 2.0 + j as f64 * spec.splitting / root)
        .collect();
    let mut rates = RealMatrix::zeros(n + 1);
    for j in 1..=n {
        rates[(j - 1, j)] = j as f64 * down;
        rates[(j, j - 1)] = (n + 1 - j) as f64 * up;
    }
    MarkovNoiseSpec::from_rates(levels, &rates)
}

/// Solves `C p = 0`, `Σ p = 1` through the bordered system obtained by
/// replacing the first row of `C` with ones.
pub fn stationary_distribution(noise: &MarkovNoiseSpec) -> Result<StationaryDistribution> {
    let k = noise.dim();
    let c = noise.generator();
    if k == 1 {
        return Ok(StationaryDistribution {
            probabilities: vec![1.0],
            reducible: false,
        });
    }
    let mut bordered = c.clone();
    for j in 0..k {
        bordered[(0, j)] = 1.0;
    }
    let mut rhs = vec![0.0; k];
    rhs[0] = 1.0;
    let mut p = solve_real(&bordered, &rhs, 1e-13 * k as f64).map_err(|_| {
        Error::DegenerateChain("generator nullspace has dimension > 1".into())
    })?;

    for v in p.iter_mut() {
        if *v < 0.0 {
            if *v < -1e-10 {
                return Err(Error::DegenerateChain(format!("negative stationary weight {v:e}")));
            }
            *v = 0.0;
        }
    }
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);

    let scale = noise.rate_scale().max(f64::MIN_POSITIVE);
    let residual = c.matvec(&p).iter().fold(0.0f64, |m, r| m.max(r.abs())) / scale;
    if residual > 1e-10 {
        return Err(Error::DegenerateChain(format!("stationary residual {residual:e}")));
    }

    Ok(StationaryDistribution {
        probabilities: p,
        reducible: !strongly_connected(c),
    })
}

fn strongly_connected(c: &RealMatrix) -> bool {
    let k = c.dim();
    let reach = |forward: bool| {
        let mut seen = vec![false; k];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(n) = stack.pop() {
            for m in 0..k {
                let rate = if forward { c[(m, n)] } else { c[(n, m)] };
                if m != n && rate > 0.0 && !seen[m] {
                    seen[m] = true;
                    stack.push(m);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}

/// `P(τ) = exp(C τ)`, with roundoff excursions outside `[0, 1]` clamped.
pub fn transition_matrix(noise: &MarkovNoiseSpec, tau: f64) -> Result<RealMatrix> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(invalid(format!("tau must be finite and >= 0, got {tau}")));
    }
    let mut p = expm_real(noise.generator(), tau)?;
    let k = p.dim();
    for i in 0..k {
        for j in 0..k {
            let v = p[(i, j)];
            if !(-1e-10..=1.0 + 1e-10).contains(&v) {
                return Err(Error::Numerics(format!("transition probability {v} out of range")));
            }
            p[(i, j)] = v.clamp(0.0, 1.0);
        }
    }
    Ok(p)
}
