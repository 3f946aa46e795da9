//! Run configuration: TOML in, validated [`RunConfig`] out.

use crate::error::CliError;
use noisy_rf::engine::PhysicalParams;
use noisy_rf::linalg::RealMatrix;
use noisy_rf::noise::{build_multi_telegraph, MarkovNoiseSpec, TelegraphSpec, WhiteNoiseSpec};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Spectrum,
    Intensities,
    Peaks,
    Sweep,
    Oracle,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Mode::Spectrum => "spectrum",
            Mode::Intensities => "intensities",
            Mode::Peaks => "peaks",
            Mode::Sweep => "sweep",
            Mode::Oracle => "oracle",
        };
        f.write_str(name)
    }
}

/// Frequency scale all rates and detunings in the file are expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Unit {
    /// Telegraph splitting `Δ₀`.
    Splitting,
    /// Spontaneous emission rate `γ`.
    Gamma,
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Unit::Splitting => "splitting",
            Unit::Gamma => "gamma",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NoiseConfig {
    White {
        diffusion: f64,
        #[serde(default)]
        mean_detuning: f64,
    },
    Telegraph {
        beta: f64,
        #[serde(default)]
        asymmetry: f64,
        #[serde(default = "one")]
        splitting: f64,
        #[serde(default)]
        mean_detuning: f64,
        #[serde(default = "one_source")]
        n_sources: usize,
    },
    /// Explicit chain. `rates[m][n]` is the rate from state `n` to `m`;
    /// the diagonal is ignored and filled from the column sums.
    Markov { levels: Vec<f64>, rates: Vec<Vec<f64>> },
}

fn one() -> f64 {
    1.0
}

fn one_source() -> usize {
    1
}

/// Noise built from a [`NoiseConfig`].
#[derive(Debug, Clone)]
pub enum Noise {
    White(WhiteNoiseSpec),
    Markov {
        spec: MarkovNoiseSpec,
        telegraph: Option<TelegraphSpec>,
    },
}

impl NoiseConfig {
    pub fn build(&self) -> noisy_rf::Result<Noise> {
        match self {
            NoiseConfig::White {
                diffusion,
                mean_detuning,
            } => Ok(Noise::White(WhiteNoiseSpec::new(*diffusion, *mean_detuning)?)),
            NoiseConfig::Telegraph { .. } => {
                let t = self.telegraph().expect("telegraph variant");
                Ok(Noise::Markov {
                    spec: build_multi_telegraph(&t)?,
                    telegraph: Some(t),
                })
            }
            NoiseConfig::Markov { levels, rates } => {
                if rates.len() != levels.len() || rates.iter().any(|r| r.len() != levels.len()) {
                    return Err(noisy_rf::Error::InvalidParameter(format!(
                        "rates must be a {0}x{0} matrix to match {0} levels",
                        levels.len()
                    )));
                }
                let spec = MarkovNoiseSpec::from_rates(levels.clone(), &RealMatrix::from_rows(rates))?;
                Ok(Noise::Markov { spec, telegraph: None })
            }
        }
    }

    pub fn telegraph(&self) -> Option<TelegraphSpec> {
        match *self {
            NoiseConfig::Telegraph {
                beta,
                asymmetry,
                splitting,
                mean_detuning,
                n_sources,
            } => Some(TelegraphSpec {
                beta,
                asymmetry,
                splitting,
                mean_detuning,
                n_sources,
            }),
            _ => None,
        }
    }

    fn default_unit(&self) -> Unit {
        match self {
            NoiseConfig::White { .. } => Unit::Gamma,
            _ => Unit::Splitting,
        }
    }
}

/// `gamma`, `instr_gamma` and `rabi`; missing values are filled by
/// [`parse_config`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instr_gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rabi: Option<f64>,
}

impl PhysicsConfig {
    pub fn params(&self) -> noisy_rf::Result<PhysicalParams> {
        let missing = || noisy_rf::Error::InvalidParameter("physics block has unfilled defaults".into());
        PhysicalParams::new(
            self.gamma.ok_or_else(missing)?,
            self.instr_gamma.ok_or_else(missing)?,
            self.rabi.ok_or_else(missing)?,
        )
    }
}

/// Uniform frequency grid. Without one, a grid is built around the lines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    Beta,
    Asymmetry,
    MeanDetuning,
    Splitting,
    NSources,
    Diffusion,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Beta => "beta",
            Axis::Asymmetry => "asymmetry",
            Axis::MeanDetuning => "mean_detuning",
            Axis::Splitting => "splitting",
            Axis::NSources => "n_sources",
            Axis::Diffusion => "diffusion",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

/// Values taken by one sweep axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub axis: Axis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default)]
    pub scale: Scale,
}

impl AxisConfig {
    pub fn resolve(&self) -> Vec<f64> {
        if let Some(v) = &self.values {
            return v.clone();
        }
        let (Some(min), Some(max), Some(points)) = (self.min, self.max, self.points) else {
            return Vec::new();
        };
        if points == 1 {
            return vec![min];
        }
        (0..points)
            .map(|i| {
                let t = i as f64 / (points - 1) as f64;
                match self.scale {
                    Scale::Linear => min + t * (max - min),
                    Scale::Log => (min.ln() + t * (max.ln() - min.ln())).exp(),
                }
            })
            .collect()
    }

    fn problems(&self, out: &mut Vec<String>, name: &str) {
        match (&self.values, self.min, self.max, self.points) {
            (Some(v), None, None, None) => {
                if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                    out.push(format!("{name}.values must be a non-empty list of finite numbers"));
                }
            }
            (None, Some(min), Some(max), Some(points)) => {
                if points == 0 || !min.is_finite() || !max.is_finite() || max < min {
                    out.push(format!("{name}: need finite min <= max and points >= 1"));
                }
                if self.scale == Scale::Log && min <= 0.0 {
                    out.push(format!("{name}: log scale needs min > 0"));
                }
            }
            _ => out.push(format!("{name}: give either values or all of min, max, points")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observable {
    Intensities,
    Peaks,
    Spectrum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub observable: Observable,
    pub outer: AxisConfig,
    /// Optional second axis for two-dimensional maps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<AxisConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleCheck {
    /// Monte Carlo spectrum against the engine.
    Spectrum,
    /// Monte Carlo averaged phase factor against its closed form.
    AveragedExponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignConfig {
    Plus,
    Minus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub seed: u64,
    pub n_trajectories: usize,
    pub check: OracleCheck,
    /// Lag step for correlation functions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_step: Option<f64>,
    /// `[t_a, t_b, t_c, t_d]` for the averaged exponential.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervals: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign: Option<SignConfig>,
    /// Agreement threshold in standard errors.
    #[serde(default = "three")]
    pub sigmas: f64,
}

fn three() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<Unit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub noise: NoiseConfig,
    #[serde(default)]
    pub physics: PhysicsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
}

impl RunConfig {
    pub fn unit(&self) -> Unit {
        self.unit.unwrap_or_else(|| self.noise.default_unit())
    }

    pub fn params(&self) -> noisy_rf::Result<PhysicalParams> {
        self.physics.params()
    }

    /// Sets the mode from the command line, rejecting a conflicting one in
    /// the file.
    pub fn with_mode(mut self, mode: Mode) -> Result<Self, CliError> {
        match self.mode {
            Some(m) if m != mode => Err(CliError::Config(format!(
                "config declares mode {m} but the command asks for {mode}"
            ))),
            _ => {
                self.mode = Some(mode);
                self.validate()?;
                Ok(self)
            }
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configs always serialize")
    }

    fn fill_defaults(&mut self) {
        let unit = self.unit();
        self.unit = Some(unit);
        let ph = &mut self.physics;
        let gamma = *ph.gamma.get_or_insert_with(|| match (unit, &self.noise) {
            (Unit::Gamma, _) => 1.0,
            (Unit::Splitting, NoiseConfig::Telegraph { splitting, .. }) => 0.02 * splitting,
            (Unit::Splitting, _) => 0.02,
        });
        ph.instr_gamma.get_or_insert(gamma / 4.0);
        ph.rabi.get_or_insert(gamma / 10.0);
    }

    /// Every violation, not just the first.
    pub fn validate(&self) -> Result<(), CliError> {
        let mut problems = Vec::new();
        if let Err(e) = self.params() {
            problems.push(e.to_string());
        }
        if let Err(e) = self.noise.build() {
            problems.push(e.to_string());
        }
        if self.unit() == Unit::Splitting && matches!(self.noise, NoiseConfig::White { .. }) {
            problems.push("white noise has no splitting; use unit = \"gamma\"".into());
        }
        if let Some(g) = &self.grid {
            if g.points < 2 || !g.min.is_finite() || !g.max.is_finite() || g.max <= g.min {
                problems.push(format!("grid needs finite min < max and points >= 2, got {g:?}"));
            }
        }
        if let Some(s) = &self.sweep {
            s.outer.problems(&mut problems, "sweep.outer");
            if let Some(inner) = &s.inner {
                inner.problems(&mut problems, "sweep.inner");
                if inner.axis == s.outer.axis {
                    problems.push("sweep.inner and sweep.outer use the same axis".into());
                }
            }
            for a in std::iter::once(&s.outer).chain(&s.inner) {
                let telegraph_axis = !matches!(a.axis, Axis::Diffusion);
                let fits = match &self.noise {
                    NoiseConfig::White { .. } => matches!(a.axis, Axis::Diffusion | Axis::MeanDetuning),
                    NoiseConfig::Telegraph { .. } => telegraph_axis,
                    NoiseConfig::Markov { .. } => false,
                };
                if !fits {
                    problems.push(format!("axis {} does not apply to this noise kind", a.axis));
                }
            }
        }
        if let Some(o) = &self.oracle {
            if o.n_trajectories == 0 {
                problems.push("oracle.n_trajectories must be >= 1".into());
            }
            if !(o.sigmas > 0.0) {
                problems.push("oracle.sigmas must be > 0".into());
            }
            match o.check {
                OracleCheck::Spectrum => {
                    if !o.tau_step.is_some_and(|t| t > 0.0 && t.is_finite()) {
                        problems.push("oracle.tau_step must be given and > 0 for a spectrum check".into());
                    }
                    if !self.physics.instr_gamma.is_some_and(|g| g > 0.0) {
                        problems.push("a spectrum check needs instr_gamma > 0".into());
                    }
                }
                OracleCheck::AveragedExponential => {
                    if matches!(self.noise, NoiseConfig::White { .. }) {
                        problems.push("averaged-exponential checks need Markov noise".into());
                    }
                    match o.intervals {
                        Some([a, b, c, d]) if a <= b && b <= c && c <= d && a.is_finite() && d.is_finite() => {}
                        _ => problems.push("oracle.intervals must be [t_a, t_b, t_c, t_d] with t_a <= t_b <= t_c <= t_d".into()),
                    }
                    if o.sign.is_none() {
                        problems.push("oracle.sign must be \"plus\" or \"minus\"".into());
                    }
                }
            }
        }
        match self.mode {
            Some(Mode::Sweep) if self.sweep.is_none() => problems.push("mode sweep needs a [sweep] block".into()),
            Some(Mode::Oracle) if self.oracle.is_none() => problems.push("mode oracle needs an [oracle] block".into()),
            _ => {}
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(problems.join("\n")))
        }
    }
}

/// Parses, fills defaults and validates.
///
/// Defaults: telegraph and explicit chains work in units of the splitting
/// with `γ = 0.02`; white noise works in units of `γ` with `γ = 1`. In both
/// cases `Γ = γ/4` and `Ω = γ/10`.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let mut cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    cfg.fill_defaults();
    cfg.validate()?;
    Ok(cfg)
}
