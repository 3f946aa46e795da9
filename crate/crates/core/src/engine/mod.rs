//! Spectra, intensities and peak structure for white and Markov noise.
//!
//! All spectra are raw `F(ω)` including the `Ω²/4` prefactor, sampled on
//! offsets `δω = ω − ω_L`. Intensities are reported alongside the reference
//! resonant intensity `I₀ = πΩ²/γ²`.

mod grid;
mod integrate;
mod limits;
mod markov;
mod peaks;
mod white;

pub use grid::{default_grid, peak_grid, WINDOW_WIDTHS};
pub use integrate::{integrate_spectrum, IntegralEstimate};
pub use limits::{telegraph_limit, LimitingIntensities, SwitchingLimit, TableDetuning};
pub use markov::{fast_limit_intensity, markov_intensities, markov_spectrum, quasi_static_intensity};
pub use peaks::{peak_analysis, telegraph_poles, white_noise_peaks, CLUSTER_TOL};
pub use white::{white_noise_intensities, white_noise_spectrum};

use crate::error::{invalid, Result};
use num_complex::Complex64;
use serde::Serialize;

/// Emitter and detection parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalParams {
    /// Spontaneous emission rate `γ`.
    pub gamma: f64,
    /// Lorentzian instrumental broadening `Γ`.
    pub instr_gamma: f64,
    /// Rabi frequency `Ω`; only sets the overall `Ω²` scale.
    pub rabi: f64,
}

impl PhysicalParams {
    pub fn new(gamma: f64, instr_gamma: f64, rabi: f64) -> Result<Self> {
        let p = Self {
            gamma,
            instr_gamma,
            rabi,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            problems.push(format!("gamma must be finite and > 0, got {}", self.gamma));
        }
        if !(self.instr_gamma >= 0.0 && self.instr_gamma.is_finite()) {
            problems.push(format!("instrumental width must be finite and >= 0, got {}", self.instr_gamma));
        }
        if !(self.rabi > 0.0 && self.rabi.is_finite()) {
            problems.push(format!("rabi frequency must be finite and > 0, got {}", self.rabi));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(invalid(problems.join("; ")))
        }
    }

    /// `I₀ = πΩ²/γ²`.
    pub fn i0(&self) -> f64 {
        std::f64::consts::PI * self.rabi * self.rabi / (self.gamma * self.gamma)
    }

    pub(crate) fn require_broadening(&self) -> Result<()> {
        if self.instr_gamma > 0.0 {
            Ok(())
        } else {
            Err(invalid(
                "on-grid spectra need instrumental width > 0; the elastic line is a delta otherwise",
            ))
        }
    }
}

/// Strictly increasing frequency offsets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyGrid {
    offsets: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(offsets: Vec<f64>) -> Result<Self> {
        if offsets.len() < 2 {
            return Err(invalid("frequency grid needs at least 2 points"));
        }
        if offsets.iter().any(|x| !x.is_finite()) {
            return Err(invalid("frequency grid must be finite"));
        }
        if offsets.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("frequency grid must be strictly increasing"));
        }
        Ok(Self { offsets })
    }

    pub fn uniform(min: f64, max: f64, points: usize) -> Result<Self> {
        if points < 2 || !(max > min) {
            return Err(invalid(format!("bad uniform grid [{min}, {max}] with {points} points")));
        }
        let step = (max - min) / (points - 1) as f64;
        let mut offsets: Vec<f64> = (0..points).map(|i| min + step * i as f64).collect();
        offsets[points - 1] = max;
        Self::new(offsets)
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub grid: FrequencyGrid,
    pub total: Vec<f64>,
    /// Only available for white noise.
    pub elastic: Option<Vec<f64>>,
    pub inelastic: Option<Vec<f64>>,
    /// One-sigma statistical band for Monte Carlo spectra.
    pub mc_error: Option<Vec<f64>>,
}

impl Spectrum {
    pub(crate) fn total_only(grid: FrequencyGrid, total: Vec<f64>) -> Self {
        Self {
            grid,
            total,
            elastic: None,
            inelastic: None,
            mc_error: None,
        }
    }

    pub fn max(&self) -> f64 {
        self.total.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntensityReport {
    pub i0: f64,
    pub total: f64,
    pub elastic: f64,
    pub inelastic: f64,
}

impl IntensityReport {
    pub fn total_ratio(&self) -> f64 {
        self.total / self.i0
    }

    pub fn elastic_ratio(&self) -> f64 {
        self.elastic / self.i0
    }

    pub fn inelastic_ratio(&self) -> f64 {
        self.inelastic / self.i0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PeakFamily {
    /// From an eigenvalue `λ` of the generator `C`; centered at `−Im λ`.
    Central,
    /// From an eigenvalue `b` of `B = C + i diag(Δ)`.
    Side,
    /// A closed-form telegraph pole.
    ClosedFormPole,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub position: f64,
    pub hwhm: f64,
    pub family: PeakFamily,
    pub source_eigenvalue: Complex64,
    /// Number of eigenvalues merged into this entry.
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct PeakReport {
    pub peaks: Vec<Peak>,
    pub warnings: Vec<String>,
}

impl PeakReport {
    pub fn family(&self, family: PeakFamily) -> impl Iterator<Item = &Peak> {
        self.peaks.iter().filter(move |p| p.family == family)
    }

    pub fn max_hwhm(&self) -> f64 {
        self.peaks.iter().map(|p| p.hwhm).fold(0.0, f64::max)
    }
}
