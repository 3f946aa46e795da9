//! Reference values for a single symmetric telegraph in the static and
//! ultrafast switching limits, relative to `I₀`.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SwitchingLimit {
    Static,
    Fast,
}

/// Laser position relative to the mean transition energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TableDetuning {
    /// `Δ̄ = 0`: midway between the two levels.
    Midway,
    /// `Δ̄ = Δ₀/2`: resonant with one level.
    OnLevel,
}

/// Limiting intensities of the spectral components, in units of `I₀`.
/// `l0` is the elastic line; `l1` the broadened central line. The side lines
/// vanish in both limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitingIntensities {
    pub total: f64,
    pub l0: f64,
    pub l1: f64,
}

/// `gamma_ratio` is `γ/Δ₀`.
pub fn telegraph_limit(detuning: TableDetuning, limit: SwitchingLimit, gamma_ratio: f64) -> LimitingIntensities {
    let g2 = gamma_ratio * gamma_ratio;
    match (detuning, limit) {
        (TableDetuning::Midway, SwitchingLimit::Static) => LimitingIntensities {
            total: g2 / (g2 + 1.0),
            l0: g2 * g2 / (g2 + 1.0).powi(2),
            l1: g2 / (g2 + 1.0).powi(2),
        },
        (TableDetuning::Midway, SwitchingLimit::Fast) => LimitingIntensities {
            total: 1.0,
            l0: 1.0,
            l1: 0.0,
        },
        (TableDetuning::OnLevel, SwitchingLimit::Static) => LimitingIntensities {
            total: (g2 + 2.0) / (g2 + 4.0),
            l0: (g2 + 1.0) / (g2 + 4.0),
            l1: 1.0 / (g2 + 4.0),
        },
        (TableDetuning::OnLevel, SwitchingLimit::Fast) => LimitingIntensities {
            total: g2 / (g2 + 1.0),
            l0: g2 / (g2 + 1.0),
            l1: 0.0,
        },
    }
}
