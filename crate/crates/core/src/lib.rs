//! Resonance fluorescence spectra of a weakly driven two-level emitter whose
//! transition frequency is modulated by classical noise.
//!
//! [`noise`] describes the noise, [`engine`] computes spectra, intensities
//! and line shapes from its generator, [`oracle`] cross-checks them by
//! Monte Carlo, and [`linalg`] holds the dense matrix routines they share.

pub mod engine;
pub mod error;
pub mod linalg;
pub mod noise;
pub mod oracle;

pub use engine::{
    FrequencyGrid, IntensityReport, Peak, PeakFamily, PeakReport, PhysicalParams, Spectrum,
};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, RealMatrix};
pub use noise::{MarkovNoiseSpec, StationaryDistribution, TelegraphSpec, WhiteNoiseSpec};
pub use oracle::{MCEstimate, Trajectory, TrajectoryConfig};
