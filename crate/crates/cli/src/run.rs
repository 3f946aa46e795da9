//! Executes a validated [`RunConfig`] and writes its output files.

use crate::config::{Axis, Mode, Noise, NoiseConfig, Observable, OracleCheck, RunConfig, SignConfig};
use crate::error::CliError;
use crate::output::{num, write_json, Csv};
use noisy_rf::engine::{
    default_grid, fast_limit_intensity, markov_intensities, markov_spectrum, peak_analysis, quasi_static_intensity,
    telegraph_poles, white_noise_intensities, white_noise_peaks, white_noise_spectrum, FrequencyGrid,
    IntensityReport, PeakFamily, PeakReport, PhysicalParams, Spectrum,
};
use noisy_rf::oracle::{
    averaged_exponential, mc_autocorrelation, mc_autocorrelation_white, mc_averaged_exponential, mc_spectrum,
    IntervalSet, Sign, TauGrid, TrajectoryConfig,
};
use serde::Serialize;
use std::path::{Path, PathBuf};

/// Points on the grid built around the lines when none is configured.
pub const DEFAULT_GRID_POINTS: usize = 4001;
/// Same for Monte Carlo spectra, whose transform cost scales with the grid.
pub const ORACLE_GRID_POINTS: usize = 801;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// Files written by a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
}

pub fn run(cfg: &RunConfig, opts: &RunOptions) -> Result<RunOutput, CliError> {
    let mode = cfg
        .mode
        .ok_or_else(|| CliError::Config("no mode given".into()))?;
    let out = opts
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(format!("noisy-rf-{mode}")));
    let ctx = Context::new(cfg)?;
    match mode {
        Mode::Spectrum => ctx.spectrum_mode(&out.with_extension("csv")),
        Mode::Intensities => ctx.intensities_mode(&out.with_extension("json")),
        Mode::Peaks => ctx.peaks_mode(&out.with_extension("json")),
        Mode::Sweep => ctx.sweep_mode(&out.with_extension("csv")),
        Mode::Oracle => ctx.oracle_mode(&out, opts.seed),
    }
}

struct Context<'a> {
    cfg: &'a RunConfig,
    noise: Noise,
    params: PhysicalParams,
}

#[derive(Serialize)]
struct Echo<'a> {
    unit: String,
    physics: PhysicalParams,
    noise: &'a NoiseConfig,
}

impl<'a> Context<'a> {
    fn new(cfg: &'a RunConfig) -> Result<Self, CliError> {
        Ok(Self {
            cfg,
            noise: cfg.noise.build()?,
            params: cfg.params()?,
        })
    }

    fn echo(&self) -> Echo<'a> {
        Echo {
            unit: self.cfg.unit().to_string(),
            physics: self.params,
            noise: &self.cfg.noise,
        }
    }

    fn comments(&self, csv: &mut Csv) {
        let p = &self.params;
        csv.comment(format!("frequencies and rates in units of {}", self.cfg.unit()));
        csv.comment(format!(
            "gamma = {}, instr_gamma = {}, rabi = {}, I0 = {}",
            num(p.gamma),
            num(p.instr_gamma),
            num(p.rabi),
            num(p.i0())
        ));
    }

    fn peaks(noise: &Noise, p: &PhysicalParams) -> noisy_rf::Result<PeakReport> {
        match noise {
            Noise::White(w) => white_noise_peaks(w, p),
            Noise::Markov { spec, .. } => peak_analysis(spec, p),
        }
    }

    fn spectrum(noise: &Noise, p: &PhysicalParams, grid: &FrequencyGrid) -> noisy_rf::Result<Spectrum> {
        match noise {
            Noise::White(w) => white_noise_spectrum(w, p, grid),
            Noise::Markov { spec, .. } => markov_spectrum(spec, p, grid),
        }
    }

    fn intensities(noise: &Noise, p: &PhysicalParams) -> noisy_rf::Result<IntensityReport> {
        match noise {
            Noise::White(w) => white_noise_intensities(w, p),
            Noise::Markov { spec, .. } => markov_intensities(spec, p),
        }
    }

    fn grid(&self, noise: &Noise, points: usize) -> noisy_rf::Result<FrequencyGrid> {
        match &self.cfg.grid {
            Some(g) => FrequencyGrid::uniform(g.min, g.max, g.points),
            None => default_grid(&Self::peaks(noise, &self.params)?, points),
        }
    }

    fn spectrum_mode(&self, path: &Path) -> Result<RunOutput, CliError> {
        let grid = self.grid(&self.noise, DEFAULT_GRID_POINTS)?;
        let s = Self::spectrum(&self.noise, &self.params, &grid)?;
        let split = s.elastic.as_ref().zip(s.inelastic.as_ref());
        let mut header = vec!["omega_offset", "F_total"];
        if split.is_some() {
            header.extend(["F_elastic", "F_inelastic"]);
        }
        let mut csv = Csv::new(header);
        self.comments(&mut csv);
        for (i, (&w, &f)) in grid.offsets().iter().zip(&s.total).enumerate() {
            match split {
                Some((el, inel)) => csv.numbers([w, f, el[i], inel[i]]),
                None => csv.numbers([w, f]),
            }
        }
        csv.write(path)?;
        Ok(RunOutput {
            files: vec![path.to_path_buf()],
        })
    }

    fn intensities_mode(&self, path: &Path) -> Result<RunOutput, CliError> {
        #[derive(Serialize)]
        struct Ratios {
            total: f64,
            elastic: f64,
            inelastic: f64,
        }
        #[derive(Serialize)]
        struct Summary<'a> {
            config: Echo<'a>,
            intensities: IntensityReport,
            ratios_to_i0: Ratios,
            #[serde(skip_serializing_if = "Option::is_none")]
            quasi_static_total: Option<f64>,
            #[serde(skip_serializing_if = "Option::is_none")]
            fast_limit_total: Option<f64>,
        }
        let r = Self::intensities(&self.noise, &self.params)?;
        let (qs, fast) = match &self.noise {
            Noise::Markov { spec, .. } => (
                Some(quasi_static_intensity(spec, &self.params)?),
                Some(fast_limit_intensity(spec, &self.params)?),
            ),
            Noise::White(_) => (None, None),
        };
        write_json(
            path,
            &Summary {
                config: self.echo(),
                intensities: r,
                ratios_to_i0: Ratios {
                    total: r.total_ratio(),
                    elastic: r.elastic_ratio(),
                    inelastic: r.inelastic_ratio(),
                },
                quasi_static_total: qs,
                fast_limit_total: fast,
            },
        )?;
        Ok(RunOutput {
            files: vec![path.to_path_buf()],
        })
    }

    fn peaks_mode(&self, path: &Path) -> Result<RunOutput, CliError> {
        #[derive(Serialize)]
        struct Summary<'a> {
            config: Echo<'a>,
            peaks: PeakReport,
            #[serde(skip_serializing_if = "Option::is_none")]
            closed_form_poles: Option<PeakReport>,
        }
        let peaks = Self::peaks(&self.noise, &self.params)?;
        let closed_form_poles = match &self.noise {
            Noise::Markov {
                telegraph: Some(t), ..
            } if t.n_sources == 1 => Some(telegraph_poles(t, &self.params)?),
            _ => None,
        };
        write_json(
            path,
            &Summary {
                config: self.echo(),
                peaks,
                closed_form_poles,
            },
        )?;
        Ok(RunOutput {
            files: vec![path.to_path_buf()],
        })
    }

    fn sweep_mode(&self, path: &Path) -> Result<RunOutput, CliError> {
        let sweep = self.cfg.sweep.as_ref().expect("validated sweep block");
        let outer = sweep.outer.resolve();
        let inner = sweep.inner.as_ref().map(|a| (a.axis, a.resolve()));
        let mut header = vec![sweep.outer.axis.to_string()];
        if let Some((axis, _)) = &inner {
            header.push(axis.to_string());
        }
        if sweep.observable == Observable::Spectrum {
            header.push("omega_offset".into());
        }
        header.extend(["quantity".into(), "value".into()]);
        let mut csv = Csv::new(header);
        self.comments(&mut csv);
        csv.comment(format!("sweep of {} over {}", format!("{:?}", sweep.observable).to_lowercase(), sweep.outer.axis));

        let inner_values: Vec<Option<f64>> = match &inner {
            Some((_, v)) => v.iter().copied().map(Some).collect(),
            None => vec![None],
        };
        for &a in &outer {
            for &b in &inner_values {
                let mut noise_cfg = apply(&self.cfg.noise, sweep.outer.axis, a)?;
                if let (Some((axis, _)), Some(b)) = (&inner, b) {
                    noise_cfg = apply(&noise_cfg, *axis, b)?;
                }
                let noise = noise_cfg.build()?;
                let mut prefix = vec![num(a)];
                prefix.extend(b.map(num));
                self.sweep_rows(&mut csv, &prefix, sweep.observable, &noise)?;
            }
        }
        csv.write(path)?;
        Ok(RunOutput {
            files: vec![path.to_path_buf()],
        })
    }

    fn sweep_rows(&self, csv: &mut Csv, prefix: &[String], obs: Observable, noise: &Noise) -> Result<(), CliError> {
        let mut emit = |extra: Option<f64>, quantity: &str, value: f64| {
            let mut row = prefix.to_vec();
            row.extend(extra.map(num));
            row.push(quantity.to_string());
            row.push(num(value));
            csv.row(row);
        };
        match obs {
            Observable::Intensities => {
                let r = Self::intensities(noise, &self.params)?;
                emit(None, "I_tot/I0", r.total_ratio());
                emit(None, "I_el/I0", r.elastic_ratio());
                emit(None, "I_inel/I0", r.inelastic_ratio());
            }
            Observable::Peaks => {
                let r = Self::peaks(noise, &self.params)?;
                for family in [PeakFamily::Central, PeakFamily::Side] {
                    let name = match family {
                        PeakFamily::Central => "central",
                        _ => "side",
                    };
                    for (i, q) in r.family(family).enumerate() {
                        emit(None, &format!("{name}{i}.position"), q.position);
                        emit(None, &format!("{name}{i}.hwhm"), q.hwhm);
                        emit(None, &format!("{name}{i}.multiplicity"), q.multiplicity as f64);
                    }
                }
            }
            Observable::Spectrum => {
                let grid = self.grid(noise, DEFAULT_GRID_POINTS)?;
                let s = Self::spectrum(noise, &self.params, &grid)?;
                for (&w, &f) in grid.offsets().iter().zip(&s.total) {
                    emit(Some(w), "F_total", f);
                }
            }
        }
        Ok(())
    }

    fn oracle_mode(&self, out: &Path, seed: Option<u64>) -> Result<RunOutput, CliError> {
        let o = self.cfg.oracle.as_ref().expect("validated oracle block");
        let seed = seed.unwrap_or(o.seed);
        let summary_path = out.with_extension("json");
        match o.check {
            OracleCheck::Spectrum => {
                let csv_path = out.with_extension("csv");
                let p = &self.params;
                let tau = TauGrid::covering_decay(o.tau_step.expect("validated tau step"), p.instr_gamma)?;
                let tcfg = TrajectoryConfig::for_correlation(seed, o.n_trajectories, p.gamma, tau.tau_max())?;
                let acf = match &self.noise {
                    Noise::White(w) => mc_autocorrelation_white(w, p, &tcfg, &tau)?,
                    Noise::Markov { spec, .. } => mc_autocorrelation(spec, p, &tcfg, &tau)?,
                };
                let grid = self.grid(&self.noise, ORACLE_GRID_POINTS)?;
                let mc = mc_spectrum(&acf, p, &grid)?;
                let reference = Self::spectrum(&self.noise, p, &grid)?;
                let band = mc.mc_error.as_deref().expect("monte carlo spectra carry a band");

                let mut csv = Csv::new(["omega_offset", "F_total", "mc_error", "F_reference"]);
                self.comments(&mut csv);
                csv.comment(format!("seed = {seed}, n_trajectories = {}", o.n_trajectories));
                for (((&w, &f), &e), &r) in grid.offsets().iter().zip(&mc.total).zip(band).zip(&reference.total) {
                    csv.numbers([w, f, e, r]);
                }
                csv.write(&csv_path)?;

                let n = grid.len() as f64;
                let deviation = mc.total.iter().zip(&reference.total).map(|(a, b)| (a - b).abs()).sum::<f64>() / n;
                let mean_band = band.iter().sum::<f64>() / n;
                let pass = deviation <= o.sigmas * mean_band;
                #[derive(Serialize)]
                struct Summary<'a> {
                    config: Echo<'a>,
                    seed: u64,
                    n_trajectories: usize,
                    tau_step: f64,
                    tau_points: usize,
                    mean_abs_deviation: f64,
                    mean_error_band: f64,
                    sigmas: f64,
                    pass: bool,
                    warnings: Vec<String>,
                }
                write_json(
                    &summary_path,
                    &Summary {
                        config: self.echo(),
                        seed,
                        n_trajectories: o.n_trajectories,
                        tau_step: tau.step,
                        tau_points: tau.points,
                        mean_abs_deviation: deviation,
                        mean_error_band: mean_band,
                        sigmas: o.sigmas,
                        pass,
                        warnings: acf.warnings,
                    },
                )?;
                if !pass {
                    return Err(CliError::OracleFailure(format!(
                        "mean deviation {deviation:e} exceeds {} x mean band {mean_band:e}",
                        o.sigmas
                    )));
                }
                Ok(RunOutput {
                    files: vec![csv_path, summary_path],
                })
            }
            OracleCheck::AveragedExponential => {
                let Noise::Markov { spec, .. } = &self.noise else {
                    return Err(CliError::Config("averaged-exponential checks need Markov noise".into()));
                };
                let [a, b, c, d] = o.intervals.expect("validated intervals");
                let iv = IntervalSet::new(a, b, c, d)?;
                let sign = match o.sign.expect("validated sign") {
                    SignConfig::Plus => Sign::Plus,
                    SignConfig::Minus => Sign::Minus,
                };
                let end = if d > a { d } else { a + 1.0 };
                let tcfg = TrajectoryConfig::new(seed, o.n_trajectories, a, end)?;
                let mc = mc_averaged_exponential(spec, &tcfg, &iv, sign)?;
                let exact = averaged_exponential(spec, &iv, sign)?;
                let deviation = (mc.mean - exact).norm();
                let pass = deviation <= o.sigmas * mc.std_error || deviation == 0.0;
                #[derive(Serialize)]
                struct Summary<'a> {
                    config: Echo<'a>,
                    seed: u64,
                    n_trajectories: usize,
                    intervals: [f64; 4],
                    monte_carlo: [f64; 2],
                    std_error: f64,
                    analytic: [f64; 2],
                    deviation: f64,
                    sigmas: f64,
                    pass: bool,
                }
                write_json(
                    &summary_path,
                    &Summary {
                        config: self.echo(),
                        seed,
                        n_trajectories: o.n_trajectories,
                        intervals: [a, b, c, d],
                        monte_carlo: [mc.mean.re, mc.mean.im],
                        std_error: mc.std_error,
                        analytic: [exact.re, exact.im],
                        deviation,
                        sigmas: o.sigmas,
                        pass,
                    },
                )?;
                if !pass {
                    return Err(CliError::OracleFailure(format!(
                        "|MC - analytic| = {deviation:e} exceeds {} standard errors ({:e})",
                        o.sigmas, mc.std_error
                    )));
                }
                Ok(RunOutput {
                    files: vec![summary_path],
                })
            }
        }
    }
}

/// `noise` with one parameter replaced.
pub fn apply(noise: &NoiseConfig, axis: Axis, value: f64) -> Result<NoiseConfig, CliError> {
    let mut n = noise.clone();
    let bad = || CliError::Config(format!("axis {axis} does not apply to this noise kind"));
    match (&mut n, axis) {
        (NoiseConfig::White { diffusion, .. }, Axis::Diffusion) => *diffusion = value,
        (NoiseConfig::White { mean_detuning, .. }, Axis::MeanDetuning) => *mean_detuning = value,
        (NoiseConfig::Telegraph { beta, .. }, Axis::Beta) => *beta = value,
        (NoiseConfig::Telegraph { asymmetry, .. }, Axis::Asymmetry) => *asymmetry = value,
        (NoiseConfig::Telegraph { mean_detuning, .. }, Axis::MeanDetuning) => *mean_detuning = value,
        (NoiseConfig::Telegraph { splitting, .. }, Axis::Splitting) => *splitting = value,
        (NoiseConfig::Telegraph { n_sources, .. }, Axis::NSources) => {
            if !(value >= 1.0 && value.fract() == 0.0) {
                return Err(CliError::Config(format!("n_sources must be a positive integer, got {value}")));
            }
            *n_sources = value as usize;
        }
        _ => return Err(bad()),
    }
    Ok(n)
}
