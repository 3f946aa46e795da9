use super::{IntensityReport, PhysicalParams, Spectrum};
use super::FrequencyGrid;
use crate::error::Result;
use crate::noise::WhiteNoiseSpec;

/// Elastic line at `δω = 0` plus an inelastic Lorentzian at `δω = −Δ̄` of
/// half width `(γ + D)/2 + Γ`.
pub fn white_noise_spectrum(wn: &WhiteNoiseSpec, p: &PhysicalParams, grid: &FrequencyGrid) -> Result<Spectrum> {
    wn.validate()?;
    p.validate()?;
    p.require_broadening()?;
    let (g, d, dbar, big_g) = (p.gamma, wn.diffusion, wn.mean_detuning, p.instr_gamma);
    let prefactor = p.rabi * p.rabi / ((g + d).powi(2) + 4.0 * dbar * dbar);
    let width = (g + d) / 2.0 + big_g;

    let mut elastic = Vec::with_capacity(grid.len());
    let mut inelastic = Vec::with_capacity(grid.len());
    for &w in grid.offsets() {
        elastic.push(prefactor * big_g / (w * w + big_g * big_g));
        let s = w + dbar;
        inelastic.push(prefactor * (d / g) * width / (s * s + width * width));
    }
    let total = elastic.iter().zip(&inelastic).map(|(a, b)| a + b).collect();
    Ok(Spectrum {
        grid: grid.clone(),
        total,
        elastic: Some(elastic),
        inelastic: Some(inelastic),
        mc_error: None,
    })
}

pub fn white_noise_intensities(wn: &WhiteNoiseSpec, p: &PhysicalParams) -> Result<IntensityReport> {
    wn.validate()?;
    p.validate()?;
    let i0 = p.i0();
    let r = wn.diffusion / p.gamma;
    let a = 2.0 * wn.mean_detuning / p.gamma;
    let denom = (1.0 + r).powi(2) + a * a;
    let elastic = i0 / denom;
    Ok(IntensityReport {
        i0,
        total: i0 * (1.0 + r) / denom,
        elastic,
        inelastic: r * elastic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> PhysicalParams {
        PhysicalParams::new(1.0, 0.25, 0.1).unwrap()
    }

    #[test]
    fn noise_free_limit_is_purely_elastic() {
        let wn = WhiteNoiseSpec::new(0.0, 0.3).unwrap();
        let grid = FrequencyGrid::uniform(-5.0, 5.0, 101).unwrap();
        let s = white_noise_spectrum(&wn, &params(), &grid).unwrap();
        assert!(s.inelastic.unwrap().iter().all(|&v| v == 0.0));
        let r = white_noise_intensities(&wn, &params()).unwrap();
        assert_eq!(r.inelastic, 0.0);
        assert!((r.total - r.elastic).abs() < 1e-15);
    }

    #[test]
    fn resonant_diffusion_equal_to_gamma() {
        let wn = WhiteNoiseSpec::new(1.0, 0.0).unwrap();
        let p = params();
        let r = white_noise_intensities(&wn, &p).unwrap();
        assert!((r.total_ratio() - 0.5).abs() < 1e-15);
        assert!((r.elastic_ratio() - 0.25).abs() < 1e-15);
        assert!((r.inelastic_ratio() - 0.25).abs() < 1e-15);

        // Inelastic half width is γ + Γ; peak value A (D/γ) / (γ + Γ).
        let grid = FrequencyGrid::new(vec![0.0, 1.25]).unwrap();
        let s = white_noise_spectrum(&wn, &p, &grid).unwrap();
        let inel = s.inelastic.unwrap();
        let a = p.rabi * p.rabi / 4.0;
        assert!((inel[0] - a / 1.25).abs() < 1e-15);
        assert!((inel[1] - inel[0] / 2.0).abs() < 1e-15);
    }

    #[test]
    fn inelastic_line_sits_at_minus_mean_detuning() {
        let wn = WhiteNoiseSpec::new(2.0, 5.0).unwrap();
        let grid = FrequencyGrid::uniform(-10.0, 10.0, 2001).unwrap();
        let s = white_noise_spectrum(&wn, &params(), &grid).unwrap();
        let inel = s.inelastic.unwrap();
        let imax = (0..inel.len()).max_by(|&a, &b| inel[a].total_cmp(&inel[b])).unwrap();
        assert!((grid.offsets()[imax] + 5.0).abs() < 1e-9);
    }

    #[test]
    fn zero_broadening_is_rejected_on_grid() {
        let wn = WhiteNoiseSpec::new(1.0, 0.0).unwrap();
        let p = PhysicalParams::new(1.0, 0.0, 0.1).unwrap();
        let grid = FrequencyGrid::uniform(-1.0, 1.0, 3).unwrap();
        assert!(white_noise_spectrum(&wn, &p, &grid).is_err());
        assert!(white_noise_intensities(&wn, &p).is_ok());
    }

    #[test]
    fn optimal_diffusion_for_detuned_drive() {
        let p = params();
        let dbar = 5.0;
        let at = |d: f64| white_noise_intensities(&WhiteNoiseSpec::new(d, dbar).unwrap(), &p).unwrap().total;
        let best = 2.0 * dbar - p.gamma;
        assert!(at(best) > at(best - 1e-3) && at(best) > at(best + 1e-3));
        assert!((at(best) / at(0.0) - 5.05).abs() < 1e-12);
    }
}
