use super::{FrequencyGrid, IntensityReport, PhysicalParams, Spectrum};
use crate::error::Result;
use crate::linalg::{ComplexMatrix, Lu, ONE};
use crate::noise::{stationary_distribution, MarkovNoiseSpec};
use num_complex::Complex64;
use rayon::prelude::*;

/// Frequency-independent pieces of the resolvent formula.
struct Resolvent {
    c: ComplexMatrix,
    /// `B − γ/2`.
    b_half: ComplexMatrix,
    /// `(B* − γ/2)⁻¹ p`.
    v1: Vec<Complex64>,
    /// `2 (C − γ)⁻¹ Re[(B − γ/2)⁻¹ p]`.
    v2: Vec<Complex64>,
    ones: Vec<Complex64>,
}

/// `w = (B − γ/2)⁻¹ p`.
fn half_resolvent(noise: &MarkovNoiseSpec, p: &PhysicalParams) -> Result<Vec<Complex64>> {
    let pst = stationary_distribution(noise)?;
    let b_half = noise.b_matrix().shift(Complex64::new(-p.gamma / 2.0, 0.0));
    let pc: Vec<Complex64> = pst.probabilities().iter().map(|&x| Complex64::new(x, 0.0)).collect();
    Ok(Lu::factor(&b_half)?.solve(&pc))
}

impl Resolvent {
    fn new(noise: &MarkovNoiseSpec, p: &PhysicalParams) -> Result<Self> {
        let w = half_resolvent(noise, p)?;
        let c = ComplexMatrix::from_real(noise.generator());
        let b_half = noise.b_matrix().shift(Complex64::new(-p.gamma / 2.0, 0.0));
        let v1 = w.iter().map(|z| z.conj()).collect();
        let re_w: Vec<Complex64> = w.iter().map(|z| Complex64::new(z.re, 0.0)).collect();
        let c_gamma = c.shift(Complex64::new(-p.gamma, 0.0));
        let v2 = Lu::factor(&c_gamma)?.solve(&re_w).into_iter().map(|z| z * 2.0).collect();
        let ones = vec![ONE; noise.dim()];
        Ok(Self {
            c,
            b_half,
            v1,
            v2,
            ones,
        })
    }

    fn at(&self, z: Complex64, prefactor: f64) -> Result<f64> {
        let x = Lu::factor(&self.c.shift(z))?.solve(&self.v1);
        let u = Lu::factor(&self.b_half.shift(z))?.solve_transposed(&self.ones);
        let s: Complex64 = u.iter().zip(x.iter().zip(&self.v2)).map(|(ui, (xi, vi))| ui * (xi + vi)).sum();
        Ok(-prefactor * s.re)
    }
}

/// Resolvent form of the spectrum,
/// `F = −(Ω²/4) Re 1ᵀ (z + B − γ/2)⁻¹ [(z + C)⁻¹ (B* − γ/2)⁻¹ + 2 (C − γ)⁻¹ Re (B − γ/2)⁻¹] p`
/// with `z = iδω − Γ`.
///
/// Grid points are evaluated in parallel; each is self-contained, so the
/// result does not depend on the number of threads.
pub fn markov_spectrum(noise: &MarkovNoiseSpec, p: &PhysicalParams, grid: &FrequencyGrid) -> Result<Spectrum> {
    p.validate()?;
    p.require_broadening()?;
    let r = Resolvent::new(noise, p)?;
    let prefactor = p.rabi * p.rabi / 4.0;
    let total = grid
        .offsets()
        .par_iter()
        .map(|&w| r.at(Complex64::new(-p.instr_gamma, w), prefactor))
        .collect::<Result<Vec<f64>>>()?;
    Ok(Spectrum::total_only(grid.clone(), total))
}

/// `I_tot = −(I₀γ/2) Σ Re w` and `I_el = (I₀γ²/4) |Σ w|²` with
/// `w = (B − γ/2)⁻¹ p`.
pub fn markov_intensities(noise: &MarkovNoiseSpec, p: &PhysicalParams) -> Result<IntensityReport> {
    p.validate()?;
    let w = half_resolvent(noise, p)?;
    let i0 = p.i0();
    let sum: Complex64 = w.iter().sum();
    let total = -(i0 * p.gamma / 2.0) * w.iter().map(|z| z.re).sum::<f64>();
    let elastic = i0 * p.gamma * p.gamma / 4.0 * sum.norm_sqr();
    Ok(IntensityReport {
        i0,
        total,
        elastic,
        inelastic: total - elastic,
    })
}

fn lorentz_weight(delta: f64, gamma: f64) -> f64 {
    let h = gamma / 2.0;
    h * h / (delta * delta + h * h)
}

/// Frozen-noise mixture `I₀ Σ p_j (γ/2)² / (Δ_j² + (γ/2)²)`.
pub fn quasi_static_intensity(noise: &MarkovNoiseSpec, p: &PhysicalParams) -> Result<f64> {
    p.validate()?;
    let pst = stationary_distribution(noise)?;
    let mix: f64 = pst
        .probabilities()
        .iter()
        .zip(noise.levels())
        .map(|(pj, &d)| pj * lorentz_weight(d, p.gamma))
        .sum();
    Ok(p.i0() * mix)
}

/// Motional-narrowing limit: a single level at the stationary mean detuning.
pub fn fast_limit_intensity(noise: &MarkovNoiseSpec, p: &PhysicalParams) -> Result<f64> {
    p.validate()?;
    let pst = stationary_distribution(noise)?;
    Ok(p.i0() * lorentz_weight(pst.mean_of(noise.levels()), p.gamma))
}

#[cfg(test)]
mod tests {
    use super::super::white::{white_noise_intensities, white_noise_spectrum};
    use super::*;
    use crate::linalg::RealMatrix;
    use crate::noise::{build_single_telegraph, TelegraphSpec, WhiteNoiseSpec};

    fn params() -> PhysicalParams {
        PhysicalParams::new(0.02, 0.005, 0.01).unwrap()
    }

    fn telegraph(beta: f64, x: f64, dbar: f64) -> MarkovNoiseSpec {
        build_single_telegraph(&TelegraphSpec {
            beta,
            asymmetry: x,
            splitting: 1.0,
            mean_detuning: dbar,
            n_sources: 1,
        })
        .unwrap()
    }

    #[test]
    fn single_level_matches_noise_free_white_branch() {
        let p = params();
        let dbar = 0.013;
        let noise = MarkovNoiseSpec::new(vec![dbar], RealMatrix::zeros(1)).unwrap();
        let wn = WhiteNoiseSpec::new(0.0, dbar).unwrap();
        let grid = FrequencyGrid::uniform(-0.1, 0.1, 201).unwrap();
        let m = markov_spectrum(&noise, &p, &grid).unwrap();
        let w = white_noise_spectrum(&wn, &p, &grid).unwrap();
        for (a, b) in m.total.iter().zip(&w.total) {
            assert!((a - b).abs() <= 1e-12 * b.abs());
        }
        let mi = markov_intensities(&noise, &p).unwrap();
        let wi = white_noise_intensities(&wn, &p).unwrap();
        assert!((mi.total - wi.total).abs() <= 1e-12 * wi.total);
        assert!((mi.elastic - wi.elastic).abs() <= 1e-12 * wi.elastic);
    }

    #[test]
    fn slow_symmetric_telegraph_shows_a_triplet() {
        let p = params();
        let noise = telegraph(0.02, 0.0, 0.0);
        let grid = FrequencyGrid::uniform(-1.0, 1.0, 4001).unwrap();
        let s = markov_spectrum(&noise, &p, &grid).unwrap();
        let f = &s.total;
        let maxima: Vec<f64> = (1..f.len() - 1)
            .filter(|&i| f[i] > f[i - 1] && f[i] > f[i + 1])
            .map(|i| grid.offsets()[i])
            .collect();
        assert_eq!(maxima.len(), 3, "{maxima:?}");
        assert!(maxima[1].abs() < 1e-9);
        assert!((maxima[0] + 0.5).abs() < 0.02 && (maxima[2] - 0.5).abs() < 0.02);
    }

    #[test]
    fn fast_symmetric_telegraph_narrows_to_one_line() {
        let p = params();
        let noise = telegraph(20.0, 0.0, 0.0);
        let grid = FrequencyGrid::uniform(-1.0, 1.0, 2001).unwrap();
        let f = markov_spectrum(&noise, &p, &grid).unwrap().total;
        let maxima = (1..f.len() - 1).filter(|&i| f[i] > f[i - 1] && f[i] > f[i + 1]).count();
        assert_eq!(maxima, 1);
    }

    #[test]
    fn table_limits_for_symmetric_telegraph() {
        let p = params();
        let g2 = p.gamma * p.gamma;
        let slow = markov_intensities(&telegraph(1e-5, 0.0, 0.0), &p).unwrap();
        assert!((slow.total_ratio() / (g2 / (g2 + 1.0)) - 1.0).abs() < 1e-2);
        let fast = markov_intensities(&telegraph(1e5, 0.0, 0.0), &p).unwrap();
        assert!((fast.total_ratio() - 1.0).abs() < 1e-2);
        assert!((fast.elastic_ratio() - 1.0).abs() < 1e-2);
    }

    #[test]
    fn limits_match_extreme_switching_rates() {
        let p = params();
        for &(x, dbar) in &[(0.0, 0.0), (0.0, 0.5), (0.4, 0.5), (-0.7, 0.1)] {
            let slow = telegraph(1e-5, x, dbar);
            let qs = quasi_static_intensity(&slow, &p).unwrap();
            assert!((markov_intensities(&slow, &p).unwrap().total / qs - 1.0).abs() < 2e-3);
            let fast = telegraph(1e5, x, dbar);
            let fl = fast_limit_intensity(&fast, &p).unwrap();
            assert!((markov_intensities(&fast, &p).unwrap().total / fl - 1.0).abs() < 2e-3);
        }
    }

    #[test]
    fn quasi_static_closed_forms() {
        let p = params();
        let h2 = (p.gamma / 2.0).powi(2);
        let qs = quasi_static_intensity(&telegraph(0.3, 0.0, 0.5), &p).unwrap();
        assert!((qs / p.i0() - 0.5 * (1.0 + h2 / (1.0 + h2))).abs() < 1e-14);
        let absorbing = quasi_static_intensity(&telegraph(0.3, 1.0, 0.5), &p).unwrap();
        assert!((absorbing / p.i0() - 1.0).abs() < 1e-14);
        let fl = fast_limit_intensity(&telegraph(0.3, 0.0, 0.5), &p).unwrap();
        assert!((fl / p.i0() - p.gamma.powi(2) / (p.gamma.powi(2) + 1.0)).abs() < 1e-14);
    }

    #[test]
    fn fast_limit_peaks_at_weighted_mean() {
        let p = params();
        let at = |dbar: f64| fast_limit_intensity(&telegraph(1.0, 0.5, dbar), &p).unwrap();
        assert!(at(0.25) > at(0.2499) && at(0.25) > at(0.2501));
        assert!((at(0.25) / p.i0() - 1.0).abs() < 1e-14);
    }
}
