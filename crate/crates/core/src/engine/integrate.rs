use super::{PeakReport, Spectrum};
use crate::error::{Error, Result};
use serde::Serialize;
use std::f64::consts::FRAC_PI_2;

/// Largest tail correction accepted, as a fraction of the integral.
const MAX_TAIL_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralEstimate {
    pub value: f64,
    pub error_bound: f64,
    /// Part of `value` contributed by the analytic tails beyond the grid.
    pub tail: f64,
}

/// Trapezoidal integral of `s.total` plus Lorentzian tails beyond both grid
/// edges.
///
/// The error bound adds a half-step quadrature estimate to the uncertainty of
/// the two tails.
pub fn integrate_spectrum(s: &Spectrum, peaks: &PeakReport) -> Result<IntegralEstimate> {
    let x = s.grid.offsets();
    let f = &s.total;
    let n = x.len();

    let fine = trapezoid(x.iter().copied().zip(f.iter().copied()));
    let coarse_idx = (0..n).step_by(2).chain(if n % 2 == 0 { Some(n - 1) } else { None });
    let coarse = trapezoid(coarse_idx.map(|i| (x[i], f[i])));
    let quadrature_error = (fine - coarse).abs() / 3.0;

    let mut tail = 0.0;
    let mut tail_error = 0.0;
    for (edge, inner, outward) in [(0, 1, -1.0), (n - 1, n - 2, 1.0)] {
        let (t, e) = edge_tail(outward * x[edge], f[edge], outward * x[inner], f[inner], outward, peaks);
        tail += t;
        tail_error += e;
    }

    let value = fine + tail;
    let fraction = if value != 0.0 { (tail / value).abs() } else { 0.0 };
    if fraction > MAX_TAIL_FRACTION {
        return Err(Error::GridTooNarrow { fraction });
    }
    Ok(IntegralEstimate {
        value,
        error_bound: quadrature_error + tail_error,
        tail,
    })
}

/// Tail beyond one edge and its error, in coordinates `u` that grow
/// outwards.
///
/// Far from every line the spectrum falls off as `K/(u − c)²`. The effective
/// centre `c` is fitted from the two outermost samples, giving the tail
/// `F(edge)·(u_edge − c)`; the neglected terms scale with the squared spread
/// of line centres and widths over `(u_edge − c)²`. If the fit is not usable
/// the tail falls back to the single-Lorentzian ratios of the reported lines.
fn edge_tail(u1: f64, f1: f64, u2: f64, f2: f64, outward: f64, peaks: &PeakReport) -> (f64, f64) {
    let lines = peaks.peaks.iter().filter(|p| p.hwhm > 0.0);
    if f1 > 0.0 && f2 > f1 {
        let r = (f2 / f1).sqrt();
        let c = (r * u2 - u1) / (r - 1.0);
        let d = u1 - c;
        if d > u1 - u2 {
            let spread = lines
                .map(|p| (outward * p.position - c).powi(2) + p.hwhm * p.hwhm)
                .fold(0.0, f64::max);
            let tail = f1 * d;
            return (tail, tail * (spread / (d * d)).min(1.0));
        }
    }
    let ratios: Vec<f64> = lines.map(|p| tail_ratio(u1 - outward * p.position, p.hwhm)).collect();
    if ratios.is_empty() {
        return (0.0, 0.0);
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    (f1 * 0.5 * (lo + hi), f1.abs() * 0.5 * (hi - lo))
}

/// `∫_d^∞ dt/(t² + w²)` divided by `1/(d² + w²)`.
fn tail_ratio(d: f64, w: f64) -> f64 {
    (d * d + w * w) / w * (FRAC_PI_2 - (d / w).atan())
}

fn trapezoid(points: impl Iterator<Item = (f64, f64)>) -> f64 {
    let mut sum = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for (x, y) in points {
        if let Some((px, py)) = prev {
            sum += 0.5 * (x - px) * (y + py);
        }
        prev = Some((x, y));
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::super::{default_grid, white_noise_intensities, white_noise_peaks, white_noise_spectrum};
    use super::super::{FrequencyGrid, Peak, PeakFamily, PhysicalParams};
    use super::*;
    use crate::noise::WhiteNoiseSpec;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn lorentzian_spectrum(grid: FrequencyGrid, amp: f64, w: f64) -> Spectrum {
        let total = grid.offsets().iter().map(|x| amp * w * w / (x * x + w * w)).collect();
        Spectrum::total_only(grid, total)
    }

    fn single_peak(w: f64) -> PeakReport {
        PeakReport {
            peaks: vec![Peak {
                position: 0.0,
                hwhm: w,
                family: PeakFamily::Central,
                source_eigenvalue: Complex64::new(0.0, 0.0),
                multiplicity: 1,
            }],
            warnings: vec![],
        }
    }

    #[test]
    fn lorentzian_area() {
        let w = 0.3;
        let grid = FrequencyGrid::uniform(-20.0 * w, 20.0 * w, 2001).unwrap();
        let est = integrate_spectrum(&lorentzian_spectrum(grid, 2.0, w), &single_peak(w)).unwrap();
        let exact = PI * w * 2.0;
        assert!((est.value / exact - 1.0).abs() < 1e-3);
        assert!((est.value - exact).abs() <= est.error_bound + 1e-9 * exact);
    }

    #[test]
    fn narrow_window_is_rejected() {
        let w = 1.0;
        let grid = FrequencyGrid::uniform(-2.0, 2.0, 201).unwrap();
        let err = integrate_spectrum(&lorentzian_spectrum(grid, 1.0, w), &single_peak(w)).unwrap_err();
        assert!(matches!(err, Error::GridTooNarrow { .. }));
    }

    #[test]
    fn white_noise_area_matches_total_intensity() {
        let p = PhysicalParams::new(1.0, 0.25, 0.1).unwrap();
        let wn = WhiteNoiseSpec::new(1.0, 0.0).unwrap();
        let peaks = white_noise_peaks(&wn, &p).unwrap();
        let grid = default_grid(&peaks, 4001).unwrap();
        let est = integrate_spectrum(&white_noise_spectrum(&wn, &p, &grid).unwrap(), &peaks).unwrap();
        let exact = white_noise_intensities(&wn, &p).unwrap().total;
        assert!((est.value / exact - 1.0).abs() < 5e-3);
    }
}
