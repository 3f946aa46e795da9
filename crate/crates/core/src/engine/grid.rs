use super::{FrequencyGrid, PeakReport};
use crate::error::{invalid, Result};

/// Share of grid points spread uniformly over the window; the rest follow
/// the peaks.
const UNIFORM_SHARE: f64 = 0.2;

/// Window half-width in units of the widest reported line.
pub const WINDOW_WIDTHS: f64 = 10.0;

/// Symmetric window covering every peak position ± `WINDOW_WIDTHS` times the
/// largest half width.
///
/// Points are placed by inverting a mixture distribution: a uniform share plus
/// truncated Lorentzians on the distinct lines. Lines are grouped by octave of
/// half width relative to the narrowest one; every octave gets the same
/// weight, split evenly among its lines, so a few narrow lines are not
/// starved by a crowd of broad ones.
pub fn default_grid(peaks: &PeakReport, points: usize) -> Result<FrequencyGrid> {
    peak_grid(peaks, points, WINDOW_WIDTHS)
}

/// As [`default_grid`] with a window of `widths` times the largest half width.
pub fn peak_grid(peaks: &PeakReport, points: usize, widths: f64) -> Result<FrequencyGrid> {
    if !(widths > 0.0 && widths.is_finite()) {
        return Err(invalid(format!("window width must be finite and > 0, got {widths}")));
    }
    if points < 2 {
        return Err(invalid("grid needs at least 2 points"));
    }
    let mut lines: Vec<(f64, f64)> = Vec::new();
    for p in &peaks.peaks {
        if p.hwhm > 0.0 && !lines.iter().any(|&(x, w)| same(x, p.position) && same(w, p.hwhm)) {
            lines.push((p.position, p.hwhm));
        }
    }
    if lines.is_empty() {
        return Err(invalid("no peak with positive width to size the grid"));
    }
    let reach = lines.iter().map(|l| l.0.abs()).fold(0.0, f64::max);
    let widest = lines.iter().map(|l| l.1).fold(0.0, f64::max);
    let half = reach + widths * widest;
    let (a, b) = (-half, half);

    // Per-line arctan bounds, so each truncated Lorentzian CDF is normalized.
    let bounds: Vec<(f64, f64)> = lines
        .iter()
        .map(|&(x0, w)| (((a - x0) / w).atan(), ((b - x0) / w).atan()))
        .collect();
    let narrowest = lines.iter().map(|l| l.1).fold(f64::INFINITY, f64::min);
    let octave = |w: f64| (w / narrowest).log2().floor() as i64;
    let mut octaves: Vec<i64> = lines.iter().map(|l| octave(l.1)).collect();
    octaves.sort_unstable();
    octaves.dedup();
    let weights: Vec<f64> = lines
        .iter()
        .map(|l| {
            let o = octave(l.1);
            let members = lines.iter().filter(|m| octave(m.1) == o).count();
            1.0 / (octaves.len() * members) as f64
        })
        .collect();
    let cdf = |x: f64| {
        let mut peaked = 0.0;
        for ((&(x0, w), &(lo, hi)), wt) in lines.iter().zip(&bounds).zip(&weights) {
            peaked += wt * (((x - x0) / w).atan() - lo) / (hi - lo);
        }
        UNIFORM_SHARE * (x - a) / (b - a) + (1.0 - UNIFORM_SHARE) * peaked
    };

    let mut offsets = Vec::with_capacity(points);
    offsets.push(a);
    let mut lo = a;
    for i in 1..points - 1 {
        let target = i as f64 / (points - 1) as f64;
        let (mut l, mut h) = (lo, b);
        for _ in 0..200 {
            let m = 0.5 * (l + h);
            if m <= l || m >= h {
                break;
            }
            if cdf(m) < target {
                l = m;
            } else {
                h = m;
            }
        }
        let x = 0.5 * (l + h);
        offsets.push(x);
        lo = x;
    }
    offsets.push(b);
    offsets.dedup_by(|x, y| *x <= *y);
    FrequencyGrid::new(offsets)
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
