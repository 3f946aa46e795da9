use super::{Peak, PeakFamily, PeakReport, PhysicalParams};
use crate::error::{invalid, Result};
use crate::linalg::{eig, ComplexMatrix};
use crate::noise::{MarkovNoiseSpec, TelegraphSpec, WhiteNoiseSpec};
use num_complex::Complex64;

/// Eigenvalues closer than this fraction of the largest modulus are merged.
pub const CLUSTER_TOL: f64 = 1e-7;

/// Eigenvector conditioning beyond which a family is flagged as nearly
/// defective.
const ILL_CONDITIONED: f64 = 1e8;

/// Closed-form poles of the single telegraph spectrum, as offsets from the
/// laser: `ω₀ = iΓ`, `ω₁ = i(Γ + 2β)` and
/// `ω₂,₃ = −Δ̄ − i(γ/2 + β + Γ) ± (Δ₀/2) √(1 − 4β²/Δ₀² + 4iβx/Δ₀)`.
pub fn telegraph_poles(spec: &TelegraphSpec, p: &PhysicalParams) -> Result<PeakReport> {
    spec.validate()?;
    p.validate()?;
    if spec.n_sources != 1 {
        return Err(invalid("closed-form poles exist only for a single telegraph source"));
    }
    let (beta, x, d0) = (spec.beta, spec.asymmetry, spec.splitting);
    let g = p.instr_gamma;
    let root = Complex64::new(1.0 - 4.0 * beta * beta / (d0 * d0), 4.0 * beta * x / d0).sqrt() * (d0 / 2.0);
    let centre = Complex64::new(-spec.mean_detuning, -(p.gamma / 2.0 + beta + g));
    let poles = [
        Complex64::new(0.0, g),
        Complex64::new(0.0, g + 2.0 * beta),
        centre + root,
        centre - root,
    ];
    let mut report = PeakReport::default();
    let clusters = cluster(&poles);
    for (omega, count) in clusters {
        report.peaks.push(Peak {
            position: omega.re,
            hwhm: omega.im.abs(),
            family: PeakFamily::ClosedFormPole,
            source_eigenvalue: omega,
            multiplicity: count,
        });
        if count > 1 {
            report.warnings.push(format!("{count} poles coalesce at {omega}"));
        }
    }
    sort_peaks(&mut report.peaks);
    Ok(report)
}

/// Peak positions and widths read off the resolvent poles: the central
/// family from eigenvalues `λ` of `C` (position `−Im λ`, width `Γ − Re λ`)
/// and the side family from eigenvalues `b` of `B` (position `−Im b`, width
/// `Γ + γ/2 − Re b`).
pub fn peak_analysis(noise: &MarkovNoiseSpec, p: &PhysicalParams) -> Result<PeakReport> {
    p.validate()?;
    let mut report = PeakReport::default();
    let families = [
        (PeakFamily::Central, ComplexMatrix::from_real(noise.generator()), 0.0, "C"),
        (PeakFamily::Side, noise.b_matrix(), p.gamma / 2.0, "B"),
    ];
    for (family, matrix, extra_width, name) in families {
        let e = eig(&matrix)?;
        if e.condition_estimate > ILL_CONDITIONED {
            report.warnings.push(format!(
                "eigenvectors of {name} are ill-conditioned ({:.1e}); lineshapes near coalescing poles are not Lorentzian",
                e.condition_estimate
            ));
        }
        for (lambda, count) in cluster(&e.values) {
            if count > 1 {
                report.warnings.push(format!("{count} eigenvalues of {name} merged at {lambda:.6e}"));
            }
            report.peaks.push(Peak {
                position: -lambda.im,
                hwhm: (p.instr_gamma + extra_width - lambda.re).max(0.0),
                family,
                source_eigenvalue: lambda,
                multiplicity: count,
            });
        }
    }
    sort_peaks(&mut report.peaks);
    Ok(report)
}

/// Elastic line at zero and, for `D > 0`, the inelastic line at `−Δ̄`.
pub fn white_noise_peaks(wn: &WhiteNoiseSpec, p: &PhysicalParams) -> Result<PeakReport> {
    wn.validate()?;
    p.validate()?;
    let mut report = PeakReport::default();
    report.peaks.push(Peak {
        position: 0.0,
        hwhm: p.instr_gamma,
        family: PeakFamily::Central,
        source_eigenvalue: Complex64::new(0.0, 0.0),
        multiplicity: 1,
    });
    if wn.diffusion > 0.0 {
        report.peaks.push(Peak {
            position: -wn.mean_detuning,
            hwhm: (p.gamma + wn.diffusion) / 2.0 + p.instr_gamma,
            family: PeakFamily::Side,
            source_eigenvalue: Complex64::new(-wn.diffusion / 2.0, wn.mean_detuning),
            multiplicity: 1,
        });
    }
    Ok(report)
}

/// Single-linkage clustering within `CLUSTER_TOL · max|λ|`; returns cluster
/// means with their sizes.
fn cluster(values: &[Complex64]) -> Vec<(Complex64, usize)> {
    let scale = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let tol = CLUSTER_TOL * scale;
    let n = values.len();
    let mut label: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= tol {
                let (a, b) = (label[i], label[j]);
                if a != b {
                    label.iter_mut().filter(|l| **l == b).for_each(|l| *l = a);
                }
            }
        }
    }
    let mut out = Vec::new();
    for root in 0..n {
        let members: Vec<Complex64> = (0..n).filter(|&i| label[i] == root).map(|i| values[i]).collect();
        if !members.is_empty() {
            let mean = members.iter().sum::<Complex64>() / members.len() as f64;
            out.push((mean, members.len()));
        }
    }
    out
}

fn sort_peaks(peaks: &mut [Peak]) {
    let rank = |f: PeakFamily| match f {
        PeakFamily::Central => 0,
        PeakFamily::Side => 1,
        PeakFamily::ClosedFormPole => 2,
    };
    peaks.sort_by(|a, b| {
        rank(a.family)
            .cmp(&rank(b.family))
            .then(a.position.total_cmp(&b.position))
            .then(a.hwhm.total_cmp(&b.hwhm))
    });
}
