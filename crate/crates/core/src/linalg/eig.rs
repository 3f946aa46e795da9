//! General complex eigen-decomposition.
//!
//! Pipeline: diagonal balancing, Householder reduction to upper Hessenberg
//! form, single-shift complex QR iteration (Wilkinson shifts, exceptional
//! shifts every tenth sweep) to Schur form `A = Z T Z^H`, then eigenvectors
//! of the triangular factor by back substitution.
//!
//! 2x2 blocks are split directly with the quadratic formula. This keeps
//! exactly coalescing eigenvalue pairs (exceptional points) coalesced instead
//! of smearing them over `sqrt(eps)` the way plain QR iteration on a
//! defective block would.

use super::{invert, ComplexMatrix, ONE, ZERO};
use crate::error::{Error, Result};
use num_complex::Complex64;

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

#[derive(Debug, Clone)]
pub struct EigenResult {
    /// Eigenvalues, in no particular order.
    pub values: Vec<Complex64>,
    /// Right eigenvectors as unit-norm columns, matching `values`.
    pub vectors: ComplexMatrix,
    /// `‖V‖₁‖V⁻¹‖₁`; infinite when the eigenvector matrix is numerically singular.
    pub condition_estimate: f64,
    /// `max_j ‖A v_j − λ_j v_j‖₂ / ‖A‖_F`.
    pub residual: f64,
}

pub fn eig(a: &ComplexMatrix) -> Result<EigenResult> {
    let n = a.dim();
    if !a.is_finite() {
        return Err(Error::Numerics("non-finite matrix passed to eig".into()));
    }
    if n == 0 {
        return Ok(EigenResult {
            values: vec![],
            vectors: ComplexMatrix::zeros(0),
            condition_estimate: 1.0,
            residual: 0.0,
        });
    }

    let mut h = a.clone();
    let scaling = balance(&mut h);
    let mut z = hessenberg(&mut h);
    schur(&mut h, &mut z)?;
    let x = triangular_eigenvectors(&h);

    let mut v = z.matmul(&x);
    for i in 0..n {
        for j in 0..n {
            v[(i, j)] *= scaling[i];
        }
    }
    for j in 0..n {
        let norm = (0..n).map(|i| v[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            for i in 0..n {
                v[(i, j)] /= norm;
            }
        }
    }

    let values: Vec<Complex64> = (0..n).map(|i| h[(i, i)]).collect();
    let a_norm = a.norm_fro();
    let residual = if a_norm == 0.0 {
        0.0
    } else {
        (0..n)
            .map(|j| {
                let col: Vec<Complex64> = (0..n).map(|i| v[(i, j)]).collect();
                let av = a.matvec(&col);
                av.iter()
                    .zip(&col)
                    .map(|(p, q)| (p - values[j] * q).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
                    / a_norm
            })
            .fold(0.0, f64::max)
    };
    let condition_estimate = invert(&v).map(|inv| inv.condition).unwrap_or(f64::INFINITY);

    Ok(EigenResult {
        values,
        vectors: v,
        condition_estimate,
        residual,
    })
}

#[inline]
fn abs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Diagonal similarity `D⁻¹ H D` with power-of-two entries that equalizes
/// row and column norms. Returns the diagonal of `D`.
fn balance(h: &mut ComplexMatrix) -> Vec<f64> {
    const RADIX: f64 = 2.0;
    let n = h.dim();
    let mut d = vec![1.0; n];
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += abs1(h[(j, i)]);
                    r += abs1(h[(i, j)]);
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                d[i] *= f;
                for j in 0..n {
                    h[(i, j)] /= f;
                    h[(j, i)] *= f;
                }
            }
        }
        if done {
            return d;
        }
    }
}

/// Reduces `h` to upper Hessenberg form in place; returns the accumulated
/// unitary transform.
fn hessenberg(h: &mut ComplexMatrix) -> ComplexMatrix {
    let n = h.dim();
    let mut q = ComplexMatrix::identity(n);
    if n < 3 {
        return q;
    }
    for k in 0..n - 2 {
        let len = n - k - 1;
        let x: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let tail = x[1..].iter().map(|z| z.norm_sqr()).sum::<f64>();
        if xnorm == 0.0 || tail == 0.0 {
            continue;
        }
        let phase = if x[0] == ZERO { ONE } else { x[0] / x[0].norm() };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= vnorm);

        // Left: H ← (I − 2 v vᴴ) H on rows k+1..n.
        for j in k..n {
            let mut s = ZERO;
            for t in 0..len {
                s += v[t].conj() * h[(k + 1 + t, j)];
            }
            s *= 2.0;
            for t in 0..len {
                h[(k + 1 + t, j)] -= v[t] * s;
            }
        }
        // Right: H ← H (I − 2 v vᴴ), and the same for Q.
        for m in [&mut *h, &mut q] {
            for i in 0..n {
                let mut s = ZERO;
                for t in 0..len {
                    s += m[(i, k + 1 + t)] * v[t];
                }
                s *= 2.0;
                for t in 0..len {
                    m[(i, k + 1 + t)] -= s * v[t].conj();
                }
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    q
}

/// Plane rotation `G = [[c, s], [−s̄, c]]` with `G (a, b)ᵀ = (r, 0)ᵀ`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    if b == ZERO {
        return (1.0, ZERO);
    }
    if a == ZERO {
        return (0.0, ONE);
    }
    let an = a.norm();
    let nrm = an.hypot(b.norm());
    (an / nrm, (a / an) * b.conj() / nrm)
}

/// `H ← G H Gᴴ` in the plane (k, k+1), restricted to the columns
/// `col_start..` and rows `..=row_end`, with `Z ← Z Gᴴ`.
fn rotate(
    h: &mut ComplexMatrix,
    z: &mut ComplexMatrix,
    k: usize,
    (c, s): (f64, Complex64),
    col_start: usize,
    row_end: usize,
) {
    let n = h.dim();
    for j in col_start..n {
        let p = h[(k, j)];
        let q = h[(k + 1, j)];
        h[(k, j)] = p * c + s * q;
        h[(k + 1, j)] = -s.conj() * p + q * c;
    }
    for i in 0..=row_end {
        let p = h[(i, k)];
        let q = h[(i, k + 1)];
        h[(i, k)] = p * c + q * s.conj();
        h[(i, k + 1)] = -p * s + q * c;
    }
    for i in 0..n {
        let p = z[(i, k)];
        let q = z[(i, k + 1)];
        z[(i, k)] = p * c + q * s.conj();
        z[(i, k + 1)] = -p * s + q * c;
    }
}

/// Eigenvalues of `[[a, b], [c, d]]`, the first one computed as `d + p + disc`
/// with the sign of `disc` chosen so that `|p + disc|` is maximal.
fn eig2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64, Complex64) {
    let p = (a - d) * 0.5;
    let mut disc = (p * p + b * c).sqrt();
    if (p.conj() * disc).re < 0.0 {
        disc = -disc;
    }
    let m = (a + d) * 0.5;
    (m + disc, m - disc, p + disc)
}

fn schur(h: &mut ComplexMatrix, z: &mut ComplexMatrix) -> Result<()> {
    let n = h.dim();
    if n < 2 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let max_total = MAX_SWEEPS_PER_EIGENVALUE * n;
    let h_scale = h.norm_max().max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;

    loop {
        let mut l = hi;
        while l > 0 {
            let mut s = abs1(h[(l - 1, l - 1)]) + abs1(h[(l, l)]);
            if s == 0.0 {
                s = h_scale;
            }
            if abs1(h[(l, l - 1)]) <= eps * s {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }

        if l == hi {
            if hi == 0 {
                return Ok(());
            }
            hi -= 1;
            iter = 0;
            continue;
        }

        if l + 1 == hi {
            split_2x2(h, z, l);
            if hi < 2 {
                return Ok(());
            }
            hi -= 2;
            iter = 0;
            continue;
        }

        iter += 1;
        total += 1;
        if total > max_total {
            return Err(Error::NoConvergence { iterations: total });
        }

        let shift = if iter % 10 == 0 {
            h[(hi, hi)] + abs1(h[(hi, hi - 1)]) * 0.75
        } else {
            let (e1, e2, _) = eig2(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)]);
            if (e1 - h[(hi, hi)]).norm() <= (e2 - h[(hi, hi)]).norm() {
                e1
            } else {
                e2
            }
        };

        let mut x = h[(l, l)] - shift;
        let mut y = h[(l + 1, l)];
        for k in l..hi {
            let g = givens(x, y);
            let col_start = if k > l { k - 1 } else { l };
            rotate(h, z, k, g, col_start, (k + 2).min(hi));
            if k > l {
                h[(k + 1, k - 1)] = ZERO;
            }
            if k + 1 < hi {
                x = h[(k + 1, k)];
                y = h[(k + 2, k)];
            }
        }
    }
}

/// Triangularizes the 2x2 diagonal block at (l, l+1).
fn split_2x2(h: &mut ComplexMatrix, z: &mut ComplexMatrix, l: usize) {
    let (a, b, c, d) = (h[(l, l)], h[(l, l + 1)], h[(l + 1, l)], h[(l + 1, l + 1)]);
    if c == ZERO {
        return;
    }
    let (lambda, mu, p_plus_disc) = eig2(a, b, c, d);
    // Eigenvector for `lambda` is (lambda − d, c) = (p + disc, c).
    let g = givens(p_plus_disc, c);
    rotate(h, z, l, g, l, l + 1);
    h[(l + 1, l)] = ZERO;
    // Pin the diagonal to the directly computed pair.
    h[(l, l)] = lambda;
    h[(l + 1, l + 1)] = mu;
}

fn triangular_eigenvectors(t: &ComplexMatrix) -> ComplexMatrix {
    let n = t.dim();
    let small = (f64::EPSILON * t.norm_fro()).max(f64::MIN_POSITIVE);
    let mut x = ComplexMatrix::zeros(n);
    for i in 0..n {
        let lambda = t[(i, i)];
        x[(i, i)] = ONE;
        for j in (0..i).rev() {
            let mut s = ZERO;
            for m in j + 1..=i {
                s += t[(j, m)] * x[(m, i)];
            }
            let mut den = t[(j, j)] - lambda;
            if den.norm() < small {
                den = Complex64::new(small, 0.0);
            }
            x[(j, i)] = -s / den;
            if x[(j, i)].norm() > 1e150 {
                let k = 1.0 / x[(j, i)].norm();
                for m in j..=i {
                    x[(m, i)] *= k;
                }
            }
        }
    }
    x
}
