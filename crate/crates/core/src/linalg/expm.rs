//! Matrix exponential by scaling and squaring with diagonal Padé
//! approximants of degree 3, 5, 7, 9 or 13 (Higham 2005).

use super::{ComplexMatrix, Lu, RealMatrix};
use crate::error::{Error, Result};
use num_complex::Complex64;

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Largest 1-norm for which each degree is accurate to unit roundoff.
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA13: f64 = 5.371920351148152;

/// `exp(A t)` for a complex matrix.
pub fn expm(a: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    if !a.is_finite() || !t.is_finite() {
        return Err(Error::Numerics("non-finite input to expm".into()));
    }
    let n = a.dim();
    if n == 0 {
        return Ok(a.clone());
    }
    let at = a.scale(Complex64::new(t, 0.0));
    if n == 1 {
        let e = at[(0, 0)].exp();
        return finite(ComplexMatrix::from_diag(&[e]));
    }
    let norm = at.norm_1();
    for &(m, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            return finite(pade_low(&at, coeffs)?);
        }
    }
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    if squarings > 1000 {
        return Err(Error::Numerics(format!("expm: norm {norm:e} too large")));
    }
    let scaled = at.scale(Complex64::new(2f64.powi(-squarings), 0.0));
    let mut r = pade13(&scaled)?;
    for _ in 0..squarings {
        r = r.matmul(&r);
    }
    finite(r)
}

/// `exp(A t)` for a real matrix; the imaginary part of the complex result is
/// discarded (it is zero to rounding).
pub fn expm_real(a: &RealMatrix, t: f64) -> Result<RealMatrix> {
    Ok(expm(&ComplexMatrix::from_real(a), t)?.re())
}

fn finite(m: ComplexMatrix) -> Result<ComplexMatrix> {
    if m.is_finite() {
        Ok(m)
    } else {
        Err(Error::Numerics("overflow in matrix exponential".into()))
    }
}

fn axpy(acc: &mut ComplexMatrix, s: f64, m: &ComplexMatrix) {
    let n = acc.dim();
    for i in 0..n {
        for j in 0..n {
            acc[(i, j)] += m[(i, j)] * s;
        }
    }
}

/// Solves `(V - U) X = (V + U)` column by column.
fn pade_quotient(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = u.dim();
    let lu = Lu::factor(&v.sub(u)).map_err(|_| Error::Numerics("singular Padé denominator".into()))?;
    let num = v.add(u);
    let mut out = ComplexMatrix::zeros(n);
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = num[(i, j)];
        }
        for (i, x) in lu.solve(&col).into_iter().enumerate() {
            out[(i, j)] = x;
        }
    }
    Ok(out)
}

fn pade_low(a: &ComplexMatrix, b: &[f64]) -> Result<ComplexMatrix> {
    let n = a.dim();
    let ident = ComplexMatrix::identity(n);
    let a2 = a.matmul(a);
    // Even powers A^0, A^2, A^4, ...
    let mut powers = vec![ident, a2.clone()];
    while powers.len() < b.len().div_ceil(2) {
        let next = powers.last().unwrap().matmul(&a2);
        powers.push(next);
    }
    let mut odd = ComplexMatrix::zeros(n);
    let mut even = ComplexMatrix::zeros(n);
    for (k, p) in powers.iter().enumerate() {
        if 2 * k + 1 < b.len() {
            axpy(&mut odd, b[2 * k + 1], p);
        }
        axpy(&mut even, b[2 * k], p);
    }
    let u = a.matmul(&odd);
    pade_quotient(&u, &even)
}

fn pade13(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.dim();
    let b = &PADE13;
    let ident = ComplexMatrix::identity(n);
    let a2 = a.matmul(a);
    let a4 = a2.matmul(&a2);
    let a6 = a2.matmul(&a4);

    let mut w1 = ComplexMatrix::zeros(n);
    axpy(&mut w1, b[13], &a6);
    axpy(&mut w1, b[11], &a4);
    axpy(&mut w1, b[9], &a2);
    let mut w = a6.matmul(&w1);
    axpy(&mut w, b[7], &a6);
    axpy(&mut w, b[5], &a4);
    axpy(&mut w, b[3], &a2);
    axpy(&mut w, b[1], &ident);
    let u = a.matmul(&w);

    let mut z1 = ComplexMatrix::zeros(n);
    axpy(&mut z1, b[12], &a6);
    axpy(&mut z1, b[10], &a4);
    axpy(&mut z1, b[8], &a2);
    let mut v = a6.matmul(&z1);
    axpy(&mut v, b[6], &a6);
    axpy(&mut v, b[4], &a4);
    axpy(&mut v, b[2], &a2);
    axpy(&mut v, b[0], &ident);
    pade_quotient(&u, &v)
}
