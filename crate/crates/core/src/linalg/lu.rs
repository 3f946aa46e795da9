use super::{ComplexMatrix, RealMatrix, ONE, ZERO};
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Condition estimates above this are treated as numerically singular.
pub const MAX_CONDITION: f64 = 1e14;

/// LU factorization `P A = L U` with partial pivoting, packed in place.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: ComplexMatrix,
    perm: Vec<usize>,
}

impl Lu {
    /// Fails with [`Error::SingularMatrix`] when a pivot vanishes relative to
    /// the matrix scale.
    pub fn factor(a: &ComplexMatrix) -> Result<Self> {
        let n = a.dim();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let tiny = a.norm_max() * f64::EPSILON * n as f64 * 1e-3;

        for col in 0..n {
            let mut piv = col;
            let mut best = lu[(col, col)].norm();
            for row in col + 1..n {
                let v = lu[(row, col)].norm();
                if v > best {
                    best = v;
                    piv = row;
                }
            }
            if best <= tiny || best == 0.0 {
                return Err(Error::SingularMatrix {
                    condition: f64::INFINITY,
                });
            }
            if piv != col {
                perm.swap(piv, col);
                for j in 0..n {
                    let tmp = lu[(col, j)];
                    lu[(col, j)] = lu[(piv, j)];
                    lu[(piv, j)] = tmp;
                }
            }
            let inv_p = lu[(col, col)].inv();
            for row in col + 1..n {
                let factor = lu[(row, col)] * inv_p;
                if factor == ZERO {
                    continue;
                }
                lu[(row, col)] = factor;
                for j in col + 1..n {
                    let u = lu[(col, j)];
                    lu[(row, j)] -= factor * u;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.lu.dim()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let mut s = x[i];
            for j in 0..i {
                s -= row[j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let mut s = x[i];
            for j in i + 1..n {
                s -= row[j] * x[j];
            }
            x[i] = s / row[i];
        }
        x
    }

    /// Solves `A^T x = b` (plain transpose, no conjugation).
    pub fn solve_transposed(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        // A^T = U^T L^T P, so solve U^T y = b, L^T z = y, x = P^T z.
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= self.lu[(j, i)] * y[j];
            }
            y[i] = s / self.lu[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.lu[(j, i)] * y[j];
            }
            y[i] = s;
        }
        let mut x = vec![ZERO; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }

    pub fn inverse(&self) -> ComplexMatrix {
        let n = self.dim();
        let mut inv = ComplexMatrix::zeros(n);
        let mut e = vec![ZERO; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = ZERO);
            e[j] = ONE;
            let col = self.solve(&e);
            for (i, v) in col.into_iter().enumerate() {
                inv[(i, j)] = v;
            }
        }
        inv
    }
}

/// An inverse together with its 1-norm condition number `‖A‖₁‖A⁻¹‖₁`.
#[derive(Debug, Clone)]
pub struct Inverse {
    pub matrix: ComplexMatrix,
    pub condition: f64,
}

/// Inverts `a`, rejecting it as singular when pivoting breaks down or the
/// condition estimate exceeds [`MAX_CONDITION`].
pub fn invert(a: &ComplexMatrix) -> Result<Inverse> {
    let matrix = Lu::factor(a)?.inverse();
    let condition = a.norm_1() * matrix.norm_1();
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(Error::SingularMatrix { condition });
    }
    Ok(Inverse { matrix, condition })
}

/// Solves the real system `A x = b` by Gaussian elimination with partial
/// pivoting. `rel_tol` sets the pivot threshold relative to `max|A|`.
pub fn solve_real(a: &RealMatrix, b: &[f64], rel_tol: f64) -> Result<Vec<f64>> {
    let n = a.dim();
    assert_eq!(b.len(), n);
    let mut m = a.clone();
    let mut x = b.to_vec();
    let tiny = a.norm_max() * rel_tol;
    for col in 0..n {
        let (piv, best) = (col..n)
            .map(|r| (r, m[(r, col)].abs()))
            .fold((col, -1.0), |acc, c| if c.1 > acc.1 { c } else { acc });
        if best <= tiny {
            return Err(Error::SingularMatrix {
                condition: f64::INFINITY,
            });
        }
        if piv != col {
            for j in 0..n {
                let tmp = m[(col, j)];
                m[(col, j)] = m[(piv, j)];
                m[(piv, j)] = tmp;
            }
            x.swap(col, piv);
        }
        for row in col + 1..n {
            let f = m[(row, col)] / m[(col, col)];
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                let u = m[(col, j)];
                m[(row, j)] -= f * u;
            }
            let xc = x[col];
            x[row] -= f * xc;
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in i + 1..n {
            s -= m[(i, j)] * x[j];
        }
        x[i] = s / m[(i, i)];
    }
    Ok(x)
}
