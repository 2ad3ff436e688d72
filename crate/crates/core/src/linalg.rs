//! Small dense complex matrices: determinants, characteristic polynomials, eigenvalues.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::C64;

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix { n, data: vec![C64::new(0.0, 0.0); n * n] }
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let n = rows.len();
        let mut m = CMatrix::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self) -> C64 {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = C64::new(1.0, 0.0);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i * n + col].norm().total_cmp(&a[j * n + col].norm()))
                .unwrap_or(col);
            if a[pivot * n + col].norm() == 0.0 {
                return C64::new(0.0, 0.0);
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(pivot * n + k, col * n + k);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for i in col + 1..n {
                let factor = a[i * n + col] / p;
                if factor.norm() == 0.0 {
                    continue;
                }
                for k in col..n {
                    let v = a[col * n + k];
                    a[i * n + k] -= factor * v;
                }
            }
        }
        det
    }

    /// Coefficients of `det(λI − A)`, highest degree first (monic).
    ///
    /// Faddeev–LeVerrier recursion; adequate for the small matrices used here.
    pub fn char_poly(&self) -> Vec<C64> {
        let n = self.n;
        let mut coeffs = vec![C64::new(0.0, 0.0); n + 1];
        coeffs[0] = C64::new(1.0, 0.0);
        let mut m = CMatrix::zeros(n);
        for k in 1..=n {
            // M_k = A·M_{k−1} + c_{k−1}·I
            let mut next = CMatrix::zeros(n);
            for i in 0..n {
                for j in 0..n {
                    let mut s = C64::new(0.0, 0.0);
                    for l in 0..n {
                        s += self[(i, l)] * m[(l, j)];
                    }
                    next[(i, j)] = s;
                }
                next[(i, i)] += coeffs[k - 1];
            }
            m = next;
            // c_k = −tr(A·M_k)/k
            let mut tr = C64::new(0.0, 0.0);
            for i in 0..n {
                for l in 0..n {
                    tr += self[(i, l)] * m[(l, i)];
                }
            }
            coeffs[k] = -tr / k as f64;
        }
        coeffs
    }

    /// Eigenvalues as the roots of the characteristic polynomial.
    pub fn eigenvalues(&self) -> Vec<C64> {
        poly_roots(&self.char_poly())
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

/// Horner evaluation of a polynomial given highest degree first.
pub fn poly_eval(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().fold(C64::new(0.0, 0.0), |acc, c| acc * z + c)
}

/// All complex roots of a polynomial (highest degree first, leading coefficient nonzero)
/// by Aberth–Ehrlich iteration, polished with Newton steps.
pub fn poly_roots(coeffs: &[C64]) -> Vec<C64> {
    let first = coeffs.iter().position(|c| c.norm() != 0.0).unwrap_or(coeffs.len());
    let p: Vec<C64> = coeffs[first..].iter().map(|c| c / coeffs[first]).collect();
    let deg = p.len().saturating_sub(1);
    if deg == 0 {
        return Vec::new();
    }
    let dp: Vec<C64> = p[..deg]
        .iter()
        .enumerate()
        .map(|(i, c)| c * (deg - i) as f64)
        .collect();
    // Cauchy bound for the initial circle.
    let bound = 1.0 + p[1..].iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let mut z: Vec<C64> = (0..deg)
        .map(|k| {
            let theta = 0.4 + core::f64::consts::TAU * k as f64 / deg as f64;
            C64::from_polar(0.5 * bound, theta)
        })
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..deg {
            let pv = poly_eval(&p, z[i]);
            let dv = poly_eval(&dp, z[i]);
            if pv.norm() == 0.0 {
                continue;
            }
            let ratio = pv / dv;
            let mut repulse = C64::new(0.0, 0.0);
            for j in 0..deg {
                if j != i {
                    repulse += (z[i] - z[j]).inv();
                }
            }
            let w = ratio / (C64::new(1.0, 0.0) - ratio * repulse);
            if w.is_finite() {
                z[i] -= w;
                moved = moved.max(w.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-16 {
            break;
        }
    }
    z
}

/// Largest modulus in a list of eigenvalues.
pub fn spectral_radius(eigs: &[C64]) -> f64 {
    eigs.iter().fold(0.0, |m, e| m.max(e.norm()))
}
