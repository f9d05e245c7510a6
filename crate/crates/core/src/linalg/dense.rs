//! Dense square matrices for the conjugation lab and the oracle solver.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use super::tridiag::Tridiagonal;
use crate::error::{Error, Result};

/// Largest order accepted by the dense routines.
pub const DENSE_MAX_ORDER: usize = 2000;
/// Sweep cap for the cyclic rotation oracle.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Square real matrix, row-major, 0-based.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Builds from rows; panics if the rows do not form a square.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "rows must be square");
        Self {
            n,
            data: rows.concat(),
        }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn scaled(&self, f: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|x| x * f).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "order mismatch");
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                let b_row = &other.data[k * n..(k + 1) * n];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self * other - other * self`.
    pub fn commutator(&self, other: &Self) -> Self {
        &self.matmul(other) - &other.matmul(self)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Largest `|self[i][j] - self[j][i]|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Symmetrized copy `(M + M^T) / 2`.
    pub fn symmetric_part(&self) -> DenseSymmetricMatrix {
        let m = Self::from_fn(self.n, |i, j| 0.5 * (self[(i, j)] + self[(j, i)]));
        DenseSymmetricMatrix(m)
    }

    /// Determinant by partial-pivoting elimination.
    pub fn determinant(&self) -> f64 {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for k in 0..n {
            let piv = (k..n)
                .max_by(|&x, &y| a[x * n + k].abs().total_cmp(&a[y * n + k].abs()))
                .unwrap();
            if a[piv * n + k] == 0.0 {
                return 0.0;
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                det = -det;
            }
            let p = a[k * n + k];
            det *= p;
            for i in k + 1..n {
                let f = a[i * n + k] / p;
                if f != 0.0 {
                    for j in k..n {
                        a[i * n + j] -= f * a[k * n + j];
                    }
                }
            }
        }
        det
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

impl Add for &DenseMatrix {
    type Output = DenseMatrix;
    fn add(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n, rhs.n, "order mismatch");
        DenseMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &DenseMatrix {
    type Output = DenseMatrix;
    fn sub(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n, rhs.n, "order mismatch");
        DenseMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &DenseMatrix {
    type Output = DenseMatrix;
    fn mul(self, rhs: &DenseMatrix) -> DenseMatrix {
        self.matmul(rhs)
    }
}

/// A dense matrix checked to be symmetric within `1e-12 * max|entry|`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseSymmetricMatrix(DenseMatrix);

impl DenseSymmetricMatrix {
    pub fn new(m: DenseMatrix) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::precondition("DenseSymmetricMatrix", "non-finite entry"));
        }
        let tol = 1e-12 * m.max_abs();
        let asym = m.asymmetry();
        if asym > tol {
            return Err(Error::precondition(
                "DenseSymmetricMatrix",
                format!("asymmetry {asym:e} exceeds {tol:e}"),
            ));
        }
        Ok(Self(m))
    }

    pub fn as_matrix(&self) -> &DenseMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.0
    }

    pub fn order(&self) -> usize {
        self.0.n
    }

    /// Householder reduction to tridiagonal form (eigenvalues only).
    pub fn tridiagonalize(&self) -> Tridiagonal {
        let n = self.order();
        let mut a = self.0.clone();
        // mirror the lower triangle so tiny asymmetries do not leak in
        for i in 0..n {
            for j in 0..i {
                let v = 0.5 * (a[(i, j)] + a[(j, i)]);
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        let mut v = vec![0.0; n];
        let mut p = vec![0.0; n];
        for k in 0..n.saturating_sub(2) {
            let scale: f64 = (k + 1..n).map(|i| a[(i, k)].abs()).sum();
            if scale == 0.0 {
                continue;
            }
            let mut sigma = 0.0;
            for i in k + 1..n {
                v[i] = a[(i, k)] / scale;
                sigma += v[i] * v[i];
            }
            let alpha = -sigma.sqrt().copysign(v[k + 1]);
            // v = x - alpha e1, beta = 2 / |v|^2
            let h = sigma - v[k + 1] * alpha;
            v[k + 1] -= alpha;
            // p = A v / h
            for i in k + 1..n {
                let mut s = 0.0;
                for j in k + 1..n {
                    s += a[(i, j)] * v[j];
                }
                p[i] = s / h;
            }
            let kk: f64 = (k + 1..n).map(|i| v[i] * p[i]).sum::<f64>() / (2.0 * h);
            for i in k + 1..n {
                p[i] -= kk * v[i];
            }
            for i in k + 1..n {
                for j in k + 1..=i {
                    let upd = a[(i, j)] - v[i] * p[j] - p[i] * v[j];
                    a[(i, j)] = upd;
                    a[(j, i)] = upd;
                }
            }
            a[(k + 1, k)] = alpha * scale;
            a[(k, k + 1)] = alpha * scale;
            for i in k + 2..n {
                a[(i, k)] = 0.0;
                a[(k, i)] = 0.0;
            }
        }
        let diag = (0..n).map(|i| a[(i, i)]).collect();
        let off = (1..n).map(|i| a[(i, i - 1)]).collect();
        Tridiagonal::new(diag, off)
    }

    /// Eigenvalues by Householder tridiagonalization and shifted QL.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        if self.order() > DENSE_MAX_ORDER {
            return Err(Error::precondition(
                "dense eigenvalues",
                format!("order {} exceeds {DENSE_MAX_ORDER}", self.order()),
            ));
        }
        self.tridiagonalize().eigenvalues_ql()
    }

    /// Eigenvalues by the cyclic two-sided rotation method. Slow but shares no
    /// code with the banded or Householder paths.
    pub fn eigenvalues_jacobi(&self) -> Result<Vec<f64>> {
        let n = self.order();
        if n > DENSE_MAX_ORDER {
            return Err(Error::precondition(
                "eigenvalues_dense_oracle",
                format!("order {n} exceeds {DENSE_MAX_ORDER}"),
            ));
        }
        let mut a = self.0.clone();
        let target = 1e-14 * a.frobenius_norm();
        let off_mass = |a: &DenseMatrix| {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..i {
                    s += 2.0 * a[(i, j)] * a[(i, j)];
                }
            }
            s.sqrt()
        };
        for sweep in 0..JACOBI_MAX_SWEEPS {
            if off_mass(&a) <= target {
                let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
                ev.sort_by(f64::total_cmp);
                return Ok(ev);
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    if apq == 0.0 {
                        continue;
                    }
                    let app = a[(p, p)];
                    let aqq = a[(q, q)];
                    let g = 100.0 * apq.abs();
                    if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                        a[(p, q)] = 0.0;
                        a[(q, p)] = 0.0;
                        continue;
                    }
                    let theta = 0.5 * (aqq - app) / apq;
                    let t = 1.0_f64.copysign(theta) / (theta.abs() + theta.hypot(1.0));
                    let c = 1.0 / t.hypot(1.0);
                    let s = t * c;
                    let tau = s / (1.0 + c);
                    a[(p, p)] = app - t * apq;
                    a[(q, q)] = aqq + t * apq;
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    for r in 0..n {
                        if r == p || r == q {
                            continue;
                        }
                        let g = a[(r, p)];
                        let h = a[(r, q)];
                        let np = g - s * (h + g * tau);
                        let nq = h + s * (g - h * tau);
                        a[(r, p)] = np;
                        a[(p, r)] = np;
                        a[(r, q)] = nq;
                        a[(q, r)] = nq;
                    }
                }
            }
        }
        let mut partial: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
        partial.sort_by(f64::total_cmp);
        Err(Error::NoConvergence {
            op: "eigenvalues_dense_oracle",
            iterations: JACOBI_MAX_SWEEPS,
            partial,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(rows: &[Vec<f64>]) -> DenseSymmetricMatrix {
        DenseSymmetricMatrix::new(DenseMatrix::from_rows(rows)).unwrap()
    }

    #[test]
    fn rejects_asymmetric() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.1, 1.0]]);
        assert!(DenseSymmetricMatrix::new(m).is_err());
    }

    #[test]
    fn jacobi_small_cases() {
        assert_eq!(sym(&[vec![7.5]]).eigenvalues_jacobi().unwrap(), vec![7.5]);
        assert_eq!(
            DenseSymmetricMatrix::new(DenseMatrix::zeros(4))
                .unwrap()
                .eigenvalues_jacobi()
                .unwrap(),
            vec![0.0; 4]
        );
        let ev = sym(&[vec![1.0, 1.0], vec![1.0, 4.0]]).eigenvalues_jacobi().unwrap();
        assert!((ev[0] - 0.697224362268005).abs() < 1e-12);
        assert!((ev[1] - 4.302775637731995).abs() < 1e-12);
    }

    #[test]
    fn householder_matches_jacobi() {
        let n = 30;
        let m = DenseMatrix::from_fn(n, |i, j| {
            let (i, j) = (i.max(j) as f64, i.min(j) as f64);
            (0.37 * i + 1.3 * j).sin() * 5.0 + if i == j { i } else { 0.0 }
        });
        let s = DenseSymmetricMatrix::new(m).unwrap();
        let a = s.eigenvalues().unwrap();
        let b = s.eigenvalues_jacobi().unwrap();
        let scale = s.as_matrix().frobenius_norm();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn algebra() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let b = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(&a * &b, DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![4.0, 3.0]]));
        assert_eq!(
            a.commutator(&b),
            DenseMatrix::from_rows(&[vec![-1.0, -3.0], vec![3.0, 1.0]])
        );
        assert_eq!(a.norm_one(), 6.0);
        assert!((a.determinant() + 2.0).abs() < 1e-15);
        assert_eq!(a.transpose()[(0, 1)], 3.0);
    }
}
