//! Exponentials of real skew-symmetric band generators.

use super::dense::{DenseMatrix, DenseSymmetricMatrix, DENSE_MAX_ORDER};
use crate::error::{Error, Result};

/// Orthogonality defect accepted for `exp(-K)`.
pub const ORTHOGONALITY_TOL: f64 = 1e-12;
const TAYLOR_MAX_TERMS: usize = 40;

/// Real skew-symmetric band matrix `K`: `lower[l - 1][j] = K[j + l, j]`
/// (0-based `j`), with `K[j, j + l] = -K[j + l, j]` and zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewSymmetricGenerator {
    order: usize,
    lower: Vec<Vec<f64>>,
}

impl SkewSymmetricGenerator {
    pub fn new(order: usize, lower: Vec<Vec<f64>>) -> Result<Self> {
        let op = "SkewSymmetricGenerator::new";
        for (i, band) in lower.iter().enumerate() {
            let l = i + 1;
            if band.len() != order.saturating_sub(l) {
                return Err(Error::precondition(
                    op,
                    format!("band {l} has length {}, expected {}", band.len(), order.saturating_sub(l)),
                ));
            }
            if let Some(j) = band.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite { band: l, index: j + 1 });
            }
        }
        Ok(Self { order, lower })
    }

    pub fn zero(order: usize) -> Self {
        Self {
            order,
            lower: vec![],
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bandwidth(&self) -> usize {
        self.lower.len()
    }

    /// `K[j + l, j]`, 0-based `j`.
    pub fn entry(&self, l: usize, j: usize) -> f64 {
        self.lower[l - 1][j]
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut k = DenseMatrix::zeros(self.order);
        for (i, band) in self.lower.iter().enumerate() {
            let l = i + 1;
            for (j, &v) in band.iter().enumerate() {
                k[(j + l, j)] = v;
                k[(j, j + l)] = -v;
            }
        }
        k
    }
}

/// `Q = exp(-K)` by scaling and squaring with a Taylor series on `-K / 2^s`,
/// where `s` makes the scaled 1-norm at most 0.5.
///
/// Fails when `Q^T Q` deviates from the identity by more than
/// [`ORTHOGONALITY_TOL`] in spectral norm.
pub fn orthogonal_exponential(k: &SkewSymmetricGenerator) -> Result<DenseMatrix> {
    let n = k.order();
    if n > DENSE_MAX_ORDER {
        return Err(Error::precondition(
            "orthogonal_exponential",
            format!("order {n} exceeds {DENSE_MAX_ORDER}"),
        ));
    }
    let q = exp_scaled_squared(&k.to_dense().scaled(-1.0));
    let defect = orthogonality_defect(&q)?;
    if !(defect <= ORTHOGONALITY_TOL) {
        return Err(Error::Consistency {
            op: "orthogonal_exponential",
            detail: format!("||Q^T Q - I|| = {defect:e} exceeds {ORTHOGONALITY_TOL:e}"),
        });
    }
    Ok(q)
}

/// `||Q^T Q - I||` in spectral norm.
pub fn orthogonality_defect(q: &DenseMatrix) -> Result<f64> {
    let mut g = q.transpose().matmul(q);
    for i in 0..q.order() {
        g[(i, i)] -= 1.0;
    }
    let fro = g.frobenius_norm();
    if fro <= ORTHOGONALITY_TOL * 1e-2 || !fro.is_finite() {
        // Frobenius dominates the spectral norm; skip the eigensolve
        return Ok(fro);
    }
    let ev = DenseSymmetricMatrix::new(g.symmetric_part().into_matrix())?.eigenvalues()?;
    Ok(ev.iter().fold(0.0f64, |acc, x| acc.max(x.abs())))
}

fn exp_scaled_squared(x: &DenseMatrix) -> DenseMatrix {
    let n = x.order();
    let norm = x.norm_one();
    let mut squarings = 0u32;
    if norm > 0.5 {
        squarings = (norm / 0.5).log2().ceil() as u32;
    }
    let a = x.scaled(0.5f64.powi(squarings as i32));
    let mut result = DenseMatrix::identity(n);
    let mut term = DenseMatrix::identity(n);
    for k in 1..=TAYLOR_MAX_TERMS {
        term = term.matmul(&a).scaled(1.0 / k as f64);
        result = &result + &term;
        if term.max_abs() <= f64::EPSILON * 1e-2 {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn zero_generator_gives_identity() {
        let q = orthogonal_exponential(&SkewSymmetricGenerator::zero(5)).unwrap();
        assert_eq!(q, DenseMatrix::identity(5));
    }

    #[test]
    fn planar_rotation() {
        // K[0][1] = theta, K[1][0] = -theta
        let k = SkewSymmetricGenerator::new(2, vec![vec![-FRAC_PI_2]]).unwrap();
        let q = orthogonal_exponential(&k).unwrap();
        let expected = DenseMatrix::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]);
        assert!((&q - &expected).max_abs() < 1e-12);
    }

    #[test]
    fn large_generator_determinant_one() {
        let n = 40;
        let lower = (1..=3)
            .map(|l| (0..n - l).map(|j| 3.0 * ((j * l) as f64 * 0.9).cos()).collect())
            .collect();
        let k = SkewSymmetricGenerator::new(n, lower).unwrap();
        let q = orthogonal_exponential(&k).unwrap();
        assert!((q.determinant() - 1.0).abs() < 1e-10);
        assert!(orthogonality_defect(&q).unwrap() <= ORTHOGONALITY_TOL);
    }
}
