//! Singular values of a tridiagonal operator `J` through the pentadiagonal
//! Gram operator `J^T J`.
//!
//! `J` has `b(n)` on the diagonal, `a(n)` at `(n, n + 1)` and `c(n)` at
//! `(n + 1, n)`.

use crate::error::{Error, Result};
use crate::linalg::{
    eigenvalues, truncate, DenseMatrix, EigenRange, SymmetricBandMatrix,
};
use crate::model::{BandModel, EntrySequence};

/// Order of the dense product the construction is checked against.
pub const GRAM_CHECK_ORDER: usize = 50;

#[derive(Clone, Debug)]
pub struct GramJacobi {
    pub sub: EntrySequence,
    pub diag: EntrySequence,
    pub sup: EntrySequence,
    /// `J^T J` as a band model with `m = 2`.
    pub gram: BandModel,
}

/// Builds `J^T J` in closed form:
///
/// ```text
/// (J^T J)(i, i)     = a(i-1)^2 + b(i)^2 + c(i)^2
/// (J^T J)(i+1, i)   = a(i) b(i) + b(i+1) c(i)
/// (J^T J)(i+2, i)   = a(i+1) c(i)
/// ```
///
/// and compares the section of order [`GRAM_CHECK_ORDER`] with the leading
/// block of the dense product one order larger.
pub fn gram_of_jacobi(sub: EntrySequence, diag: EntrySequence, sup: EntrySequence) -> Result<GramJacobi> {
    gram_of_jacobi_checked(sub, diag, sup, GRAM_CHECK_ORDER)
}

/// [`gram_of_jacobi`] with an explicit check order (at least 3).
pub fn gram_of_jacobi_checked(
    sub: EntrySequence,
    diag: EntrySequence,
    sup: EntrySequence,
    check_order: usize,
) -> Result<GramJacobi> {
    if check_order < 3 {
        return Err(Error::precondition("gram_of_jacobi", "check order must be at least 3"));
    }
    let (a, b, c) = (sup.clone(), diag.clone(), sub.clone());
    let d = EntrySequence::new("gram_diag", move |i| {
        let i = i as i64;
        a.eval(i - 1).powi(2) + b.eval(i).powi(2) + c.eval(i).powi(2)
    });
    let (a, b, c) = (sup.clone(), diag.clone(), sub.clone());
    let band1 = EntrySequence::new("gram_band1", move |i| {
        let i = i as i64;
        a.eval(i) * b.eval(i) + b.eval(i + 1) * c.eval(i)
    });
    let (a, c) = (sup.clone(), sub.clone());
    let band2 = EntrySequence::new("gram_band2", move |i| {
        let i = i as i64;
        a.eval(i + 1) * c.eval(i)
    });
    let gram = BandModel::new(d, vec![band1, band2])?.with_label(format!(
        "J^T J, J = tridiag({}, {}, {})",
        sub.label(),
        diag.label(),
        sup.label()
    ));
    let g = GramJacobi { sub, diag, sup, gram };

    let closed = truncate(&g.gram, check_order)?.to_dense();
    let j = g.jacobi_section(check_order + 1);
    let product = j.transpose().matmul(&j);
    let scale = product.max_abs().max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for r in 0..check_order {
        for s in 0..check_order {
            worst = worst.max((closed[(r, s)] - product[(r, s)]).abs());
        }
    }
    if !(worst <= 1e-12 * scale) {
        return Err(Error::Consistency {
            op: "gram_of_jacobi",
            detail: format!("closed form differs from dense J^T J by {worst:e} (scale {scale:e})"),
        });
    }
    Ok(g)
}

impl GramJacobi {
    /// Dense `J_N`.
    pub fn jacobi_section(&self, order: usize) -> DenseMatrix {
        DenseMatrix::from_fn(order, |r, s| {
            let (i, j) = (r as i64 + 1, s as i64 + 1);
            if i == j {
                self.diag.eval(i)
            } else if i == j + 1 {
                self.sub.eval(j)
            } else if j == i + 1 {
                self.sup.eval(i)
            } else {
                0.0
            }
        })
    }

    /// `J_N^T J_N` exactly. It agrees with `truncate(gram, N)` except at
    /// `(N, N)`, which lacks `c(N)^2`.
    pub fn section(&self, order: usize) -> Result<SymmetricBandMatrix> {
        let full = truncate(&self.gram, order)?;
        let mut bands: Vec<Vec<f64>> = (0..=full.bandwidth()).map(|k| full.band(k).to_vec()).collect();
        bands[0][order - 1] -= self.sub.eval(order as i64).powi(2);
        SymmetricBandMatrix::new(bands)
    }

    /// Ascending singular values of `J_N`, as square roots of the
    /// eigenvalues of [`GramJacobi::section`]. Eigenvalues within rounding
    /// of zero are clamped.
    pub fn singular_values(&self, order: usize) -> Result<Vec<f64>> {
        let g = self.section(order)?;
        let scale = g.gershgorin_norm();
        let ev = eigenvalues(&g, EigenRange::All)?.eigenvalues;
        if let Some(&low) = ev.first() {
            if low < -1e-10 * scale {
                return Err(Error::Consistency {
                    op: "singular_values",
                    detail: format!("Gram eigenvalue {low:e} is negative beyond rounding"),
                });
            }
        }
        Ok(ev.into_iter().map(|x| x.max(0.0).sqrt()).collect())
    }
}
