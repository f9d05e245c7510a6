//! Symmetric band storage, finite sections of band models, and reduction of
//! band matrices to tridiagonal form by Givens rotations with bulge chasing.

use super::dense::{DenseMatrix, DenseSymmetricMatrix};
use super::tridiag::Tridiagonal;
use crate::error::{Error, Result};
use crate::model::BandModel;

/// Symmetric band matrix of order `N` and bandwidth `m`, lower bands only:
/// `bands[k][j] = M[j + k, j]` (0-based), `bands[k].len() == N - k`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricBandMatrix {
    order: usize,
    bands: Vec<Vec<f64>>,
}

impl SymmetricBandMatrix {
    pub fn new(bands: Vec<Vec<f64>>) -> Result<Self> {
        let op = "SymmetricBandMatrix::new";
        let order = bands.first().map_or(0, Vec::len);
        if order == 0 {
            return Err(Error::precondition(op, "empty diagonal"));
        }
        let m = bands.len() - 1;
        if order <= m {
            return Err(Error::precondition(
                op,
                format!("order {order} must exceed bandwidth {m}"),
            ));
        }
        for (k, band) in bands.iter().enumerate() {
            if band.len() != order - k {
                return Err(Error::precondition(
                    op,
                    format!("band {k} has length {}, expected {}", band.len(), order - k),
                ));
            }
            if let Some(j) = band.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite {
                    band: k,
                    index: j + 1,
                });
            }
        }
        Ok(Self { order, bands })
    }

    /// Band part of a dense matrix, reading the lower triangle.
    pub fn from_dense(m: &DenseMatrix, bandwidth: usize) -> Result<Self> {
        let n = m.order();
        let bands = (0..=bandwidth)
            .map(|k| (0..n.saturating_sub(k)).map(|j| m[(j + k, j)]).collect())
            .collect();
        Self::new(bands)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bandwidth(&self) -> usize {
        self.bands.len() - 1
    }

    pub fn band(&self, k: usize) -> &[f64] {
        &self.bands[k]
    }

    /// Entry `(i, j)`, 0-based, either triangle.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let k = hi - lo;
        if k > self.bandwidth() {
            0.0
        } else {
            self.bands[k][lo]
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.order, |i, j| self.get(i, j))
    }

    pub fn to_dense_symmetric(&self) -> DenseSymmetricMatrix {
        DenseSymmetricMatrix::new(self.to_dense()).expect("band storage is symmetric")
    }

    pub fn max_abs(&self) -> f64 {
        self.bands
            .iter()
            .flatten()
            .fold(0.0f64, |acc, x| acc.max(x.abs()))
    }

    /// Gershgorin bound `max_i sum_j |M[i][j]|`, an upper bound for `||M||`.
    pub fn gershgorin_norm(&self) -> f64 {
        let n = self.order;
        let m = self.bandwidth();
        (0..n)
            .map(|i| {
                (i.saturating_sub(m)..(i + m + 1).min(n))
                    .map(|j| self.get(i, j).abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Orthogonally similar tridiagonal matrix.
    pub fn tridiagonalize(&self) -> Tridiagonal {
        let n = self.order;
        let m = self.bandwidth();
        if m == 0 {
            return Tridiagonal::new(self.bands[0].clone(), vec![0.0; n - 1]);
        }
        if m == 1 {
            return Tridiagonal::new(self.bands[0].clone(), self.bands[1].clone());
        }
        let mut w = Workspace::new(self);
        for b in (2..=m).rev() {
            for i in 0..n.saturating_sub(b) {
                // annihilate (i + b, i), then chase the bulge down the band
                let mut col = i;
                let mut row = i + b;
                while row < n {
                    let x = w.get(row, col);
                    if x == 0.0 {
                        break;
                    }
                    let y = w.get(row - 1, col);
                    let h = y.hypot(x);
                    w.rotate(row - 1, b, y / h, x / h);
                    w.set(row, col, 0.0);
                    w.set(row - 1, col, h);
                    col = row - 1;
                    row += b;
                }
            }
        }
        let diag = (0..n).map(|i| w.get(i, i)).collect();
        let off = (1..n).map(|i| w.get(i, i - 1)).collect();
        Tridiagonal::new(diag, off)
    }
}

/// Band storage with one extra band for the bulge.
struct Workspace {
    n: usize,
    width: usize,
    bands: Vec<Vec<f64>>,
}

impl Workspace {
    fn new(m: &SymmetricBandMatrix) -> Self {
        let n = m.order;
        let width = m.bandwidth() + 1;
        let mut bands: Vec<Vec<f64>> = m.bands.clone();
        bands.push(vec![0.0; n - width.min(n)]);
        Self { n, width, bands }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let k = hi - lo;
        if k > self.width {
            0.0
        } else {
            self.bands[k][lo]
        }
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let k = hi - lo;
        if k > self.width {
            debug_assert!(v == 0.0, "fill outside workspace at ({i}, {j}): {v:e}");
            return;
        }
        self.bands[k][lo] = v;
    }

    /// Similarity by the rotation acting on rows/columns `p` and `p + 1`:
    /// row p <- c row p + s row q, row q <- -s row p + c row q.
    /// `b` is the current bandwidth; entries farther than `b + 1` are zero.
    fn rotate(&mut self, p: usize, b: usize, c: f64, s: f64) {
        let q = p + 1;
        let lo = p.saturating_sub(b + 1);
        let hi = (q + b + 1).min(self.n - 1);
        for x in lo..=hi {
            if x == p || x == q {
                continue;
            }
            let a = self.get(p, x);
            let bq = self.get(q, x);
            if a == 0.0 && bq == 0.0 {
                continue;
            }
            self.set(p, x, c * a + s * bq);
            self.set(q, x, -s * a + c * bq);
        }
        let app = self.get(p, p);
        let aqq = self.get(q, q);
        let apq = self.get(q, p);
        let cs = c * s;
        self.set(p, p, c * c * app + 2.0 * cs * apq + s * s * aqq);
        self.set(q, q, s * s * app - 2.0 * cs * apq + c * c * aqq);
        self.set(q, p, cs * (aqq - app) + (c * c - s * s) * apq);
    }
}

/// Finite section `A_N` of a band model: band 0 holds `d(1..=N)` and band `l`
/// holds `a_l(1..=N-l)`.
pub fn truncate(model: &BandModel, order: usize) -> Result<SymmetricBandMatrix> {
    let m = model.m();
    if order <= m {
        return Err(Error::precondition(
            "truncate",
            format!("order {order} must exceed bandwidth {m}"),
        ));
    }
    let mut bands = Vec::with_capacity(m + 1);
    bands.push((1..=order).map(|j| model.d(j as i64)).collect::<Vec<_>>());
    for l in 1..=m {
        bands.push(
            (1..=order - l)
                .map(|j| model.a(l, j as i64))
                .collect::<Vec<_>>(),
        );
    }
    for (k, band) in bands.iter().enumerate() {
        if let Some(j) = band.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                band: k,
                index: j + 1,
            });
        }
    }
    SymmetricBandMatrix::new(bands)
}
