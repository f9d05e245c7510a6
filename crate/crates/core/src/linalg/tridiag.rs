//! Symmetric tridiagonal eigenvalues: implicit QL with Wilkinson shifts for the
//! full spectrum, Sturm-sequence bisection for selected indices.

use crate::error::{Error, Result};

/// Iteration cap per eigenvalue for the QL sweep.
pub const QL_MAX_ITERATIONS: usize = 60;
/// Bisection step cap; enough to shrink any binary64 interval to one ulp.
pub const BISECTION_MAX_STEPS: usize = 2200;

/// Symmetric tridiagonal matrix: `diag[i]` on the diagonal and `off[i]` at
/// `(i + 1, i)`, 0-based.
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert!(
            diag.is_empty() && off.is_empty() || off.len() + 1 == diag.len(),
            "off-diagonal must have one entry fewer than the diagonal"
        );
        Self { diag, off }
    }

    pub fn order(&self) -> usize {
        self.diag.len()
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.order();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    fn pivmin(&self) -> f64 {
        let emax = self.off.iter().fold(1.0f64, |acc, e| acc.max(e * e));
        f64::MIN_POSITIVE * emax
    }

    /// Number of eigenvalues strictly below `x` (negative pivots of the
    /// LDL^T factorization of `T - x I`).
    pub fn sturm_count(&self, x: f64) -> usize {
        self.sturm_count_with(x, self.pivmin())
    }

    fn sturm_count_with(&self, x: f64, pivmin: f64) -> usize {
        let n = self.order();
        if n == 0 {
            return 0;
        }
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..n {
            let e = self.off[i - 1];
            q = self.diag[i] - x - e * e / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Eigenvalue with 0-based index `k` in ascending order, by bisection.
    pub fn bisect(&self, k: usize) -> Result<f64> {
        let n = self.order();
        if k >= n {
            return Err(Error::precondition(
                "bisect",
                format!("index {} out of range for order {n}", k + 1),
            ));
        }
        let pivmin = self.pivmin();
        let (glo, ghi) = self.gershgorin();
        let pad = 2.0 * f64::EPSILON * glo.abs().max(ghi.abs()) + 2.0 * pivmin;
        let (mut lo, mut hi) = (glo - pad, ghi + pad);
        for _ in 0..BISECTION_MAX_STEPS {
            let mid = 0.5 * (lo + hi);
            let width = hi - lo;
            let tol = 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + pivmin;
            if width <= tol || mid <= lo || mid >= hi {
                return Ok(mid);
            }
            if self.sturm_count_with(mid, pivmin) <= k {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Err(Error::NoConvergence {
            op: "bisect",
            iterations: BISECTION_MAX_STEPS,
            partial: vec![],
        })
    }

    /// All eigenvalues, ascending, by implicit QL with Wilkinson shifts.
    pub fn eigenvalues_ql(&self) -> Result<Vec<f64>> {
        let n = self.order();
        let mut d = self.diag.clone();
        if n <= 1 {
            return Ok(d);
        }
        let mut e = self.off.clone();
        e.push(0.0);

        for l in 0..n {
            let mut iter = 0;
            loop {
                let mut m = l;
                while m + 1 < n {
                    let dd = d[m].abs() + d[m + 1].abs();
                    if e[m].abs() <= f64::EPSILON * dd {
                        break;
                    }
                    m += 1;
                }
                if m == l {
                    break;
                }
                iter += 1;
                if iter > QL_MAX_ITERATIONS {
                    let mut partial = d[..l].to_vec();
                    partial.sort_by(f64::total_cmp);
                    return Err(Error::NoConvergence {
                        op: "eigenvalues_ql",
                        iterations: QL_MAX_ITERATIONS,
                        partial,
                    });
                }
                let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                let mut r = g.hypot(1.0);
                g = d[m] - d[l] + e[l] / (g + r.copysign(g));
                let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
                let mut i = m;
                let mut deflated = false;
                while i > l {
                    i -= 1;
                    let f = s * e[i];
                    let b = c * e[i];
                    r = f.hypot(g);
                    e[i + 1] = r;
                    if r == 0.0 {
                        // underflow: split here and restart
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        deflated = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                }
                if deflated {
                    continue;
                }
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        }
        d.sort_by(f64::total_cmp);
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let t = Tridiagonal::new(vec![1.0, 4.0], vec![1.0]);
        let ev = t.eigenvalues_ql().unwrap();
        let s13 = 13f64.sqrt();
        assert!((ev[0] - (5.0 - s13) / 2.0).abs() < 1e-14);
        assert!((ev[1] - (5.0 + s13) / 2.0).abs() < 1e-14);
        assert!((t.bisect(0).unwrap() - 0.697224362268005).abs() < 1e-12);
        assert!((t.bisect(1).unwrap() - 4.302775637731995).abs() < 1e-12);
    }

    #[test]
    fn free_chain_closed_form() {
        let n = 60;
        let t = Tridiagonal::new(vec![0.0; n], vec![-1.0; n - 1]);
        let ql = t.eigenvalues_ql().unwrap();
        let mut exact: Vec<f64> = (1..=n)
            .map(|k| 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos())
            .collect();
        exact.sort_by(f64::total_cmp);
        for k in 0..n {
            assert!((ql[k] - exact[k]).abs() < 1e-13);
            assert!((t.bisect(k).unwrap() - exact[k]).abs() < 1e-13);
        }
    }

    #[test]
    fn sturm_counts_bracket() {
        let t = Tridiagonal::new(vec![3.0, -1.0, 2.0, 7.0], vec![0.5, 1.5, -2.0]);
        let (lo, hi) = t.gershgorin();
        assert_eq!(t.sturm_count(lo - 1.0), 0);
        assert_eq!(t.sturm_count(hi + 1.0), 4);
    }

    #[test]
    fn diagonal_input_unchanged() {
        let t = Tridiagonal::new(vec![3.0, 1.0, 2.0], vec![0.0, 0.0]);
        assert_eq!(t.eigenvalues_ql().unwrap(), vec![1.0, 2.0, 3.0]);
        assert!((t.bisect(0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn graded_matrix_relative_accuracy() {
        // large entries at the bottom, tiny couplings: eigenvalues ~ diagonal
        let n = 40;
        let diag: Vec<f64> = (1..=n).map(|j| (j as f64).powi(4)).collect();
        let off: Vec<f64> = (1..n).map(|j| 1e-3 * j as f64).collect();
        let t = Tridiagonal::new(diag.clone(), off);
        let ql = t.eigenvalues_ql().unwrap();
        for k in 0..n {
            let b = t.bisect(k).unwrap();
            assert!((ql[k] - b).abs() <= 1e-12 * diag[n - 1]);
            assert!((ql[k] - diag[k]).abs() <= 1e-3);
        }
    }
}
