//! Finite sections of band models and the eigensolvers run on them.
//!
//! The banded path reduces to tridiagonal form with Givens rotations, then
//! uses shifted QL for the whole spectrum or Sturm bisection for selected
//! indices. The dense rotation oracle shares no code with it.

mod band;
mod dense;
mod expm;
mod tridiag;

use std::ops::RangeInclusive;

pub use band::{truncate, SymmetricBandMatrix};
pub use dense::{DenseMatrix, DenseSymmetricMatrix, DENSE_MAX_ORDER, JACOBI_MAX_SWEEPS};
pub use expm::{orthogonal_exponential, orthogonality_defect, SkewSymmetricGenerator, ORTHOGONALITY_TOL};
pub use tridiag::{Tridiagonal, BISECTION_MAX_STEPS, QL_MAX_ITERATIONS};

use crate::error::{Error, Result};
use crate::model::BandModel;

/// A priori relative accuracy of the banded solver, in units of `||M||`.
pub const SOLVER_TOL_REL: f64 = 1e-12;
/// Relative tolerance of the doubling test in [`truncation_stability`].
pub const STABILITY_TOL: f64 = 1e-8;

/// Which eigenvalues to compute.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EigenRange {
    All,
    /// 1-based, inclusive.
    Indices(RangeInclusive<usize>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralSummary {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// 1-based index of `eigenvalues[0]`.
    pub first_index: usize,
    pub method: String,
    pub residual_bound: f64,
}

impl SpectralSummary {
    /// `lambda_k`, 1-based, if it was computed.
    pub fn get(&self, k: usize) -> Option<f64> {
        k.checked_sub(self.first_index)
            .and_then(|i| self.eigenvalues.get(i).copied())
    }
}

/// Eigenvalues of a symmetric band matrix.
pub fn eigenvalues(m: &SymmetricBandMatrix, which: EigenRange) -> Result<SpectralSummary> {
    let t = m.tridiagonalize();
    let reduction = if m.bandwidth() <= 1 { "tridiagonal" } else { "givens-band-reduction" };
    tridiagonal_eigenvalues(&t, which, reduction)
}

pub(crate) fn tridiagonal_eigenvalues(
    t: &Tridiagonal,
    which: EigenRange,
    reduction: &str,
) -> Result<SpectralSummary> {
    let n = t.order();
    if t.off.iter().all(|&e| e == 0.0) {
        let mut d = t.diag.clone();
        d.sort_by(f64::total_cmp);
        let (lo, hi) = match which {
            EigenRange::All => (1, n),
            EigenRange::Indices(r) => (*r.start(), *r.end()),
        };
        if lo < 1 || hi > n || lo > hi {
            return Err(Error::precondition(
                "eigenvalues",
                format!("index range {lo}..={hi} not within 1..={n}"),
            ));
        }
        return Ok(SpectralSummary {
            eigenvalues: d[lo - 1..hi].to_vec(),
            first_index: lo,
            method: format!("{reduction}+diagonal"),
            residual_bound: 0.0,
        });
    }
    match which {
        EigenRange::All => Ok(SpectralSummary {
            eigenvalues: t.eigenvalues_ql()?,
            first_index: 1,
            method: format!("{reduction}+implicit-ql"),
            residual_bound: SOLVER_TOL_REL,
        }),
        EigenRange::Indices(r) => {
            let (lo, hi) = (*r.start(), *r.end());
            if lo < 1 || hi > n || lo > hi {
                return Err(Error::precondition(
                    "eigenvalues",
                    format!("index range {lo}..={hi} not within 1..={n}"),
                ));
            }
            let eigenvalues = (lo..=hi).map(|k| t.bisect(k - 1)).collect::<Result<Vec<_>>>()?;
            Ok(SpectralSummary {
                eigenvalues,
                first_index: lo,
                method: format!("{reduction}+sturm-bisection"),
                residual_bound: SOLVER_TOL_REL,
            })
        }
    }
}

/// Full spectrum by cyclic two-sided rotations; independent of
/// [`eigenvalues`].
pub fn eigenvalues_dense_oracle(m: &DenseSymmetricMatrix) -> Result<SpectralSummary> {
    Ok(SpectralSummary {
        eigenvalues: m.eigenvalues_jacobi()?,
        first_index: 1,
        method: "cyclic-jacobi".to_string(),
        residual_bound: 1e-14,
    })
}

/// Operator 2-norm.
pub trait SpectralNorm {
    fn spectral_norm(&self) -> Result<f64>;
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

impl SpectralNorm for SymmetricBandMatrix {
    fn spectral_norm(&self) -> Result<f64> {
        Ok(max_abs(&eigenvalues(self, EigenRange::All)?.eigenvalues))
    }
}

impl SpectralNorm for DenseSymmetricMatrix {
    fn spectral_norm(&self) -> Result<f64> {
        Ok(max_abs(&self.eigenvalues()?))
    }
}

/// General square input: `sqrt(lambda_max(X^T X))`; exactly symmetric input
/// takes the symmetric path.
impl SpectralNorm for DenseMatrix {
    fn spectral_norm(&self) -> Result<f64> {
        if self.asymmetry() == 0.0 {
            return DenseSymmetricMatrix::new(self.clone())?.spectral_norm();
        }
        let gram = self.transpose().matmul(self).symmetric_part();
        let top = gram.eigenvalues()?.last().copied().unwrap_or(0.0);
        Ok(top.max(0.0).sqrt())
    }
}

pub fn spectral_norm<M: SpectralNorm + ?Sized>(m: &M) -> Result<f64> {
    m.spectral_norm()
}

/// Outcome of the doubling test for one index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityRecord {
    pub n: usize,
    /// `lambda_n(A_N)`.
    pub lambda: f64,
    /// `|lambda_n(A_{2N}) - lambda_n(A_N)|`.
    pub delta: f64,
    pub stable: bool,
}

/// Compares `lambda_n` of the sections of order `N` and `2N`.
pub fn truncation_stability(model: &BandModel, n: usize, order: usize) -> Result<(bool, f64)> {
    let r = truncation_stability_batch(model, n..=n, order)?;
    Ok((r[0].stable, r[0].delta))
}

/// [`truncation_stability`] for every index in `ns`, sharing the two
/// reductions.
pub fn truncation_stability_batch(
    model: &BandModel,
    ns: RangeInclusive<usize>,
    order: usize,
) -> Result<Vec<StabilityRecord>> {
    let (lo, hi) = (*ns.start(), *ns.end());
    if lo < 1 || lo > hi || 2 * hi > order {
        return Err(Error::precondition(
            "truncation_stability",
            format!("need 1 <= n <= N/2, got n in {lo}..={hi}, N = {order}"),
        ));
    }
    let small = eigenvalues(&truncate(model, order)?, EigenRange::Indices(lo..=hi))?;
    let large = eigenvalues(&truncate(model, 2 * order)?, EigenRange::Indices(lo..=hi))?;
    Ok(small
        .eigenvalues
        .iter()
        .zip(&large.eigenvalues)
        .enumerate()
        .map(|(i, (&a, &b))| {
            let delta = (b - a).abs();
            StabilityRecord {
                n: lo + i,
                lambda: a,
                delta,
                stable: delta <= STABILITY_TOL * (1.0 + a.abs()),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EntrySequence;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn band(bands: Vec<Vec<f64>>) -> SymmetricBandMatrix {
        SymmetricBandMatrix::new(bands).unwrap()
    }

    #[test]
    fn eigenvalue_examples() {
        let m = band(vec![vec![1.0, 4.0], vec![1.0]]);
        let s = eigenvalues(&m, EigenRange::All).unwrap();
        assert!((s.eigenvalues[0] - 0.697224).abs() < 1e-6);
        assert!((s.eigenvalues[1] - 4.302776).abs() < 1e-6);
        assert_eq!(s.get(2), Some(s.eigenvalues[1]));

        let m = band(vec![vec![1.0, 2.0, 3.0], vec![0.0, 0.0], vec![1.0]]);
        let r2 = 2f64.sqrt();
        for which in [EigenRange::All, EigenRange::Indices(1..=3)] {
            let s = eigenvalues(&m, which).unwrap();
            let want = [2.0 - r2, 2.0, 2.0 + r2];
            for (a, b) in s.eigenvalues.iter().zip(want) {
                assert!((a - b).abs() < 1e-12);
            }
        }

        let m = band(vec![vec![3.0, -1.0, 2.0], vec![0.0, 0.0]]);
        assert_eq!(eigenvalues(&m, EigenRange::All).unwrap().eigenvalues, vec![-1.0, 2.0, 3.0]);
        assert!(eigenvalues(&m, EigenRange::Indices(2..=4)).is_err());
    }

    #[test]
    fn dense_oracle_matches_banded_on_2x2() {
        let m = band(vec![vec![1.0, 4.0], vec![1.0]]);
        let a = eigenvalues(&m, EigenRange::All).unwrap();
        let b = eigenvalues_dense_oracle(&m.to_dense_symmetric()).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn spectral_norm_examples() {
        let d = band(vec![vec![1.0, -3.0, 2.0], vec![0.0, 0.0]]);
        assert_eq!(spectral_norm(&d).unwrap(), 3.0);
        let swap = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!((spectral_norm(&swap).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(spectral_norm(&DenseMatrix::zeros(3)).unwrap(), 0.0);
        // non-symmetric: [[1, 2], [0, 1]] has norm 1 + sqrt(2)
        let j = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]);
        assert!((spectral_norm(&j).unwrap() - (1.0 + 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn stability_examples() {
        let diag = BandModel::diagonal_only(EntrySequence::power(1.0, 1.0));
        for r in truncation_stability_batch(&diag, 1..=20, 40).unwrap() {
            assert!(r.stable);
            assert_eq!(r.delta, 0.0);
        }
        let m1 = BandModel::new(EntrySequence::power(1.0, 2.0), vec![EntrySequence::power(1.0, 0.5)])
            .unwrap();
        assert!(truncation_stability(&m1, 10, 100).unwrap().0);
        assert!(matches!(
            truncation_stability(&m1, 51, 100),
            Err(Error::Precondition { .. })
        ));
    }

    fn random_band(rng: &mut ChaCha8Rng, n: usize, m: usize) -> SymmetricBandMatrix {
        let bands = (0..=m)
            .map(|k| (0..n - k).map(|_| rng.gen_range(-10.0..10.0)).collect())
            .collect();
        band(bands)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn banded_matches_oracle(seed in any::<u64>(), n in 4usize..60, m in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mat = random_band(&mut rng, n, m);
            let norm = mat.gershgorin_norm();
            let fast = eigenvalues(&mat, EigenRange::All).unwrap();
            let oracle = eigenvalues_dense_oracle(&mat.to_dense_symmetric()).unwrap();
            prop_assert_eq!(fast.eigenvalues.len(), n);
            for (a, b) in fast.eigenvalues.iter().zip(&oracle.eigenvalues) {
                prop_assert!((a - b).abs() <= 1e-9 * norm);
            }
            let lo = (n / 3).max(1);
            let sel = eigenvalues(&mat, EigenRange::Indices(lo..=n)).unwrap();
            for (k, v) in sel.eigenvalues.iter().enumerate() {
                prop_assert!((v - oracle.eigenvalues[lo - 1 + k]).abs() <= 1e-9 * norm);
            }
        }

        #[test]
        fn sturm_counts_bracket_everything(seed in any::<u64>(), n in 4usize..40, m in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mat = random_band(&mut rng, n, m);
            let bound = mat.gershgorin_norm() + 1.0;
            let t = mat.tridiagonalize();
            prop_assert_eq!(t.sturm_count(-bound), 0);
            prop_assert_eq!(t.sturm_count(bound), n);
        }

        #[test]
        fn similarity_preserves_spectrum(seed in any::<u64>(), n in 3usize..25) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mat = random_band(&mut rng, n, 2);
            let lower = (1..=2).map(|l| (0..n - l).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
            let k = SkewSymmetricGenerator::new(n, lower).unwrap();
            let q = orthogonal_exponential(&k).unwrap();
            let b = q.transpose().matmul(&mat.to_dense()).matmul(&q);
            let eb = b.symmetric_part().eigenvalues().unwrap();
            let ea = eigenvalues(&mat, EigenRange::All).unwrap().eigenvalues;
            let norm = mat.gershgorin_norm();
            for (x, y) in ea.iter().zip(&eb) {
                prop_assert!((x - y).abs() <= 1e-9 * norm);
            }
        }

        #[test]
        fn weyl_perturbation(seed in any::<u64>(), n in 4usize..30) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mat = random_band(&mut rng, n, 3);
            let e_bands: Vec<Vec<f64>> = (0..=3)
                .map(|k| (0..n - k).map(|_| rng.gen_range(-0.1..0.1)).collect())
                .collect();
            let e = band(e_bands.clone());
            let sum = band((0..=3).map(|k| (0..n - k).map(|j| mat.band(k)[j] + e_bands[k][j]).collect()).collect());
            let enorm = spectral_norm(&e).unwrap();
            let a = eigenvalues(&mat, EigenRange::All).unwrap().eigenvalues;
            let b = eigenvalues(&sum, EigenRange::All).unwrap().eigenvalues;
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= enorm + 1e-10);
            }
        }
    }
}
