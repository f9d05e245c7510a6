//! Explicit near-diagonalization on finite sections.
//!
//! The off-diagonal part splits as `A' = A_n + A~_n` with the cutoff `chi`
//! centered at `n`. The generator `P_n = iK` solves `A_n + [D, iP_n] = 0`;
//! in real arithmetic `K` is skew-symmetric with
//! `K[j+l, j] = a_{n,l}(j) / (d(j+l) - d(j))` and
//! `B_n = exp(K) A exp(-K) = Q^T A Q` with `Q = exp(-K)`.

use crate::error::{Error, Result};
use crate::linalg::{
    eigenvalues, orthogonal_exponential, orthogonality_defect, spectral_norm, DenseMatrix, DenseSymmetricMatrix,
    EigenRange, SkewSymmetricGenerator, SymmetricBandMatrix,
};
use crate::model::{BandModel, CutoffFunction, TauPolicy};

/// Slack for the two norm inequalities, relative to `1 + rhs`.
pub const INEQUALITY_SLACK: f64 = 1e-9;
/// Tolerance for the commutator equation, relative to `1 + ||A_n||`.
pub const COMMUTATOR_TOL: f64 = 1e-12;

/// Default lab order `n + 2 tau_n + 4m + 2m`: the certificate window plus a
/// margin, all interior.
pub fn default_lab_order(model: &BandModel, n: usize, tau: &TauPolicy) -> Result<usize> {
    let m = model.m();
    Ok(n + 2 * tau.value(n)? + 6 * m)
}

/// Near and far parts of the off-diagonal entries, evaluated once.
struct Split<'a> {
    model: &'a BandModel,
    chi: &'a CutoffFunction,
    n: usize,
    tau_n: usize,
}

impl<'a> Split<'a> {
    fn new(model: &'a BandModel, n: usize, tau: &TauPolicy, chi: &'a CutoffFunction) -> Result<Self> {
        Ok(Self {
            model,
            chi,
            n,
            tau_n: tau.value(n)?,
        })
    }

    /// `a_{n,l}(j)`; zero for `j <= 0`.
    fn near(&self, l: usize, j: i64) -> f64 {
        if j < 1 {
            return 0.0;
        }
        let v = self.model.a(l, j);
        crate::model::split_entry(v, self.chi, self.n, self.tau_n, j as usize).0
    }

    fn far(&self, l: usize, j: i64) -> f64 {
        if j < 1 {
            return 0.0;
        }
        let v = self.model.a(l, j);
        crate::model::split_entry(v, self.chi, self.n, self.tau_n, j as usize).1
    }

    /// `a_{n,l}(j) / (d(j+l) - d(j))`, zero where the near part vanishes.
    fn p(&self, l: usize, j: i64) -> Result<f64> {
        let a = self.near(l, j);
        if a == 0.0 {
            return Ok(0.0);
        }
        let gap = self.model.d(j + l as i64) - self.model.d(j);
        if gap == 0.0 || !gap.is_finite() {
            return Err(Error::DegenerateGap {
                band: l,
                index: j as usize,
            });
        }
        Ok(a / gap)
    }
}

fn dense_from_bands(order: usize, entry: impl Fn(usize, i64) -> f64, m: usize) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(order);
    for l in 1..=m {
        for j in 1..=order - l {
            let v = entry(l, j as i64);
            out[(j + l - 1, j - 1)] = v;
            out[(j - 1, j + l - 1)] = v;
        }
    }
    out
}

/// The cutoff split on a section of order `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitPair {
    pub a_n: DenseSymmetricMatrix,
    pub a_tilde_n: DenseSymmetricMatrix,
    pub n: usize,
    pub tau_n: usize,
    pub order: usize,
}

fn check_order(model: &BandModel, n: usize, tau_n: usize, order: usize) -> Result<()> {
    let need = n + 2 * tau_n + model.m();
    if order < need {
        return Err(Error::precondition(
            "split_offdiagonal",
            format!("order {order} < n + 2 tau_n + m = {need}"),
        ));
    }
    Ok(())
}

/// `A' = A_n + A~_n` on the section of order `N`.
pub fn split_offdiagonal(
    model: &BandModel,
    n: usize,
    tau: &TauPolicy,
    chi: &CutoffFunction,
    order: usize,
) -> Result<SplitPair> {
    let split = Split::new(model, n, tau, chi)?;
    check_order(model, n, split.tau_n, order)?;
    let m = model.m();
    let a_n = dense_from_bands(order, |l, j| split.near(l, j), m);
    let a_tilde_n = dense_from_bands(order, |l, j| split.far(l, j), m);
    Ok(SplitPair {
        a_n: DenseSymmetricMatrix::new(a_n)?,
        a_tilde_n: DenseSymmetricMatrix::new(a_tilde_n)?,
        n,
        tau_n: split.tau_n,
        order,
    })
}

/// `K` with `K[j+l, j] = a_{n,l}(j) / d'_l(j)` on the section of order `N`.
pub fn generator(
    model: &BandModel,
    n: usize,
    tau: &TauPolicy,
    chi: &CutoffFunction,
    order: usize,
) -> Result<SkewSymmetricGenerator> {
    let split = Split::new(model, n, tau, chi)?;
    let m = model.m().min(order.saturating_sub(1));
    let lower = (1..=m)
        .map(|l| {
            (1..=order - l)
                .map(|j| split.p(l, j as i64))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    SkewSymmetricGenerator::new(order, lower)
}

/// `||A_n - [D, K]||`; an error when it exceeds `1e-12 (1 + ||A_n||)`.
pub fn verify_commutator_equation(
    a_n: &DenseSymmetricMatrix,
    d: &[f64],
    k: &SkewSymmetricGenerator,
) -> Result<f64> {
    let order = a_n.order();
    if d.len() != order || k.order() != order {
        return Err(Error::precondition(
            "verify_commutator_equation",
            format!("orders differ: A_n {order}, D {}, K {}", d.len(), k.order()),
        ));
    }
    let dm = DenseMatrix::from_fn(order, |i, j| if i == j { d[i] } else { 0.0 });
    let residual_matrix = a_n.as_matrix() - &dm.commutator(&k.to_dense());
    let residual = spectral_norm(&residual_matrix)?;
    let scale = spectral_norm(a_n)?;
    if !(residual <= COMMUTATOR_TOL * (1.0 + scale)) {
        return Err(Error::Consistency {
            op: "verify_commutator_equation",
            detail: format!("||A_n - [D, K]|| = {residual:e} with ||A_n|| = {scale:e}"),
        });
    }
    Ok(residual)
}

/// `sum_{k != j} |M[j][k]|`, maximized over 0-based rows `rows`.
fn max_row_mass(m: &DenseMatrix, rows: std::ops::RangeInclusive<usize>) -> f64 {
    rows.map(|j| {
        m.row(j)
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != j)
            .map(|(_, v)| v.abs())
            .sum::<f64>()
    })
    .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConjugationReport {
    pub n: usize,
    pub order: usize,
    pub tau_n: usize,
    /// `||A_n - [D, K]||`.
    pub commutator_residual: f64,
    /// `||B_n - (D + A~_n)||`.
    pub lhs_321: f64,
    /// `||[P_n, A~_n]|| + ||[P_n, A_n]|| / 2`.
    pub rhs_321: f64,
    /// `||[A_n, P_n]||`.
    pub lhs_342: f64,
    /// `10 m^3 sup rho_{n,4m}` over the certificate window.
    pub rhs_342: f64,
    pub lambda_n_of_split: f64,
    pub d_n: f64,
    /// Largest gap between the sorted spectra of `B_n` and `A_N`.
    pub spectrum_deviation: f64,
    /// `||A_N||`.
    pub a_norm: f64,
    pub orthogonality_defect: f64,
    /// Largest off-diagonal row mass over `|j - n| <= tau_n / 2`, for `A_N`.
    pub row_mass_a: f64,
    /// Same for `B_n`.
    pub row_mass_b: f64,
}

/// Builds `B_n`, measures both sides of the two commutator inequalities and
/// the commutator equation residual. Violated inequalities are errors: both
/// are theorems, so a violation means the construction is wrong.
pub fn conjugate_and_report(
    model: &BandModel,
    n: usize,
    tau: &TauPolicy,
    chi: &CutoffFunction,
    order: usize,
) -> Result<ConjugationReport> {
    let op = "conjugate_and_report";
    let split = split_offdiagonal(model, n, tau, chi, order)?;
    let k = generator(model, n, tau, chi, order)?;
    let d: Vec<f64> = (1..=order).map(|j| model.d(j as i64)).collect();
    let commutator_residual = verify_commutator_equation(&split.a_n, &d, &k)?;

    let dm = DenseMatrix::from_fn(order, |i, j| if i == j { d[i] } else { 0.0 });
    let a_n = split.a_n.as_matrix();
    let a_tilde = split.a_tilde_n.as_matrix();
    let a_full = &(&dm + a_n) + a_tilde;

    let q = orthogonal_exponential(&k)?;
    let b = q.transpose().matmul(&a_full).matmul(&q);

    let kd = k.to_dense();
    let lhs_321 = spectral_norm(&(&b - &(&dm + a_tilde)))?;
    let rhs_321 = spectral_norm(&kd.commutator(a_tilde))? + 0.5 * spectral_norm(&kd.commutator(a_n))?;
    let lhs_342 = spectral_norm(&a_n.commutator(&kd))?;
    let stats = commutator_stats(model, n, tau, chi, 4 * model.m())?;
    let rhs_342 = 10.0 * (model.m().pow(3)) as f64 * stats.sup_rho_over_window();

    let band = SymmetricBandMatrix::from_dense(&(&dm + a_tilde), model.m())?;
    let split_spec = eigenvalues(&band, EigenRange::All)?.eigenvalues;
    let a_spec = eigenvalues(&SymmetricBandMatrix::from_dense(&a_full, model.m())?, EigenRange::All)?.eigenvalues;
    let b_spec = b.symmetric_part().eigenvalues()?;
    let spectrum_deviation = a_spec
        .iter()
        .zip(&b_spec)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let a_norm = a_spec.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));

    let half = split.tau_n / 2;
    let rows = (n - 1).saturating_sub(half)..=(n - 1 + half).min(order - 1);

    let report = ConjugationReport {
        n,
        order,
        tau_n: split.tau_n,
        commutator_residual,
        lhs_321,
        rhs_321,
        lhs_342,
        rhs_342,
        lambda_n_of_split: split_spec[n - 1],
        d_n: model.d(n as i64),
        spectrum_deviation,
        a_norm,
        orthogonality_defect: orthogonality_defect(&q)?,
        row_mass_a: max_row_mass(&a_full, rows.clone()),
        row_mass_b: max_row_mass(&b, rows),
    };
    if !(report.lhs_321 <= report.rhs_321 + INEQUALITY_SLACK * (1.0 + report.rhs_321)) {
        return Err(Error::Consistency {
            op,
            detail: format!("||B_n - (D + A~_n)|| = {:e} > {:e}", report.lhs_321, report.rhs_321),
        });
    }
    if !(report.lhs_342 <= report.rhs_342 + INEQUALITY_SLACK * (1.0 + report.rhs_342)) {
        return Err(Error::Consistency {
            op,
            detail: format!("||[A_n, P_n]|| = {:e} > {:e}", report.lhs_342, report.rhs_342),
        });
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lemma42Check {
    pub lambda_n_split: f64,
    pub d_n: f64,
    /// Distance from `d(n)` to the nearest other eigenvalue of `D + A~_n`.
    pub gap_to_neighbors: f64,
}

impl Lemma42Check {
    pub fn holds(&self, rel_tol: f64) -> bool {
        (self.lambda_n_split - self.d_n).abs() <= rel_tol * (1.0 + self.d_n.abs())
    }
}

/// `lambda_n(D + A~_n)` on the section of order `N`, next to `d(n)`.
pub fn lemma42_check(
    model: &BandModel,
    n: usize,
    tau: &TauPolicy,
    chi: &CutoffFunction,
    order: usize,
) -> Result<Lemma42Check> {
    let split = Split::new(model, n, tau, chi)?;
    check_order(model, n, split.tau_n, order)?;
    let m = model.m();
    let mut bands = vec![(1..=order).map(|j| model.d(j as i64)).collect::<Vec<_>>()];
    for l in 1..=m {
        bands.push((1..=order - l).map(|j| split.far(l, j as i64)).collect());
    }
    let spec = eigenvalues(&SymmetricBandMatrix::new(bands)?, EigenRange::All)?.eigenvalues;
    let d_n = model.d(n as i64);
    let gap_to_neighbors = spec
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != n - 1)
        .map(|(_, v)| (v - d_n).abs())
        .fold(f64::INFINITY, f64::min);
    Ok(Lemma42Check {
        lambda_n_split: spec[n - 1],
        d_n,
        gap_to_neighbors,
    })
}

/// `alpha beta' + alpha' beta`.
pub fn rho_ns_from_components(alpha: f64, beta_prime: f64, alpha_prime: f64, beta: f64) -> f64 {
    alpha * beta_prime + alpha_prime * beta
}

/// Window maxima of the near part `a_{n,l}` and the generator entries
/// `p_{n,l}`, tabulated on `[1, n + 2 tau_n + 4m + s + 1]`.
#[derive(Clone, Debug)]
pub struct CommutatorStats {
    pub n: usize,
    pub s: usize,
    pub tau_n: usize,
    pub m: usize,
    abs_a: Vec<f64>,
    abs_da: Vec<f64>,
    abs_p: Vec<f64>,
    abs_dp: Vec<f64>,
}

impl CommutatorStats {
    fn window_max(v: &[f64], j: usize, s: usize) -> f64 {
        // index 0 holds j = 1; shifts to j + i <= 0 contribute zero
        let lo = j.saturating_sub(s).max(1);
        let hi = (j + s).min(v.len());
        if lo > hi {
            return 0.0;
        }
        v[lo - 1..hi].iter().fold(0.0, |a: f64, &b| a.max(b))
    }

    /// `max_{l, |i|<=s} |a_{n,l}(j+i)|`.
    pub fn alpha(&self, j: usize) -> f64 {
        Self::window_max(&self.abs_a, j, self.s)
    }

    /// `max_{l, |i|<=s} |p_{n,l}(j+i)|`.
    pub fn beta(&self, j: usize) -> f64 {
        Self::window_max(&self.abs_p, j, self.s)
    }

    /// `max_{l, |i|<=s} |(delta a_{n,l})(j+i)|`.
    pub fn alpha_prime(&self, j: usize) -> f64 {
        Self::window_max(&self.abs_da, j, self.s)
    }

    /// `max_{l, |i|<=s} |(delta p_{n,l})(j+i)|`.
    pub fn beta_prime(&self, j: usize) -> f64 {
        Self::window_max(&self.abs_dp, j, self.s)
    }

    pub fn rho(&self, j: usize) -> f64 {
        rho_ns_from_components(self.alpha(j), self.beta_prime(j), self.alpha_prime(j), self.beta(j))
    }

    /// `sup_{|i| <= 2 tau_n + 4m} rho(n + i)` over indices `>= 1`.
    pub fn sup_rho_over_window(&self) -> f64 {
        let r = 2 * self.tau_n + 4 * self.m;
        (self.n.saturating_sub(r).max(1)..=self.n + r)
            .map(|j| self.rho(j))
            .fold(0.0, f64::max)
    }
}

pub fn commutator_stats(
    model: &BandModel,
    n: usize,
    tau: &TauPolicy,
    chi: &CutoffFunction,
    s: usize,
) -> Result<CommutatorStats> {
    let split = Split::new(model, n, tau, chi)?;
    let m = model.m();
    let last = n + 2 * split.tau_n + 4 * m + s + 1;
    let (mut abs_a, mut abs_da, mut abs_p, mut abs_dp) = (vec![], vec![], vec![], vec![]);
    for j in 1..=last as i64 {
        let (mut a, mut da, mut p, mut dp) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for l in 1..=m {
            a = a.max(split.near(l, j).abs());
            da = da.max((split.near(l, j + 1) - split.near(l, j)).abs());
            let pj = split.p(l, j)?;
            p = p.max(pj.abs());
            dp = dp.max((split.p(l, j + 1)? - pj).abs());
        }
        abs_a.push(a);
        abs_da.push(da);
        abs_p.push(p);
        abs_dp.push(dp);
    }
    Ok(CommutatorStats {
        n,
        s,
        tau_n: split.tau_n,
        m,
        abs_a,
        abs_da,
        abs_p,
        abs_dp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EntrySequence;

    fn m1() -> BandModel {
        BandModel::new(EntrySequence::power(1.0, 2.0), vec![EntrySequence::power(1.0, 0.5)]).unwrap()
    }

    fn diag() -> BandModel {
        BandModel::diagonal_only(EntrySequence::power(1.0, 2.0))
    }

    #[test]
    fn split_examples() {
        let chi = CutoffFunction::smoothstep();
        let tau = TauPolicy::Quarter;
        let s = split_offdiagonal(&diag(), 40, &tau, &chi, 120).unwrap();
        assert_eq!(s.a_n.as_matrix().max_abs(), 0.0);
        assert_eq!(s.a_tilde_n.as_matrix().max_abs(), 0.0);

        let model = m1();
        let n = 40;
        let s = split_offdiagonal(&model, n, &tau, &chi, 120).unwrap();
        // entry (j + 1, j) sits at 0-based (j, j - 1)
        assert_eq!(s.a_n.as_matrix()[(n, n - 1)], model.a(1, n as i64));
        assert_eq!(s.a_tilde_n.as_matrix()[(n, n - 1)], 0.0);
        let j = n + 2 * s.tau_n + 1;
        assert_eq!(s.a_n.as_matrix()[(j, j - 1)], 0.0);
        // chi(+-2) = 0, so the far part only vanishes where chi = 1
        for j in n - s.tau_n..=n + s.tau_n {
            assert_eq!(s.a_tilde_n.as_matrix()[(j, j - 1)], 0.0);
        }
        let edge = n + 2 * s.tau_n;
        assert_eq!(s.a_tilde_n.as_matrix()[(edge, edge - 1)], model.a(1, edge as i64));
        let sum = s.a_n.as_matrix() + s.a_tilde_n.as_matrix();
        for j in 1..120 {
            let a = model.a(1, j as i64);
            assert!((sum[(j, j - 1)] - a).abs() <= f64::EPSILON * a.abs());
        }
        assert!(matches!(
            split_offdiagonal(&model, n, &tau, &chi, 60),
            Err(Error::Precondition { .. })
        ));
    }

    #[test]
    fn generator_examples() {
        let chi = CutoffFunction::smoothstep();
        let tau = TauPolicy::Quarter;
        let k = generator(&diag(), 40, &tau, &chi, 100).unwrap();
        assert_eq!(k.to_dense().max_abs(), 0.0);

        let three = BandModel::new(EntrySequence::power(1.0, 2.0), vec![EntrySequence::constant(3.0)]).unwrap();
        let k = generator(&three, 5, &TauPolicy::custom("two", |_| 2), &chi, 20).unwrap();
        assert!((k.entry(1, 4) - 3.0 / 11.0).abs() < 1e-15);

        let flat = BandModel::new(EntrySequence::constant(2.0), vec![EntrySequence::constant(1.0)]).unwrap();
        assert!(matches!(
            generator(&flat, 40, &tau, &chi, 100),
            Err(Error::DegenerateGap { band: 1, .. })
        ));
    }

    #[test]
    fn commutator_equation() {
        let chi = CutoffFunction::smoothstep();
        let tau = TauPolicy::Quarter;
        let model = m1();
        let (n, order) = (40, 200);
        let s = split_offdiagonal(&model, n, &tau, &chi, order).unwrap();
        let k = generator(&model, n, &tau, &chi, order).unwrap();
        let d: Vec<f64> = (1..=order).map(|j| model.d(j as i64)).collect();
        let r = verify_commutator_equation(&s.a_n, &d, &k).unwrap();
        assert!(r <= 1e-12 * (1.0 + spectral_norm(&s.a_n).unwrap()));

        let mut lower: Vec<Vec<f64>> = vec![(0..order - 1).map(|j| k.entry(1, j)).collect()];
        lower[0][n - 1] += 1e-3;
        let bad = SkewSymmetricGenerator::new(order, lower).unwrap();
        assert!(matches!(
            verify_commutator_equation(&s.a_n, &d, &bad),
            Err(Error::Consistency { .. })
        ));

        let z = split_offdiagonal(&diag(), n, &tau, &chi, order).unwrap();
        let kz = generator(&diag(), n, &tau, &chi, order).unwrap();
        assert_eq!(verify_commutator_equation(&z.a_n, &d, &kz).unwrap(), 0.0);
    }

    #[test]
    fn report_m1() {
        let chi = CutoffFunction::smoothstep();
        let tau = TauPolicy::Quarter;
        let r = conjugate_and_report(&m1(), 40, &tau, &chi, 240).unwrap();
        assert!(r.lhs_321 <= r.rhs_321);
        assert!(r.lhs_342 <= r.rhs_342);
        assert!(r.spectrum_deviation <= 1e-9 * r.a_norm);
        assert!((r.lambda_n_of_split - r.d_n).abs() <= 1e-10 * r.d_n);
        assert!(r.row_mass_b < r.row_mass_a);

        let z = conjugate_and_report(&diag(), 40, &tau, &chi, 120).unwrap();
        assert_eq!((z.lhs_321, z.rhs_321, z.lhs_342, z.rhs_342), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn lemma42_examples() {
        let chi = CutoffFunction::smoothstep();
        let tau = TauPolicy::Quarter;
        let c = lemma42_check(&diag(), 30, &tau, &chi, 90).unwrap();
        assert_eq!(c.lambda_n_split, c.d_n);
        let c = lemma42_check(&m1(), 100, &tau, &chi, 600).unwrap();
        assert!(c.holds(1e-10));
        assert!(c.gap_to_neighbors > 0.0);
    }

    #[test]
    fn stats_examples() {
        assert!((rho_ns_from_components(2.0, 0.1, 1.0, 0.5) - 0.7).abs() < 1e-15);
        let chi = CutoffFunction::smoothstep();
        let tau = TauPolicy::Quarter;
        let z = commutator_stats(&diag(), 40, &tau, &chi, 4).unwrap();
        assert_eq!(z.sup_rho_over_window(), 0.0);

        let n = 80;
        let s = 4;
        let st = commutator_stats(&m1(), n, &tau, &chi, s).unwrap();
        let t = st.tau_n;
        for j in 1..n + 2 * t + 4 {
            if j.abs_diff(n) >= 2 * t + s {
                assert_eq!(st.beta(j), 0.0, "j = {j}");
            }
            assert!(st.alpha(j) >= 0.0 && st.beta_prime(j) >= 0.0 && st.alpha_prime(j) >= 0.0);
        }
    }
}
