//! The computable eigenvalue certificate `15 m^3 sup rho_n` and numerical
//! checks of the hypotheses it rests on.
//!
//! Window quantities exclude shifted indices `j + i <= 0` instead of reading
//! the zero extension there; near the boundary the zero extension would make
//! `gamma` vanish for no reason.

use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, truncate, EigenRange};
use crate::model::{BandModel, TauPolicy};

/// Shifts `j + i` with `|i| <= s` and `j + i >= 1`.
fn shifts(j: usize, s: usize) -> RangeInclusive<i64> {
    let lo = (j as i64 - s as i64).max(1);
    lo..=j as i64 + s as i64
}

fn delta_d(model: &BandModel, j: i64) -> f64 {
    model.diagonal().forward_difference(j)
}

/// `max_{l, |i|<=s} |a_l(j + i)|`.
pub fn alpha_s(model: &BandModel, j: usize, s: usize) -> f64 {
    let mut best = 0.0f64;
    for k in shifts(j, s) {
        for l in 1..=model.m() {
            best = best.max(model.a(l, k).abs());
        }
    }
    best
}

/// `2 alpha_s(j) / tau_n + max_{l, |i|<=s} |(delta a_l)(j + i)|`.
pub fn alpha_tilde(model: &BandModel, j: usize, s: usize, tau_n: usize) -> f64 {
    let mut slope = 0.0f64;
    for k in shifts(j, s) {
        for l in 1..=model.m() {
            slope = slope.max(model.off_diagonal(l).forward_difference(k).abs());
        }
    }
    2.0 * alpha_s(model, j, s) / tau_n as f64 + slope
}

/// `min_{|i|<=s+1} (delta d)(j + i)`.
pub fn gamma_s(model: &BandModel, j: usize, s: usize) -> f64 {
    shifts(j, s + 1)
        .map(|k| delta_d(model, k))
        .fold(f64::INFINITY, f64::min)
}

/// `max_{|i|<=s} |(delta^2 d)(j + i)|`.
pub fn gamma_tilde(model: &BandModel, j: usize, s: usize) -> f64 {
    shifts(j, s)
        .map(|k| model.diagonal().second_difference(k).abs())
        .fold(0.0f64, f64::max)
}

/// `2 at a / g + m gt a^2 / g^2`.
pub fn rho_from_components(alpha_tilde: f64, alpha: f64, gamma: f64, gamma_tilde: f64, m: usize) -> f64 {
    let q = alpha / gamma;
    2.0 * alpha_tilde * q + m as f64 * gamma_tilde * q * q
}

/// `rho_n(j)` with `s = 4m` in the alpha and gamma terms and `5m` in the
/// second-difference term.
pub fn rho(model: &BandModel, n: usize, j: usize, tau: &TauPolicy) -> Result<f64> {
    let m = model.m();
    let tau_n = tau.value(n)?;
    let gamma = gamma_s(model, j, 4 * m);
    if !(gamma > 0.0) {
        return Err(Error::Inapplicable { index: j, gamma });
    }
    Ok(rho_from_components(
        alpha_tilde(model, j, 4 * m, tau_n),
        alpha_s(model, j, 4 * m),
        gamma,
        gamma_tilde(model, j, 5 * m),
        m,
    ))
}

/// Tabulated window quantities around `n`: the same values as the free
/// functions, computed once per index.
#[derive(Clone, Debug)]
pub struct WindowStats {
    pub n: usize,
    pub tau_n: usize,
    pub m: usize,
    /// `[n - 2 tau_n - 4m, n + 2 tau_n + 4m]`.
    pub window: RangeInclusive<usize>,
    first: usize,
    abs_a: Vec<f64>,
    abs_da: Vec<f64>,
    dd: Vec<f64>,
    abs_d2: Vec<f64>,
}

impl WindowStats {
    pub fn new(model: &BandModel, n: usize, tau: &TauPolicy) -> Result<Self> {
        let m = model.m();
        let tau_n = tau.value(n)?;
        let radius = 2 * tau_n + 4 * m;
        if n <= radius {
            return Err(Error::precondition(
                "certify",
                format!("window start n - 2 tau_n - 4m = {} < 1", n as i64 - radius as i64),
            ));
        }
        let window = n - radius..=n + radius;
        let pad = 5 * m + 1;
        let first = (n - radius).saturating_sub(pad).max(1);
        let last = n + radius + pad;
        let (mut abs_a, mut abs_da, mut dd, mut abs_d2) = (vec![], vec![], vec![], vec![]);
        for k in first..=last {
            let k = k as i64;
            let (mut a, mut da) = (0.0f64, 0.0f64);
            for l in 1..=m {
                a = a.max(model.a(l, k).abs());
                da = da.max(model.off_diagonal(l).forward_difference(k).abs());
            }
            abs_a.push(a);
            abs_da.push(da);
            dd.push(delta_d(model, k));
            abs_d2.push(model.diagonal().second_difference(k).abs());
        }
        Ok(Self {
            n,
            tau_n,
            m,
            window,
            first,
            abs_a,
            abs_da,
            dd,
            abs_d2,
        })
    }

    fn span(&self, j: usize, s: usize) -> std::ops::Range<usize> {
        let lo = j.saturating_sub(s).max(self.first) - self.first;
        let hi = j + s - self.first + 1;
        assert!(hi <= self.abs_a.len(), "index {j} +- {s} outside the tabulated window");
        lo..hi
    }

    pub fn alpha_s(&self, j: usize, s: usize) -> f64 {
        self.abs_a[self.span(j, s)].iter().fold(0.0, |a, &b| a.max(b))
    }

    pub fn alpha_tilde(&self, j: usize, s: usize) -> f64 {
        let slope = self.abs_da[self.span(j, s)].iter().fold(0.0, |a: f64, &b| a.max(b));
        2.0 * self.alpha_s(j, s) / self.tau_n as f64 + slope
    }

    pub fn gamma_s(&self, j: usize, s: usize) -> f64 {
        self.dd[self.span(j, s + 1)].iter().fold(f64::INFINITY, |a, &b| a.min(b))
    }

    pub fn gamma_tilde(&self, j: usize, s: usize) -> f64 {
        self.abs_d2[self.span(j, s)].iter().fold(0.0, |a: f64, &b| a.max(b))
    }

    pub fn rho(&self, j: usize) -> Result<f64> {
        let m = self.m;
        let gamma = self.gamma_s(j, 4 * m);
        if !(gamma > 0.0) {
            return Err(Error::Inapplicable { index: j, gamma });
        }
        Ok(rho_from_components(
            self.alpha_tilde(j, 4 * m),
            self.alpha_s(j, 4 * m),
            gamma,
            self.gamma_tilde(j, 5 * m),
            m,
        ))
    }
}

/// Outcome of a finite-range check of an `O(.)`-type hypothesis.
#[derive(Clone, Debug, PartialEq)]
pub enum PowerStatus {
    /// Held on the tested range; `constant` is the smallest constant that works there.
    VerifiedOnRange { constant: f64 },
    ViolatedAt { index: usize, detail: String },
    Untested,
}

impl PowerStatus {
    pub fn is_verified(&self) -> bool {
        matches!(self, PowerStatus::VerifiedOnRange { .. })
    }
}

/// Growth-rate hypotheses of the power-like rate theorem.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerBox {
    /// `C^-1 n^(delta+kappa-1) <= (delta d)(n) <= C n^(delta+kappa-1)`.
    pub growth: PowerStatus,
    /// `(delta^2 d)(n) = O(n^(delta+kappa-2))`.
    pub second_difference: PowerStatus,
    /// `a_l(n) = O(n^delta)`.
    pub off_diagonal: PowerStatus,
    /// `(delta a_l)(n) = O(n^(delta-1))`.
    pub off_diagonal_difference: PowerStatus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisReport {
    /// First `n` from which `d(n) < d(n+1)` holds through the tested range.
    pub monotone_from: Option<usize>,
    /// First `n` from which the gap condition holds for every band through
    /// the tested range.
    pub gap_from: Option<usize>,
    pub power_box: Option<PowerBox>,
    pub tested_range: RangeInclusive<usize>,
    /// Indices where `n + m - tau_n < 1`, so the gap condition read `d` through
    /// its zero extension (or `tau_n` was undefined).
    pub zero_extended: Vec<usize>,
}

impl HypothesisReport {
    /// `max(monotone_from, gap_from)` when both exist.
    pub fn n0(&self) -> Option<usize> {
        Some(self.monotone_from?.max(self.gap_from?))
    }
}

/// First index from which `holds` is true through the end of `range`.
fn holds_from(range: RangeInclusive<usize>, mut holds: impl FnMut(usize) -> bool) -> Option<usize> {
    let (lo, hi) = (*range.start(), *range.end());
    let mut from = None;
    for n in (lo..=hi).rev() {
        if holds(n) {
            from = Some(n);
        } else {
            break;
        }
    }
    from
}

/// Scans `d(n) < d(n+1)` and
/// `4m max(|a_l(n)|, |a_l(n+m-tau_n)|) <= d(n) - d(n+m-tau_n)` over `range`.
pub fn check_lemma42_hypotheses(
    model: &BandModel,
    tau: &TauPolicy,
    range: RangeInclusive<usize>,
) -> HypothesisReport {
    let m = model.m();
    let mut zero_extended = vec![];
    let mut gap_ok = Vec::new();
    for n in range.clone() {
        let ok = match tau.value(n) {
            Ok(t) => {
                let back = n as i64 + m as i64 - t as i64;
                if back < 1 {
                    zero_extended.push(n);
                }
                let gap = model.d(n as i64) - model.d(back);
                (1..=m).all(|l| {
                    let a = model.a(l, n as i64).abs().max(model.a(l, back).abs());
                    4.0 * m as f64 * a <= gap
                })
            }
            Err(_) => {
                zero_extended.push(n);
                false
            }
        };
        gap_ok.push(ok);
    }
    let lo = *range.start();
    HypothesisReport {
        monotone_from: holds_from(range.clone(), |n| model.d(n as i64) < model.d(n as i64 + 1)),
        gap_from: holds_from(range.clone(), |n| gap_ok[n - lo]),
        power_box: None,
        tested_range: range,
        zero_extended,
    }
}

/// Least-squares slope of `ln y` against `ln n` over the positive samples.
fn log_slope(samples: &[(usize, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(_, y)| *y > 0.0 && y.is_finite())
        .map(|&(n, y)| ((n as f64).ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Log-log slope above which a ratio is deemed unbounded on the range.
pub const GROWTH_SLOPE_TOL: f64 = 0.05;

/// Bounded-ratio test on a finite range: the ratio must not trend upward in
/// log-log scale. The violation index is the first point past the midpoint
/// that exceeds every value on the first half.
fn bounded_ratio(samples: &[(usize, f64)], what: &str) -> PowerStatus {
    if samples.iter().any(|(_, r)| !r.is_finite()) {
        let (j, _) = samples.iter().find(|(_, r)| !r.is_finite()).unwrap();
        return PowerStatus::ViolatedAt {
            index: *j,
            detail: format!("{what}: non-finite ratio"),
        };
    }
    let sup = samples.iter().fold(0.0f64, |a, s| a.max(s.1));
    let slope = log_slope(samples);
    if slope > GROWTH_SLOPE_TOL {
        let half = samples.len() / 2;
        let first_sup = samples[..half.max(1)].iter().fold(0.0f64, |a, s| a.max(s.1));
        let (index, value) = samples[half..]
            .iter()
            .copied()
            .find(|s| s.1 > first_sup)
            .unwrap_or(*samples.last().unwrap());
        return PowerStatus::ViolatedAt {
            index,
            detail: format!("{what}: ratio grows like n^{slope:.3} (value {value:.3e})"),
        };
    }
    PowerStatus::VerifiedOnRange { constant: sup }
}

/// Checks the power-like growth hypotheses on `range` and reports the fitted
/// constants. `O(.)` claims are judged by [`bounded_ratio`].
pub fn check_power_hypotheses(
    model: &BandModel,
    delta: f64,
    kappa: f64,
    range: RangeInclusive<usize>,
) -> Result<HypothesisReport> {
    let (lo, hi) = (*range.start(), *range.end());
    if lo < 1 || lo > hi {
        return Err(Error::precondition(
            "check_power_hypotheses",
            format!("range {lo}..={hi} is empty"),
        ));
    }
    let p = delta + kappa - 1.0;
    let pow = |n: usize, e: f64| (n as f64).powf(e);
    let d = model.diagonal();

    let upper: Vec<(usize, f64)> = range.clone().map(|n| (n, d.forward_difference(n as i64) / pow(n, p))).collect();
    let growth = if let Some(&(j, r)) = upper.iter().find(|s| !(s.1 > 0.0)) {
        PowerStatus::ViolatedAt {
            index: j,
            detail: format!("(delta d)(n) / n^{p} = {r:.3e} is not positive"),
        }
    } else {
        let inverse: Vec<(usize, f64)> = upper.iter().map(|&(n, r)| (n, 1.0 / r)).collect();
        match (
            bounded_ratio(&upper, "delta d upper"),
            bounded_ratio(&inverse, "delta d lower"),
        ) {
            (PowerStatus::VerifiedOnRange { constant: a }, PowerStatus::VerifiedOnRange { constant: b }) => {
                PowerStatus::VerifiedOnRange { constant: a.max(b) }
            }
            (v @ PowerStatus::ViolatedAt { .. }, _) | (_, v) => v,
        }
    };

    let second: Vec<(usize, f64)> = range
        .clone()
        .map(|n| (n, d.second_difference(n as i64).abs() / pow(n, p - 1.0)))
        .collect();
    let off: Vec<(usize, f64)> = range
        .clone()
        .map(|n| {
            let a = (1..=model.m()).map(|l| model.a(l, n as i64).abs()).fold(0.0, f64::max);
            (n, a / pow(n, delta))
        })
        .collect();
    let off_diff: Vec<(usize, f64)> = range
        .clone()
        .map(|n| {
            let a = (1..=model.m())
                .map(|l| model.off_diagonal(l).forward_difference(n as i64).abs())
                .fold(0.0, f64::max);
            (n, a / pow(n, delta - 1.0))
        })
        .collect();

    let mut report = HypothesisReport {
        monotone_from: holds_from(range.clone(), |n| d.eval(n as i64) < d.eval(n as i64 + 1)),
        gap_from: None,
        power_box: None,
        tested_range: range,
        zero_extended: vec![],
    };
    report.power_box = Some(PowerBox {
        growth,
        second_difference: bounded_ratio(&second, "delta^2 d"),
        off_diagonal: bounded_ratio(&off, "a_l"),
        off_diagonal_difference: bounded_ratio(&off_diff, "delta a_l"),
    });
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificateResult {
    pub n: usize,
    pub tau_n: usize,
    pub rho_sup: f64,
    /// `15 m^3 rho_sup`.
    pub bound: f64,
    pub arg_sup: usize,
    pub window: RangeInclusive<usize>,
    pub hypotheses: HypothesisReport,
    /// True when the monotonicity and gap conditions hold on the whole window.
    pub hypotheses_hold: bool,
}

/// Bound on `|lambda_n(A) - d(n)|`: `15 m^3 sup rho_n` over the window
/// `|j - n| <= 2 tau_n + 4m`. Ties in the supremum go to the smallest index.
pub fn certify(model: &BandModel, n: usize, tau: &TauPolicy) -> Result<CertificateResult> {
    let stats = WindowStats::new(model, n, tau)?;
    let m = model.m();
    let (mut rho_sup, mut arg_sup) = (f64::NEG_INFINITY, 0);
    for j in stats.window.clone() {
        let r = stats.rho(j)?;
        if r > rho_sup {
            rho_sup = r;
            arg_sup = j;
        }
    }
    let hypotheses = check_lemma42_hypotheses(model, tau, stats.window.clone());
    let start = *stats.window.start();
    let hypotheses_hold = hypotheses.n0() == Some(start);
    Ok(CertificateResult {
        n,
        tau_n: stats.tau_n,
        rho_sup,
        bound: 15.0 * (m * m * m) as f64 * rho_sup,
        arg_sup,
        window: stats.window,
        hypotheses,
        hypotheses_hold,
    })
}

/// Smallest `n1` in `range` such that for every `n >= n1` in the range the
/// certificate window starts past `n0 + m` and `certify` succeeds, with
/// `n0` the hypothesis threshold over `[1, end of the last window]`.
///
/// Uses the hypotheses only, never the eigenvalues, so it can be compared
/// with the observed containment without circularity.
pub fn empirical_n1(model: &BandModel, tau: &TauPolicy, range: RangeInclusive<usize>) -> Option<usize> {
    let hi = *range.end();
    let m = model.m();
    let reach = hi + 2 * tau.value(hi).ok()? + 4 * m + 1;
    let n0 = check_lemma42_hypotheses(model, tau, 1..=reach).n0()?;
    holds_from(range, |n| {
        let Ok(t) = tau.value(n) else { return false };
        let radius = 2 * t + 4 * m;
        n > radius && n - radius >= (n0 + m).max(1) && certify(model, n, tau).is_ok()
    })
}

/// One row of a certificate sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateCheck {
    pub n: usize,
    pub lambda: f64,
    pub d: f64,
    pub bound: f64,
    pub stable: bool,
    pub holds: bool,
}

/// Certificate and `lambda_n(A_N)` for every `n` in `range` where the
/// certificate window fits; stability by the `N` versus `2N` test.
pub fn certificate_sweep(
    model: &BandModel,
    tau: &TauPolicy,
    range: RangeInclusive<usize>,
    order: usize,
) -> Result<Vec<CertificateCheck>> {
    let (lo, hi) = (*range.start(), *range.end());
    if 2 * hi > order {
        return Err(Error::precondition(
            "certificate_sweep",
            format!("need n <= N/2, got n = {hi}, N = {order}"),
        ));
    }
    let a = eigenvalues(&truncate(model, order)?, EigenRange::Indices(lo..=hi))?;
    let b = eigenvalues(&truncate(model, 2 * order)?, EigenRange::Indices(lo..=hi))?;
    let mut rows = vec![];
    for n in lo..=hi {
        let cert = match certify(model, n, tau) {
            Ok(c) => c,
            Err(e) if e.is_input_error() || matches!(e, Error::Inapplicable { .. }) => continue,
            Err(e) => return Err(e),
        };
        let lambda = a.get(n).unwrap();
        let delta = (b.get(n).unwrap() - lambda).abs();
        let d = model.d(n as i64);
        rows.push(CertificateCheck {
            n,
            lambda,
            d,
            bound: cert.bound,
            stable: delta <= crate::linalg::STABILITY_TOL * (1.0 + lambda.abs()),
            holds: (lambda - d).abs() <= cert.bound,
        });
    }
    Ok(rows)
}
