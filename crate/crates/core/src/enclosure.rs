//! Min-max enclosures `d_n^- <= lambda_n(A) <= d_n^+` and the first-order
//! localization radius for power-like models.
//!
//! The infimum over all `j >= n` is replaced by a finite search up to a
//! horizon plus a check that `d - alpha` keeps increasing on a tail window
//! beyond it. The check is reported, not assumed.

use std::ops::RangeInclusive;

use crate::certificate::{check_power_hypotheses, PowerStatus};
use crate::error::{Error, Result};
use crate::model::{BandModel, PowerLikeParams};

pub const DEFAULT_TAIL_CHECK: usize = 200;

/// `max(4n, n + 1000)`.
pub fn default_horizon(n: usize) -> usize {
    (4 * n).max(n + 1000)
}

/// `alpha(j) = sum_l (|a_l(j)| + |a_l(j - l)|)`, the smallest admissible
/// row-mass bound.
pub fn alpha_profile(model: &BandModel, j: usize) -> f64 {
    let j = j as i64;
    (1..=model.m())
        .map(|l| model.a(l, j).abs() + model.a(l, j - l as i64).abs())
        .sum()
}

/// [`alpha_profile`] bound to a model.
#[derive(Clone, Copy, Debug)]
pub struct AlphaProfile<'a> {
    model: &'a BandModel,
}

impl<'a> AlphaProfile<'a> {
    pub fn new(model: &'a BandModel) -> Self {
        Self { model }
    }

    pub fn eval(&self, j: usize) -> f64 {
        alpha_profile(self.model, j)
    }

    /// `alpha(j + 1) - alpha(j)`.
    pub fn forward_difference(&self, j: usize) -> f64 {
        self.eval(j + 1) - self.eval(j)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnclosureResult {
    pub n: usize,
    pub lower: f64,
    pub upper: f64,
    pub arg_lower: usize,
    pub arg_upper: usize,
    pub tail_certified: bool,
    pub certification_note: String,
}

impl EnclosureResult {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Two-sided enclosure of `lambda_n(A)`.
///
/// `upper = max_{1<=j<=n} (d(j) + alpha(j))` is exact. `lower` is the minimum
/// of `d(j) - alpha(j)` over `n <= j <= n + horizon`; it equals the infimum
/// over all `j >= n` when `d - alpha` is nondecreasing beyond the horizon,
/// which is tested on `tail_check + 1` indices.
pub fn enclose(model: &BandModel, n: usize, horizon: usize, tail_check: usize) -> Result<EnclosureResult> {
    let op = "enclose";
    if n < 1 {
        return Err(Error::precondition(op, "indices start at 1"));
    }
    if horizon < n {
        return Err(Error::precondition(op, format!("horizon {horizon} < n = {n}")));
    }
    if tail_check < 1 {
        return Err(Error::precondition(op, "tail_check must be at least 1"));
    }
    let alpha = AlphaProfile::new(model);
    let d = |j: usize| model.d(j as i64);

    let (mut upper, mut arg_upper) = (f64::NEG_INFINITY, 0);
    for j in 1..=n {
        let v = d(j) + alpha.eval(j);
        if v > upper {
            upper = v;
            arg_upper = j;
        }
    }
    let (mut lower, mut arg_lower) = (f64::INFINITY, 0);
    for j in n..=n + horizon {
        let v = d(j) - alpha.eval(j);
        if v < lower {
            lower = v;
            arg_lower = j;
        }
    }

    let tail = n + horizon..=n + horizon + tail_check;
    let violation = tail.clone().find(|&j| {
        let dd = d(j + 1) - d(j);
        !(dd - alpha.forward_difference(j).abs() >= 0.0)
    });
    let tail_certified = violation.is_none();
    let end = *tail.end();
    let ratio = alpha.eval(end) / d(end);
    let certification_note = match violation {
        None => format!(
            "|delta alpha| <= delta d on [{}, {}]; minimum is the infimum if d - alpha stays \
             nondecreasing past {end}; alpha/d = {ratio:.3e} at j = {end}",
            tail.start(),
            end
        ),
        Some(j) => format!(
            "tail check failed at j = {j}: delta d - |delta alpha| = {:.3e}; lower is a \
             minimum over [{n}, {}] only",
            d(j + 1) - d(j) - alpha.forward_difference(j).abs(),
            n + horizon
        ),
    };

    Ok(EnclosureResult {
        n,
        lower,
        upper,
        arg_lower,
        arg_upper,
        tail_certified,
        certification_note,
    })
}

/// [`enclose`] with the default horizon and tail window.
pub fn enclose_default(model: &BandModel, n: usize) -> Result<EnclosureResult> {
    enclose(model, n, default_horizon(n), DEFAULT_TAIL_CHECK)
}

/// Localization radius `C0 n^delta` for a power-like model.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalizedBound {
    pub n: usize,
    /// Smallest `C0` with `alpha(j) <= C0 j^delta` on the window.
    pub c0: f64,
    pub radius: f64,
    pub window: RangeInclusive<usize>,
}

/// Radius of `lambda_n(A) = d(n) + O(n^delta)`. The growth hypothesis on
/// `delta d` and the `O(n^delta)` bound on the off-diagonals are checked on
/// `window` first; a violation is an error naming the index.
pub fn localized_bound(
    model: &BandModel,
    params: &PowerLikeParams,
    n: usize,
    window: RangeInclusive<usize>,
) -> Result<LocalizedBound> {
    let op = "localized_bound";
    let (lo, hi) = (*window.start(), *window.end());
    if lo < 1 || lo >= hi {
        return Err(Error::precondition(op, format!("window {lo}..={hi} must be nonempty from 1")));
    }
    let delta = params.delta;
    let report = check_power_hypotheses(model, delta, params.kappa(), window.clone())?;
    let power = report.power_box.as_ref().expect("power hypotheses were checked");
    for status in [&power.growth, &power.off_diagonal] {
        if let PowerStatus::ViolatedAt { index, detail } = status {
            return Err(Error::Hypothesis {
                op,
                index: *index,
                detail: detail.clone(),
            });
        }
    }
    let c0 = window
        .clone()
        .map(|j| alpha_profile(model, j) / (j as f64).powf(delta))
        .fold(0.0f64, f64::max);
    Ok(LocalizedBound {
        n,
        c0,
        radius: c0 * (n as f64).powf(delta),
        window,
    })
}

/// `b_l(j) = sqrt(2 (a_l(j)^2 + a_l(j - l)^2) / (1 + d(j)^2))`.
pub fn relative_bound_profile(model: &BandModel, l: usize, j: usize) -> f64 {
    let j = j as i64;
    let a = model.a(l, j);
    let b = model.a(l, j - l as i64);
    let d = model.d(j);
    (2.0 * (a * a + b * b) / (1.0 + d * d)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EntrySequence;

    fn m1() -> BandModel {
        BandModel::new(EntrySequence::power(1.0, 2.0), vec![EntrySequence::power(1.0, 0.5)]).unwrap()
    }

    #[test]
    fn alpha_examples() {
        let diag = BandModel::diagonal_only(EntrySequence::power(1.0, 2.0));
        assert_eq!(alpha_profile(&diag, 7), 0.0);
        assert!((alpha_profile(&m1(), 4) - (2.0 + 3f64.sqrt())).abs() < 1e-15);
        assert_eq!(alpha_profile(&m1(), 1), 1.0);
    }

    #[test]
    fn enclose_examples() {
        let diag = BandModel::diagonal_only(EntrySequence::power(1.0, 2.0));
        let e = enclose_default(&diag, 7).unwrap();
        assert_eq!((e.lower, e.upper), (49.0, 49.0));
        assert!(e.tail_certified);

        let e = enclose(&m1(), 4, 100, DEFAULT_TAIL_CHECK).unwrap();
        let r3 = 3f64.sqrt();
        assert!((e.lower - (14.0 - r3)).abs() < 1e-12);
        assert!((e.upper - (18.0 + r3)).abs() < 1e-12);
        assert_eq!((e.arg_lower, e.arg_upper), (4, 4));
        assert!(e.tail_certified);

        let bumpy = BandModel::diagonal_only(EntrySequence::new("5,1,2,3,..", |j| {
            if j == 1 {
                5.0
            } else {
                (j - 1) as f64
            }
        }));
        let e = enclose_default(&bumpy, 3).unwrap();
        assert_eq!((e.upper, e.arg_upper), (5.0, 1));

        assert!(matches!(enclose(&m1(), 10, 9, 5), Err(Error::Precondition { .. })));
    }

    #[test]
    fn tail_failure_is_reported() {
        let model = BandModel::new(
            EntrySequence::power(1.0, 1.0),
            vec![EntrySequence::new("saw", |j| if j % 3 == 0 { 5.0 } else { 0.0 })],
        )
        .unwrap();
        let e = enclose(&model, 5, 20, 10).unwrap();
        assert!(!e.tail_certified);
        assert!(e.certification_note.contains("failed"));
    }

    #[test]
    fn monotone_regime_is_exact() {
        let model = m1();
        let mut prev: Option<EnclosureResult> = None;
        for n in 2..150 {
            let e = enclose_default(&model, n).unwrap();
            let (d, a) = (model.d(n as i64), alpha_profile(&model, n));
            assert_eq!(e.lower, d - a);
            assert_eq!(e.upper, d + a);
            if let Some(p) = prev {
                assert!(p.lower <= e.lower && p.upper <= e.upper);
            }
            prev = Some(e);
        }
    }

    #[test]
    fn localized_examples() {
        let diag = make_params(vec![]);
        let model = BandModel::diagonal_only(EntrySequence::power(1.0, 2.0));
        assert_eq!(localized_bound(&model, &diag, 50, 10..=1000).unwrap().radius, 0.0);

        let p = make_params(vec![(1.0, 0.5)]);
        let b = localized_bound(&m1(), &p, 100, 10..=1000).unwrap();
        assert!(b.c0 > 1.0 && b.c0 <= 2.0);
        assert!(b.radius <= 20.0);

        let wrong = make_params(vec![(1.0, 0.1)]);
        assert!(matches!(
            localized_bound(&m1(), &wrong, 100, 10..=1000),
            Err(Error::Hypothesis { .. })
        ));
    }

    fn make_params(off: Vec<(f64, f64)>) -> PowerLikeParams {
        let off = if off.is_empty() { vec![(0.0, 0.5)] } else { off };
        PowerLikeParams::new(1.0, 2.0, 0.0, off)
    }

    #[test]
    fn relative_profile_examples() {
        let diag = BandModel::diagonal_only(EntrySequence::power(1.0, 2.0));
        assert_eq!(relative_bound_profile(&diag, 1, 5), 0.0);
        assert!((relative_bound_profile(&m1(), 1, 2) - (6.0f64 / 17.0).sqrt()).abs() < 1e-15);
        assert!((relative_bound_profile(&m1(), 1, 2) - 0.594089).abs() < 1e-6);
        assert!((relative_bound_profile(&m1(), 1, 1) - 1.0).abs() < 1e-15);
    }
}
