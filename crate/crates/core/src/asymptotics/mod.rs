//! Eigenvalue residuals `lambda_n - d(n)`, empirical decay rates and their
//! comparison with the predicted `O(.)` rates.
//!
//! Rate claims are checked one-sided: a fitted exponent passes when it is at
//! most the predicted one plus a slack.

mod fit;
mod gram;

use std::ops::RangeInclusive;

pub use fit::{fit_samples, FitKind, RateFit, Sample, DEFAULT_FLOOR_REL, MIN_FIT_POINTS};
pub use gram::{gram_of_jacobi, gram_of_jacobi_checked, GramJacobi, GRAM_CHECK_ORDER};

use crate::error::{Error, Result};
use crate::linalg::truncation_stability_batch;
use crate::model::{BandModel, PowerLikeParams, SpecialFamilyKind, SpecialFamilyParams};

/// Slack on fitted exponents.
pub const DEFAULT_RATE_SLACK: f64 = 0.15;

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualEntry {
    pub n: usize,
    pub lambda_n: f64,
    pub d_n: f64,
    /// `lambda_n - d_n`.
    pub residual: f64,
    pub stable: bool,
}

impl ResidualEntry {
    /// `lambda_n / d_n - 1`; NaN when `d_n = 0`.
    pub fn relative_residual(&self) -> f64 {
        if self.d_n == 0.0 {
            f64::NAN
        } else {
            self.residual / self.d_n
        }
    }

    fn floor(&self) -> f64 {
        DEFAULT_FLOOR_REL * (1.0 + self.d_n.abs())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualSeries {
    pub entries: Vec<ResidualEntry>,
    pub model_label: String,
    /// Section order the eigenvalues were taken from.
    pub order: usize,
}

impl ResidualSeries {
    pub fn stable_count(&self) -> usize {
        self.entries.iter().filter(|e| e.stable).count()
    }

    fn window_entries(&self, window: &RangeInclusive<usize>) -> impl Iterator<Item = &ResidualEntry> + '_ {
        let w = window.clone();
        self.entries.iter().filter(move |e| e.stable && w.contains(&e.n))
    }

    /// Full index range of the series.
    pub fn span(&self) -> Option<RangeInclusive<usize>> {
        Some(self.entries.first()?.n..=self.entries.last()?.n)
    }
}

/// `lambda_n(A_N) - d(n)` for each `n` in `ns`, with the doubling-test
/// stability flag. Requires `max(ns) <= N / 2`.
pub fn residual_series(model: &BandModel, ns: RangeInclusive<usize>, order: usize) -> Result<ResidualSeries> {
    let records = truncation_stability_batch(model, ns, order)?;
    let entries = records
        .into_iter()
        .map(|r| {
            let d_n = model.d(r.n as i64);
            ResidualEntry {
                n: r.n,
                lambda_n: r.lambda,
                d_n,
                residual: r.lambda - d_n,
                stable: r.stable,
            }
        })
        .collect();
    Ok(ResidualSeries {
        entries,
        model_label: model.label().to_string(),
        order,
    })
}

/// Second-order perturbation estimate of `lambda_n - d(n)`:
/// `sum_l a_l(n-l)^2 / (d(n) - d(n-l)) + a_l(n)^2 / (d(n) - d(n+l))`.
/// Terms with a zero coupling are skipped.
pub fn perturbation_oracle(model: &BandModel, n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::precondition("perturbation_oracle", "indices start at 1"));
    }
    let n = n as i64;
    let dn = model.d(n);
    let mut sum = 0.0;
    for l in 1..=model.m() {
        let li = l as i64;
        for (coupling, neighbour) in [(model.a(l, n - li), n - li), (model.a(l, n), n + li)] {
            if coupling == 0.0 {
                continue;
            }
            let gap = dn - model.d(neighbour);
            if gap == 0.0 {
                return Err(Error::DegenerateGap {
                    band: l,
                    index: n.min(neighbour) as usize,
                });
            }
            sum += coupling * coupling / gap;
        }
    }
    Ok(sum)
}

/// Fits `|lambda_n - d(n)|` over the stable entries in `window`.
pub fn fit_rate(series: &ResidualSeries, window: RangeInclusive<usize>, kind: FitKind) -> Result<RateFit> {
    let samples: Vec<Sample> = series
        .window_entries(&window)
        .map(|e| (e.n, e.residual, e.floor()))
        .collect();
    fit_samples(&samples, kind)
}

/// Fits `|lambda_n / d(n) - 1|`; the floor is the absolute floor divided
/// by `|d(n)|`.
pub fn fit_relative_rate(series: &ResidualSeries, window: RangeInclusive<usize>, kind: FitKind) -> Result<RateFit> {
    let samples: Vec<Sample> = series
        .window_entries(&window)
        .map(|e| (e.n, e.relative_residual(), e.floor() / e.d_n.abs()))
        .collect();
    fit_samples(&samples, kind)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateVerdict {
    /// Predicted power exponent.
    pub predicted: f64,
    pub predicted_text: String,
    /// `None` when every stable residual sits below the floor.
    pub fitted: Option<RateFit>,
    pub pass: bool,
}

fn all_below_floor(series: &ResidualSeries) -> bool {
    series
        .entries
        .iter()
        .filter(|e| e.stable)
        .all(|e| e.residual.abs() <= e.floor())
}

fn trivial(predicted: f64, predicted_text: String) -> RateVerdict {
    RateVerdict {
        predicted,
        predicted_text,
        fitted: None,
        pass: true,
    }
}

/// `lambda_n(A) = d(n) + O(n^(delta - kappa))` for a power-like model:
/// passes iff the fitted absolute exponent is at most `delta - kappa + slack`.
pub fn verify_theorem11(params: &PowerLikeParams, series: &ResidualSeries, slack: f64) -> Result<RateVerdict> {
    let kappa = params.kappa();
    if !(kappa > 0.0) {
        return Err(Error::precondition(
            "verify_theorem11",
            format!("needs kappa = delta0 - delta > 0, got {kappa}"),
        ));
    }
    let predicted = params.delta - kappa;
    let text = format!("n^{predicted}");
    if all_below_floor(series) {
        return Ok(trivial(predicted, text));
    }
    let span = series.span().expect("nonempty series");
    let fit = fit_rate(series, span, FitKind::PurePower)?;
    Ok(RateVerdict {
        predicted,
        predicted_text: text,
        pass: fit.exponent <= predicted + slack,
        fitted: Some(fit),
    })
}

/// Relative rates of the special families:
///
/// - log_power: `n^(-2 kappa) (ln n)^(-2 kappa')`
/// - pure_log: `n^(-2 kappa) (ln n)^(1 - kappa')`
/// - stretched_exp: `n^(-2 kappa)`
///
/// The relative residual is fitted with a `ln ln n` regressor. Passes iff the
/// power exponent is at most `-2 kappa + slack`. The log coefficient is
/// reported but not judged: for `kappa = 0` it converges only like
/// `1 / ln n`.
pub fn verify_family_54(params: &SpecialFamilyParams, series: &ResidualSeries, slack: f64) -> Result<RateVerdict> {
    params.validate()?;
    let (k, kp) = (params.kappa, params.kappa_prime);
    let predicted = -2.0 * k;
    let log_power = match params.kind {
        SpecialFamilyKind::LogPower => Some(-2.0 * kp),
        SpecialFamilyKind::PureLog => Some(1.0 - kp),
        SpecialFamilyKind::StretchedExp => None,
    };
    let text = match log_power {
        Some(q) => format!("n^{predicted} (ln n)^{q}"),
        None => format!("n^{predicted}"),
    };
    if k == 0.0 {
        let admissible = match params.kind {
            SpecialFamilyKind::LogPower => kp > 0.0,
            SpecialFamilyKind::PureLog => kp > 1.0,
            SpecialFamilyKind::StretchedExp => false,
        };
        if !admissible {
            return Err(Error::precondition(
                "verify_family_54",
                format!("kappa = 0 is covered only with kappa' large enough; got kappa' = {kp} for {}", params.kind.name()),
            ));
        }
    } else if !(k > 0.0) {
        return Err(Error::precondition("verify_family_54", format!("kappa = {k} must be >= 0")));
    }
    if all_below_floor(series) {
        return Ok(trivial(predicted, text));
    }
    let span = series.span().expect("nonempty series");
    let fit = fit_relative_rate(series, span, FitKind::PowerWithLog)?;
    let pass = fit.exponent <= predicted + slack;
    Ok(RateVerdict {
        predicted,
        predicted_text: text,
        fitted: Some(fit),
        pass,
    })
}
