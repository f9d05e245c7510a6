//! Log-log least squares for empirical decay rates.

use std::ops::RangeInclusive;

use crate::error::{Error, Result};

/// Fewest usable points accepted by a fit.
pub const MIN_FIT_POINTS: usize = 8;
/// Default residual floor, relative to `1 + |d(n)|`.
pub const DEFAULT_FLOOR_REL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitKind {
    /// `ln|r| = c + p ln n`.
    PurePower,
    /// `ln|r| = c + p ln n + q ln ln n`.
    PowerWithLog,
}

impl FitKind {
    pub fn name(self) -> &'static str {
        match self {
            FitKind::PurePower => "pure_power",
            FitKind::PowerWithLog => "power_with_log",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "pure_power" => Some(FitKind::PurePower),
            "power_with_log" => Some(FitKind::PowerWithLog),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateFit {
    pub exponent: f64,
    /// Intercept `c`.
    pub log_constant: f64,
    /// Coefficient `q` of `ln ln n`; zero for pure power fits.
    pub log_coefficient: f64,
    /// Smallest and largest `n` that entered the fit.
    pub window: RangeInclusive<usize>,
    pub r_squared: f64,
    /// Points dropped for sitting at or below the floor.
    pub excluded_count: usize,
    pub used_count: usize,
    pub fit_kind: FitKind,
}

/// A sample `(n, value, floor)`: the value enters the fit when `|value| > floor`.
pub type Sample = (usize, f64, f64);

/// Fits `|value|` against `n`. Samples at or below their floor are counted
/// and dropped; for [`FitKind::PowerWithLog`] so is `n = 1`, where
/// `ln ln n` is undefined.
pub fn fit_samples(samples: &[Sample], kind: FitKind) -> Result<RateFit> {
    let mut excluded = 0;
    let mut rows: Vec<(usize, [f64; 2], f64)> = vec![];
    for &(n, v, floor) in samples {
        let usable = v.is_finite() && v.abs() > floor && (kind == FitKind::PurePower || n >= 2);
        if !usable {
            excluded += 1;
            continue;
        }
        let x = (n as f64).ln();
        let loglog = if kind == FitKind::PowerWithLog { x.ln() } else { 0.0 };
        rows.push((n, [x, loglog], v.abs().ln()));
    }
    if rows.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints {
            usable: rows.len(),
            required: MIN_FIT_POINTS,
        });
    }
    let k = match kind {
        FitKind::PurePower => 1,
        FitKind::PowerWithLog => 2,
    };
    let count = rows.len() as f64;
    let mean_y = rows.iter().map(|r| r.2).sum::<f64>() / count;
    let mut mean_x = [0.0; 2];
    for r in &rows {
        for i in 0..k {
            mean_x[i] += r.1[i] / count;
        }
    }
    // centered normal equations
    let mut a = [[0.0; 2]; 2];
    let mut b = [0.0; 2];
    for r in &rows {
        let dy = r.2 - mean_y;
        for i in 0..k {
            let xi = r.1[i] - mean_x[i];
            b[i] += xi * dy;
            for j in 0..k {
                a[i][j] += xi * (r.1[j] - mean_x[j]);
            }
        }
    }
    let coef = if k == 1 {
        if a[0][0] == 0.0 {
            return Err(Error::precondition("fit_rate", "all points share one n"));
        }
        [b[0] / a[0][0], 0.0]
    } else {
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        if det.abs() <= 1e-14 * a[0][0].abs() * a[1][1].abs() {
            return Err(Error::precondition("fit_rate", "regressors are collinear on this window"));
        }
        [
            (b[0] * a[1][1] - b[1] * a[0][1]) / det,
            (a[0][0] * b[1] - a[1][0] * b[0]) / det,
        ]
    };
    let intercept = mean_y - coef[0] * mean_x[0] - coef[1] * mean_x[1];
    let (mut ss_res, mut ss_tot) = (0.0, 0.0);
    for r in &rows {
        let pred = intercept + coef[0] * r.1[0] + coef[1] * r.1[1];
        ss_res += (r.2 - pred).powi(2);
        ss_tot += (r.2 - mean_y).powi(2);
    }
    let r_squared = if ss_tot == 0.0 { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    Ok(RateFit {
        exponent: coef[0],
        log_constant: intercept,
        log_coefficient: coef[1],
        window: rows.first().unwrap().0..=rows.last().unwrap().0,
        r_squared,
        excluded_count: excluded,
        used_count: rows.len(),
        fit_kind: kind,
    })
}
