use std::fmt;
use std::sync::Arc;

use super::{BandModel, TauPolicy};
use crate::error::Result;

/// A C^1 cutoff `chi` with `0 <= chi <= 1`, `chi = 1` on `[-1, 1]` and
/// `chi = 0` outside `[-2, 2]`.
#[derive(Clone)]
pub struct CutoffFunction {
    evaluator: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    derivative_bound: f64,
    label: String,
}

impl CutoffFunction {
    /// Cubic smoothstep on `1 <= |s| <= 2`: `1 - (3t^2 - 2t^3)` with
    /// `t = |s| - 1`. Peak slope is 1.5.
    pub fn smoothstep() -> Self {
        Self {
            evaluator: Arc::new(smoothstep),
            derivative_bound: 1.5,
            label: "smoothstep".to_string(),
        }
    }

    /// A caller-supplied cutoff. The caller vouches for the shape constraints
    /// and for `sup |chi'| <= derivative_bound`.
    pub fn custom<F>(label: impl Into<String>, derivative_bound: f64, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            evaluator: Arc::new(f),
            derivative_bound,
            label: label.into(),
        }
    }

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        (self.evaluator)(s)
    }

    pub fn derivative_bound(&self) -> f64 {
        self.derivative_bound
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl Default for CutoffFunction {
    fn default() -> Self {
        Self::smoothstep()
    }
}

impl fmt::Debug for CutoffFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CutoffFunction")
            .field("label", &self.label)
            .field("derivative_bound", &self.derivative_bound)
            .finish()
    }
}

fn smoothstep(s: f64) -> f64 {
    let s = s.abs();
    if s <= 1.0 {
        1.0
    } else if s >= 2.0 {
        0.0
    } else {
        let t = s - 1.0;
        1.0 - t * t * (3.0 - 2.0 * t)
    }
}

/// Splits `a_l(j)` into the part near `n` and the far remainder:
/// `(a_l(j) chi((j - n)/tau_n), a_l(j) - a_l(j) chi((j - n)/tau_n))`.
///
/// The far part is exactly zero for `|j - n| <= tau_n` and the near part is
/// exactly zero for `|j - n| >= 2 tau_n`.
pub fn cutoff_weights(
    model: &BandModel,
    chi: &CutoffFunction,
    tau: &TauPolicy,
    n: usize,
    l: usize,
    j: usize,
) -> Result<(f64, f64)> {
    let tau_n = tau.value(n)?;
    Ok(split_entry(model.a(l, j as i64), chi, n, tau_n, j))
}

#[inline]
pub(crate) fn split_entry(value: f64, chi: &CutoffFunction, n: usize, tau_n: usize, j: usize) -> (f64, f64) {
    let s = (j as f64 - n as f64) / tau_n as f64;
    let near = value * chi.eval(s);
    (near, value - near)
}
