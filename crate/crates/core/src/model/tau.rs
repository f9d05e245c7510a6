use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Window half-width policy `n -> tau_n`.
///
/// Admissible policies are nondecreasing, unbounded, and keep `n - 2 tau_n`
/// growing. Only finite windows can be checked; see [`TauPolicy::check_window`].
#[derive(Clone)]
pub enum TauPolicy {
    /// `tau_n = floor(n / 4)`.
    Quarter,
    /// `tau_n = floor(epsilon0 * n^(1 - theta))`.
    Stretched { epsilon0: f64, theta: f64 },
    Custom {
        label: String,
        f: Arc<dyn Fn(usize) -> usize + Send + Sync>,
    },
}

impl TauPolicy {
    pub fn custom<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(usize) -> usize + Send + Sync + 'static,
    {
        TauPolicy::Custom {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn label(&self) -> String {
        match self {
            TauPolicy::Quarter => "quarter".to_string(),
            TauPolicy::Stretched { epsilon0, theta } => {
                format!("stretched(epsilon0={epsilon0}, theta={theta})")
            }
            TauPolicy::Custom { label, .. } => label.clone(),
        }
    }

    /// `tau_n`, or an error when the policy yields zero at this `n`.
    pub fn value(&self, n: usize) -> Result<usize> {
        if n == 0 {
            return Err(Error::TauPolicy {
                n,
                msg: "indices start at 1".into(),
            });
        }
        let t = match self {
            TauPolicy::Quarter => n / 4,
            TauPolicy::Stretched { epsilon0, theta } => {
                let x = epsilon0 * (n as f64).powf(1.0 - theta);
                // powf is not exact: 100^0.5 may land just below 10
                let r = x.round();
                if (x - r).abs() <= 1e-9 * r.max(1.0) {
                    r as usize
                } else {
                    x.floor() as usize
                }
            }
            TauPolicy::Custom { f, .. } => f(n),
        };
        if t < 1 {
            return Err(Error::TauPolicy {
                n,
                msg: format!("{} gives tau_n = 0", self.label()),
            });
        }
        Ok(t)
    }

    /// Checks the admissibility conditions on `lo..=hi`: `tau_n >= 1`,
    /// `tau_n <= tau_{n+1}`, `n - 2 tau_n >= 1`, and
    /// `n - 2 tau_n < (n + 1) - 2 tau_{n+1} + 2`. Any violation is an error.
    pub fn check_window(&self, lo: usize, hi: usize) -> Result<()> {
        let mut prev: Option<(usize, usize)> = None;
        for n in lo..=hi {
            let t = self.value(n)?;
            if n < 2 * t + 1 {
                return Err(Error::TauPolicy {
                    n,
                    msg: format!("n - 2 tau_n = {} - {} < 1", n, 2 * t),
                });
            }
            if let Some((pn, pt)) = prev {
                if t < pt {
                    return Err(Error::TauPolicy {
                        n,
                        msg: format!("tau decreases: tau_{pn} = {pt} > tau_{n} = {t}"),
                    });
                }
                let before = pn as i64 - 2 * pt as i64;
                let after = n as i64 - 2 * t as i64;
                if before >= after + 2 {
                    return Err(Error::TauPolicy {
                        n,
                        msg: format!("n - 2 tau_n drops from {before} to {after}"),
                    });
                }
            }
            prev = Some((n, t));
        }
        Ok(())
    }
}

impl fmt::Debug for TauPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TauPolicy({})", self.label())
    }
}
