use super::{BandModel, EntrySequence};
use crate::error::{Error, Result};

/// Lower-order perturbation added on top of a base family, with the decay
/// exponent the caller claims for it (`|x(n)| = O(n^decay_exponent)`).
#[derive(Clone, Debug)]
pub struct LowerOrderTerm {
    pub sequence: EntrySequence,
    pub decay_exponent: f64,
}

/// Power-like entries:
/// `d(n) = c0 n^delta0 + c n^(delta0 - 1)` and `a_l(n) = c_l n^delta_l`,
/// each optionally perturbed by lower-order terms.
#[derive(Clone, Debug)]
pub struct PowerLikeParams {
    pub c0: f64,
    pub delta0: f64,
    pub c: f64,
    /// `(c_l, delta_l)` for `l = 1..=m`.
    pub off_diagonal: Vec<(f64, f64)>,
    /// Common growth bound, `delta >= max_l delta_l`.
    pub delta: f64,
    /// Must decay at least like `n^(delta0 - 2)`.
    pub diagonal_perturbation: Option<LowerOrderTerm>,
    /// One slot per band; each must decay at least like `n^(delta - 1)`.
    pub off_diagonal_perturbations: Vec<Option<LowerOrderTerm>>,
}

impl PowerLikeParams {
    /// Unperturbed parameters with `delta = max_l delta_l`.
    pub fn new(c0: f64, delta0: f64, c: f64, off_diagonal: Vec<(f64, f64)>) -> Self {
        let delta = off_diagonal
            .iter()
            .map(|&(_, e)| e)
            .fold(f64::NEG_INFINITY, f64::max);
        let m = off_diagonal.len();
        Self {
            c0,
            delta0,
            c,
            off_diagonal,
            delta,
            diagonal_perturbation: None,
            off_diagonal_perturbations: vec![None; m],
        }
    }

    pub fn m(&self) -> usize {
        self.off_diagonal.len()
    }

    /// `kappa = delta0 - delta`; must be positive for the rate theorem.
    pub fn kappa(&self) -> f64 {
        self.delta0 - self.delta
    }

    pub fn validate(&self) -> Result<()> {
        const OP: &str = "make_power_like";
        if !(self.c0 > 0.0) {
            return Err(Error::invalid(OP, format!("c0 = {} must be > 0", self.c0)));
        }
        if !(self.delta0 > 0.0) {
            return Err(Error::invalid(
                OP,
                format!("delta0 = {} must be > 0", self.delta0),
            ));
        }
        if self.off_diagonal.is_empty() {
            return Err(Error::invalid(OP, "at least one off-diagonal band required"));
        }
        for (l, &(cl, dl)) in self.off_diagonal.iter().enumerate() {
            if !cl.is_finite() || !dl.is_finite() {
                return Err(Error::invalid(OP, format!("band {} has non-finite parameters", l + 1)));
            }
            if dl > self.delta {
                return Err(Error::invalid(
                    OP,
                    format!("delta = {} < delta_{} = {}", self.delta, l + 1, dl),
                ));
            }
        }
        if self.off_diagonal_perturbations.len() != self.m() {
            return Err(Error::invalid(
                OP,
                "one perturbation slot per off-diagonal band required",
            ));
        }
        if let Some(p) = &self.diagonal_perturbation {
            if p.decay_exponent > self.delta0 - 2.0 {
                return Err(Error::invalid(
                    OP,
                    format!(
                        "diagonal perturbation decays like n^{}, slower than n^{}",
                        p.decay_exponent,
                        self.delta0 - 2.0
                    ),
                ));
            }
        }
        for (l, p) in self.off_diagonal_perturbations.iter().enumerate() {
            if let Some(p) = p {
                if p.decay_exponent > self.delta - 1.0 {
                    return Err(Error::invalid(
                        OP,
                        format!(
                            "band {} perturbation decays like n^{}, slower than n^{}",
                            l + 1,
                            p.decay_exponent,
                            self.delta - 1.0
                        ),
                    ));
                }
            }
        }
        Ok(())
    }
}

pub fn make_power_like(params: &PowerLikeParams) -> Result<BandModel> {
    params.validate()?;
    let (c0, delta0, c) = (params.c0, params.delta0, params.c);
    let mut d = EntrySequence::new(format!("{c0}*n^{delta0} + {c}*n^{}", delta0 - 1.0), move |n| {
        let x = n as f64;
        let lead = c0 * x.powf(delta0);
        if c == 0.0 {
            lead
        } else {
            lead + c * x.powf(delta0 - 1.0)
        }
    });
    if let Some(p) = &params.diagonal_perturbation {
        d = d.plus(&p.sequence);
    }
    let a = params
        .off_diagonal
        .iter()
        .zip(&params.off_diagonal_perturbations)
        .map(|(&(cl, dl), pert)| {
            let base = EntrySequence::power(cl, dl);
            match pert {
                Some(p) => base.plus(&p.sequence),
                None => base,
            }
        })
        .collect();
    Ok(BandModel::new(d, a)?.with_label(format!(
        "power_like(c0={c0}, delta0={delta0}, c={c}, bands={:?})",
        params.off_diagonal
    )))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpecialFamilyKind {
    /// `omega(x) = c0 x^delta0 (ln x)^delta0'`
    LogPower,
    /// `omega(x) = c0 (ln x)^delta0'`
    PureLog,
    /// `omega(x) = c0 x^delta0 exp(c x^theta)`
    StretchedExp,
}

impl SpecialFamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            SpecialFamilyKind::LogPower => "log_power",
            SpecialFamilyKind::PureLog => "pure_log",
            SpecialFamilyKind::StretchedExp => "stretched_exp",
        }
    }
}

/// Diagonal families whose growth is not a pure power. Off-diagonals are
/// supplied separately, subject to the family's smallness conditions.
#[derive(Clone, Debug, PartialEq)]
pub struct SpecialFamilyParams {
    pub kind: SpecialFamilyKind,
    pub c0: f64,
    pub delta0: f64,
    pub delta0_prime: f64,
    pub c: f64,
    pub kappa: f64,
    pub kappa_prime: f64,
    /// Stretched-exponential only, in `(0, 1)`.
    pub theta: f64,
    /// Stretched-exponential window scaling `tau_n = floor(epsilon0 n^(1 - theta))`.
    pub epsilon0: f64,
}

impl SpecialFamilyParams {
    pub fn validate(&self) -> Result<()> {
        const OP: &str = "make_special_family";
        if !(self.c0 > 0.0) {
            return Err(Error::invalid(OP, format!("c0 = {} must be > 0", self.c0)));
        }
        match self.kind {
            SpecialFamilyKind::LogPower if !(self.delta0 > 0.0) => Err(Error::invalid(
                OP,
                format!("log_power needs delta0 > 0, got {}", self.delta0),
            )),
            SpecialFamilyKind::PureLog if !(self.delta0_prime > 0.0) => Err(Error::invalid(
                OP,
                format!("pure_log needs delta0' > 0, got {}", self.delta0_prime),
            )),
            SpecialFamilyKind::StretchedExp if !(self.c > 0.0) => Err(Error::invalid(
                OP,
                format!("stretched_exp needs c > 0, got {}", self.c),
            )),
            SpecialFamilyKind::StretchedExp if !(self.theta > 0.0 && self.theta < 1.0) => {
                Err(Error::invalid(
                    OP,
                    format!("stretched_exp needs 0 < theta < 1, got {}", self.theta),
                ))
            }
            SpecialFamilyKind::StretchedExp if !(self.epsilon0 > 0.0) => Err(Error::invalid(
                OP,
                format!("stretched_exp needs epsilon0 > 0, got {}", self.epsilon0),
            )),
            _ => Ok(()),
        }
    }

    /// The growth profile `omega(x)`.
    pub fn omega(&self, x: f64) -> f64 {
        match self.kind {
            SpecialFamilyKind::LogPower => {
                let p = self.c0 * x.powf(self.delta0);
                if self.delta0_prime == 0.0 {
                    p
                } else {
                    p * x.ln().powf(self.delta0_prime)
                }
            }
            SpecialFamilyKind::PureLog => self.c0 * x.ln().powf(self.delta0_prime),
            SpecialFamilyKind::StretchedExp => {
                self.c0 * x.powf(self.delta0) * (self.c * x.powf(self.theta)).exp()
            }
        }
    }

    /// Off-diagonal at the edge of the family's smallness condition:
    /// `scale * n^-kappa (ln n)^-kappa' omega(n)` for the logarithmic kinds,
    /// `scale * n^-kappa omega(n)` for the stretched exponential.
    ///
    /// The logarithmic kinds vanish at `n = 1`, where `ln n = 0`.
    pub fn scaled_off_diagonal(&self, scale: f64) -> EntrySequence {
        let p = self.clone();
        let label = format!("{scale}*edge({})", self.kind.name());
        EntrySequence::new(label, move |n| {
            let x = n as f64;
            let w = p.omega(x) * x.powf(-p.kappa);
            match p.kind {
                SpecialFamilyKind::StretchedExp => scale * w,
                _ if n == 1 => 0.0,
                _ => scale * w * x.ln().powf(-p.kappa_prime),
            }
        })
    }

    /// Largest `n <= cap` with `omega(n) <= limit`, scanning upward.
    pub fn overflow_limit(&self, limit: f64, cap: usize) -> usize {
        let mut last = 0;
        for n in 1..=cap {
            let w = self.omega(n as f64);
            if !w.is_finite() || w > limit {
                break;
            }
            last = n;
        }
        last
    }
}

pub fn make_special_family(
    params: &SpecialFamilyParams,
    off_diagonals: Vec<EntrySequence>,
) -> Result<BandModel> {
    params.validate()?;
    let p = params.clone();
    let d = EntrySequence::new(format!("omega_{}", p.kind.name()), move |n| {
        p.omega(n as f64)
    });
    Ok(BandModel::new(d, off_diagonals)?.with_label(format!(
        "{}(c0={}, delta0={}, delta0'={}, c={}, theta={})",
        params.kind.name(),
        params.c0,
        params.delta0,
        params.delta0_prime,
        params.c,
        params.theta
    )))
}
