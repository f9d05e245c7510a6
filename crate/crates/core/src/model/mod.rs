//! Band-matrix models `A = D + A'`, entry families, the cutoff function and
//! the window-width policies used by the conjugation machinery.
//!
//! All indices are 1-based. Sequences are zero-extended to non-positive
//! indices, so `a_l(j - l) = 0` whenever `j <= l`.

mod cutoff;
mod families;
mod sequence;
mod tau;

pub use cutoff::{cutoff_weights, CutoffFunction};
pub(crate) use cutoff::split_entry;
pub use families::{
    make_power_like, make_special_family, LowerOrderTerm, PowerLikeParams, SpecialFamilyKind,
    SpecialFamilyParams,
};
pub use sequence::EntrySequence;
pub use tau::TauPolicy;

use crate::error::{Error, Result};

/// Infinite symmetric band matrix with diagonal `d` and off-diagonals
/// `a_1, ..., a_m`: entry `(j + l, j)` equals `a_l(j)`.
#[derive(Clone, Debug)]
pub struct BandModel {
    d: EntrySequence,
    a: Vec<EntrySequence>,
    label: String,
}

impl BandModel {
    pub fn new(d: EntrySequence, a: Vec<EntrySequence>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::invalid(
                "BandModel::new",
                "bandwidth m must be at least 1",
            ));
        }
        let label = format!("d = {}", d.label());
        Ok(Self { d, a, label })
    }

    /// Diagonal-only model, stored with bandwidth 1 and a zero off-diagonal.
    pub fn diagonal_only(d: EntrySequence) -> Self {
        Self::new(d, vec![EntrySequence::zero()]).expect("m = 1")
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Bandwidth `m`.
    pub fn m(&self) -> usize {
        self.a.len()
    }

    #[inline]
    pub fn d(&self, j: i64) -> f64 {
        self.d.eval(j)
    }

    /// `a_l(j)` for `1 <= l <= m`; zero for `j <= 0`.
    #[inline]
    pub fn a(&self, l: usize, j: i64) -> f64 {
        self.a[l - 1].eval(j)
    }

    pub fn diagonal(&self) -> &EntrySequence {
        &self.d
    }

    pub fn off_diagonal(&self, l: usize) -> &EntrySequence {
        &self.a[l - 1]
    }

    pub fn off_diagonals(&self) -> &[EntrySequence] {
        &self.a
    }

    /// True when every off-diagonal vanishes on `1..=upto`.
    pub fn is_diagonal_on(&self, upto: usize) -> bool {
        (1..=self.m()).all(|l| (1..=upto as i64).all(|j| self.a(l, j) == 0.0))
    }

    /// First `j` in `[lo, hi)` with `d(j) >= d(j + 1)`, if any.
    ///
    /// Diagnostic for the growth assumption on `d`; a finite window can only
    /// refute it, never prove it.
    pub fn first_non_increase(&self, lo: usize, hi: usize) -> Option<usize> {
        (lo..hi).find(|&j| self.d(j as i64) >= self.d(j as i64 + 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_bandwidth() {
        assert!(BandModel::new(EntrySequence::zero(), vec![]).is_err());
    }

    #[test]
    fn zero_extension_through_model() {
        let model = BandModel::new(
            EntrySequence::power(1.0, 2.0),
            vec![EntrySequence::power(1.0, 0.5), EntrySequence::constant(3.0)],
        )
        .unwrap();
        for j in -5..=0 {
            assert_eq!(model.d(j), 0.0);
            assert_eq!(model.a(1, j), 0.0);
            assert_eq!(model.a(2, j), 0.0);
        }
        assert_eq!(model.m(), 2);
        assert_eq!(model.a(2, 4), 3.0);
    }

    #[test]
    fn growth_diagnostic() {
        let model = BandModel::diagonal_only(EntrySequence::from_table(
            "d",
            vec![5.0, 1.0, 2.0, 3.0],
        ));
        assert_eq!(model.first_non_increase(1, 4), Some(1));
        assert_eq!(model.first_non_increase(2, 4), None);
    }
}
