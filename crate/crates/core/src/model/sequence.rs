use std::fmt;
use std::sync::Arc;

type Evaluator = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

/// A real sequence on the positive integers, zero-extended to `j <= 0`.
///
/// Indices are 1-based. The evaluator is only ever called with `j >= 1`;
/// evaluation at `j <= 0` returns exactly `0.0` without touching it.
#[derive(Clone)]
pub struct EntrySequence {
    evaluator: Evaluator,
    label: String,
}

impl EntrySequence {
    pub fn new<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(usize) -> f64 + Send + Sync + 'static,
    {
        Self {
            evaluator: Arc::new(f),
            label: label.into(),
        }
    }

    pub fn zero() -> Self {
        Self::new("0", |_| 0.0)
    }

    pub fn constant(value: f64) -> Self {
        Self::new(format!("{value}"), move |_| value)
    }

    /// `coefficient * j^exponent`.
    pub fn power(coefficient: f64, exponent: f64) -> Self {
        Self::new(format!("{coefficient}*j^{exponent}"), move |j| {
            if coefficient == 0.0 {
                0.0
            } else {
                coefficient * (j as f64).powf(exponent)
            }
        })
    }

    /// Values `values[0], values[1], ...` at `j = 1, 2, ...`; NaN past the end,
    /// so that truncating beyond the table is reported as a non-finite entry.
    pub fn from_table(label: impl Into<String>, values: Vec<f64>) -> Self {
        let values: Arc<[f64]> = values.into();
        Self::new(label, move |j| values.get(j - 1).copied().unwrap_or(f64::NAN))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn eval(&self, j: i64) -> f64 {
        if j <= 0 {
            0.0
        } else {
            (self.evaluator)(j as usize)
        }
    }

    /// `x(n+1) - x(n)`.
    #[inline]
    pub fn forward_difference(&self, n: i64) -> f64 {
        self.eval(n + 1) - self.eval(n)
    }

    /// `x(n+2) - 2 x(n+1) + x(n)`.
    #[inline]
    pub fn second_difference(&self, n: i64) -> f64 {
        self.eval(n + 2) - 2.0 * self.eval(n + 1) + self.eval(n)
    }

    /// Pointwise sum with another sequence.
    pub fn plus(&self, other: &EntrySequence) -> Self {
        let (a, b) = (self.clone(), other.clone());
        let label = format!("{} + {}", a.label, b.label);
        Self::new(label, move |j| a.eval(j as i64) + b.eval(j as i64))
    }

    /// Pointwise product with a constant.
    pub fn scaled(&self, factor: f64) -> Self {
        let a = self.clone();
        let label = format!("{factor}*({})", a.label);
        Self::new(label, move |j| factor * a.eval(j as i64))
    }
}

impl fmt::Debug for EntrySequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EntrySequence")
            .field("label", &self.label)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_extension() {
        let x = EntrySequence::new("j+1", |j| j as f64 + 1.0);
        assert_eq!(x.eval(0), 0.0);
        assert_eq!(x.eval(-7), 0.0);
        assert_eq!(x.eval(1), 2.0);
    }

    #[test]
    fn forward_difference_examples() {
        assert_eq!(EntrySequence::constant(7.0).forward_difference(5), 0.0);
        let sq = EntrySequence::new("j^2", |j| (j * j) as f64);
        assert_eq!(sq.forward_difference(5), 11.0);
        let lin = EntrySequence::new("j", |j| j as f64);
        assert_eq!(lin.forward_difference(1), 1.0);
    }

    #[test]
    fn second_difference_examples() {
        let lin = EntrySequence::new("j", |j| j as f64);
        assert_eq!(lin.second_difference(4), 0.0);
        let sq = EntrySequence::new("j^2", |j| (j * j) as f64);
        assert_eq!(sq.second_difference(3), 2.0);
        assert_eq!(EntrySequence::constant(-2.5).second_difference(9), 0.0);
    }

    #[test]
    fn repeated_evaluation_is_bit_identical() {
        let x = EntrySequence::power(1.3, 0.37);
        for j in 1..200 {
            assert_eq!(x.eval(j).to_bits(), x.eval(j).to_bits());
        }
    }

    #[test]
    fn table_is_nan_past_end() {
        let t = EntrySequence::from_table("t", vec![1.0, 4.0]);
        assert_eq!(t.eval(2), 4.0);
        assert!(t.eval(3).is_nan());
        assert_eq!(t.eval(0), 0.0);
    }
}
