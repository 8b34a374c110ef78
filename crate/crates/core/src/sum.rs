//! Compensated (Kahan-Babuska-Neumaier) summation.
//!
//! Every reduction in this crate that feeds a reported number goes through
//! [`NeumaierSum`] in a fixed order, so results are reproducible bit for bit.

use std::ops::{Add, AddAssign};

#[derive(Debug, Default, Clone, Copy, PartialEq)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub const fn new() -> Self {
        Self {
            sum: 0.0,
            compensation: 0.0,
        }
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl AddAssign<f64> for NeumaierSum {
    #[inline]
    fn add_assign(&mut self, rhs: f64) {
        let t = self.sum + rhs;
        if self.sum.abs() >= rhs.abs() {
            self.compensation += (self.sum - t) + rhs;
        } else {
            self.compensation += (rhs - t) + self.sum;
        }
        self.sum = t;
    }
}

impl Add<f64> for NeumaierSum {
    type Output = Self;

    fn add(mut self, rhs: f64) -> Self {
        self += rhs;
        self
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for x in iter {
            acc += x;
        }
        acc
    }
}

/// Compensated sum of an iterator, in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<NeumaierSum>().value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancellation_is_recovered() {
        let s = NeumaierSum::new() + 1e200 + 0.1 + 0.2 + 0.3 + (-1e200);
        assert!((s.value() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn many_small_terms() {
        let naive: f64 = std::iter::repeat_n(0.1, 1_000_000).sum();
        let comp = compensated_sum(std::iter::repeat_n(0.1, 1_000_000));
        assert!((comp - 100_000.0).abs() < 1e-9);
        assert!((naive - 100_000.0).abs() > (comp - 100_000.0).abs());
    }
}
