//! Summation helpers.
//!
//! Bulk state updates use plain left-to-right accumulation; norms and energies
//! go through Kahan compensation because several verification tolerances sit
//! at 1e-10 on sums with 1e4..1e5 terms.

use crate::scalar::Real;

/// Kahan-compensated running sum.
#[derive(Debug, Clone, Copy)]
pub struct Kahan<T> {
    sum: T,
    carry: T,
}

impl<T: Real> Default for Kahan<T> {
    fn default() -> Self {
        Self {
            sum: T::zero(),
            carry: T::zero(),
        }
    }
}

impl<T: Real> Kahan<T> {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum
    }
}

/// Compensated sum of an iterator.
pub fn kahan_sum<T: Real>(values: impl IntoIterator<Item = T>) -> T {
    let mut acc = Kahan::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Compensated sum of squares.
pub fn sum_of_squares<T: Real>(values: impl IntoIterator<Item = T>) -> T {
    kahan_sum(values.into_iter().map(|v| v * v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_cancellation_losses() {
        // 1 + 2^-60 added 2^20 times: plain f64 accumulation loses the small
        // contributions entirely once the running sum reaches 2^20.
        let tiny = (2.0_f64).powi(-60);
        let n = 1 << 20;
        let values = std::iter::repeat(1.0 + tiny).take(n);
        let exact = n as f64 * (1.0 + tiny);
        let compensated = kahan_sum(values);
        assert!((compensated - exact).abs() <= 1e-12 * exact);
    }

    #[test]
    fn sum_of_squares_matches_direct_for_small_inputs() {
        let v = [1.0_f64, -2.0, 3.0];
        assert_eq!(sum_of_squares(v.iter().copied()), 14.0);
    }
}
