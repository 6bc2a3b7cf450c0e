//! Path weights in the natural-log-probability domain.
//!
//! A [`Weight`] holds `ln p`: `0.0` is probability one and `-inf` is
//! probability zero. The same value is combined under two semirings:
//!
//! * [`LogSemiring`]: `plus` is `ln(e^a + e^b)`, used for total path mass.
//! * [`TropicalSemiring`]: `plus` is `max(a, b)`, used for best paths.
//!
//! Both share `times(a, b) = a + b`, `zero = -inf` and `one = 0`.

use std::fmt;

/// A natural-log probability. Higher is more likely.
#[derive(Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Weight(pub f64);

impl Weight {
    pub const ZERO: Weight = Weight(f64::NEG_INFINITY);
    pub const ONE: Weight = Weight(0.0);

    pub fn new(value: f64) -> Self {
        Weight(value)
    }

    /// Weight of probability `p` (`p = 0` maps to [`Weight::ZERO`]).
    pub fn from_prob(p: f64) -> Self {
        Weight(p.ln())
    }

    /// Weight of a cost in the conventional `-ln p` domain.
    pub fn from_cost(cost: f64) -> Self {
        Weight(-cost)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn cost(self) -> f64 {
        -self.0
    }

    pub fn prob(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    pub fn is_one(self) -> bool {
        self.0 == 0.0
    }

    pub fn times(self, rhs: Weight) -> Weight {
        // -inf + (+inf) would be NaN; zero annihilates.
        if self.is_zero() || rhs.is_zero() {
            Weight::ZERO
        } else {
            Weight(self.0 + rhs.0)
        }
    }

    pub fn log_plus(self, rhs: Weight) -> Weight {
        LogSemiring::plus(self, rhs)
    }

    pub fn max_plus(self, rhs: Weight) -> Weight {
        TropicalSemiring::plus(self, rhs)
    }

    /// `true` when both are zero, or both finite and within `tol` of each other.
    pub fn approx_eq(self, other: Weight, tol: f64) -> bool {
        if self.0 == other.0 {
            return true;
        }
        if !self.0.is_finite() || !other.0.is_finite() {
            return false;
        }
        (self.0 - other.0).abs() <= tol
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Weight({})", self.0)
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl From<f64> for Weight {
    fn from(value: f64) -> Self {
        Weight(value)
    }
}

/// Operations shared by the log and tropical semirings over [`Weight`].
pub trait Semiring {
    fn plus(a: Weight, b: Weight) -> Weight;

    fn times(a: Weight, b: Weight) -> Weight {
        a.times(b)
    }

    fn zero() -> Weight {
        Weight::ZERO
    }

    fn one() -> Weight {
        Weight::ONE
    }

    fn sum<I: IntoIterator<Item = Weight>>(items: I) -> Weight {
        items.into_iter().fold(Self::zero(), Self::plus)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LogSemiring;

#[derive(Debug, Clone, Copy)]
pub struct TropicalSemiring;

impl Semiring for LogSemiring {
    fn plus(a: Weight, b: Weight) -> Weight {
        let (hi, lo) = if a.0 >= b.0 { (a.0, b.0) } else { (b.0, a.0) };
        if lo == f64::NEG_INFINITY {
            return Weight(hi);
        }
        if hi == f64::INFINITY {
            return Weight(hi);
        }
        Weight(hi + (lo - hi).exp().ln_1p())
    }
}

impl Semiring for TropicalSemiring {
    fn plus(a: Weight, b: Weight) -> Weight {
        if a.0 >= b.0 {
            a
        } else {
            b
        }
    }
}

/// Stable `ln(sum(exp(x)))` over a slice; `-inf` for an empty slice.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}
