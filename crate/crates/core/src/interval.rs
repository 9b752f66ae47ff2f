//! Intervals of the real line with open/closed endpoint flags.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum IntervalError {
    #[error("interval endpoints must satisfy lo < hi (got {lo} .. {hi})")]
    EmptyOrReversed { lo: f64, hi: f64 },
    #[error("an infinite endpoint cannot be closed")]
    ClosedInfiniteEndpoint,
    #[error("endpoint is NaN")]
    NanEndpoint,
}

/// An interval with extended-real endpoints. Infinite endpoints are always
/// open.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Result<Self, IntervalError> {
        if lo.is_nan() || hi.is_nan() {
            return Err(IntervalError::NanEndpoint);
        }
        if lo >= hi {
            return Err(IntervalError::EmptyOrReversed { lo, hi });
        }
        if (lo.is_infinite() && lo_closed) || (hi.is_infinite() && hi_closed) {
            return Err(IntervalError::ClosedInfiniteEndpoint);
        }
        Ok(Interval {
            lo,
            hi,
            lo_closed,
            hi_closed,
        })
    }

    /// `[lo, hi]`
    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval::new(lo, hi, true, true).expect("invalid closed interval")
    }

    /// `(lo, hi)`
    pub fn open(lo: f64, hi: f64) -> Self {
        Interval::new(lo, hi, false, false).expect("invalid open interval")
    }

    /// `[lo, hi)`
    pub fn half_open_right(lo: f64, hi: f64) -> Self {
        Interval::new(lo, hi, true, false).expect("invalid interval")
    }

    /// `(lo, hi]`
    pub fn half_open_left(lo: f64, hi: f64) -> Self {
        Interval::new(lo, hi, false, true).expect("invalid interval")
    }

    /// The whole real line.
    pub fn real_line() -> Self {
        Interval::open(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, t: f64) -> bool {
        let lo_ok = if self.lo_closed { t >= self.lo } else { t > self.lo };
        let hi_ok = if self.hi_closed { t <= self.hi } else { t < self.hi };
        lo_ok && hi_ok
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        let lo_ok = other.lo > self.lo
            || (other.lo == self.lo && (self.lo_closed || !other.lo_closed));
        let hi_ok = other.hi < self.hi
            || (other.hi == self.hi && (self.hi_closed || !other.hi_closed));
        lo_ok && hi_ok
    }

    /// Closed or not-closed classification used by the disconjugacy decision:
    /// the open, half-open and left/right-half-open cases all share the
    /// strict-interior zero rule.
    pub fn is_fully_closed(&self) -> bool {
        self.lo_closed && self.hi_closed
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let l = if self.lo_closed { '[' } else { '(' };
        let r = if self.hi_closed { ']' } else { ')' };
        write!(f, "{}{}, {}{}", l, self.lo, self.hi, r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_reversed() {
        assert!(Interval::new(1.0, 1.0, true, true).is_err());
        assert!(Interval::new(2.0, 1.0, true, true).is_err());
    }

    #[test]
    fn rejects_closed_infinite() {
        assert!(Interval::new(f64::NEG_INFINITY, 0.0, true, true).is_err());
        assert!(Interval::new(f64::NEG_INFINITY, 0.0, false, true).is_ok());
    }

    #[test]
    fn containment() {
        let iv = Interval::half_open_right(0.0, 1.0);
        assert!(iv.contains(0.0));
        assert!(!iv.contains(1.0));
        assert!(Interval::closed(0.0, 1.0).contains_interval(&iv));
        assert!(!iv.contains_interval(&Interval::closed(0.0, 1.0)));
    }
}
