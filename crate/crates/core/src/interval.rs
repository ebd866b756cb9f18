use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real interval, possibly unbounded, with independent endpoint closure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub lower_closed: bool,
    pub upper_closed: bool,
}

impl Interval {
    pub fn new(lower: f64, upper: f64, lower_closed: bool, upper_closed: bool) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || lower >= upper {
            return Err(Error::InvalidInterval(format!(
                "need lower < upper, got [{lower}, {upper}]"
            )));
        }
        // Infinite endpoints are never attained.
        Ok(Self {
            lower,
            upper,
            lower_closed: lower_closed && lower.is_finite(),
            upper_closed: upper_closed && upper.is_finite(),
        })
    }

    pub fn closed(lower: f64, upper: f64) -> Result<Self> {
        Self::new(lower, upper, true, true)
    }

    pub fn open(lower: f64, upper: f64) -> Result<Self> {
        Self::new(lower, upper, false, false)
    }

    pub fn real_line() -> Self {
        Self {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
            lower_closed: false,
            upper_closed: false,
        }
    }

    /// `(0, ∞)`
    pub fn positive() -> Self {
        Self {
            lower: 0.0,
            upper: f64::INFINITY,
            lower_closed: false,
            upper_closed: false,
        }
    }

    /// `(-1, 1)`, the domain of Bendat-Sherman representations.
    pub fn unit_open() -> Self {
        Self {
            lower: -1.0,
            upper: 1.0,
            lower_closed: false,
            upper_closed: false,
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.lower.is_finite() && self.upper.is_finite()
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, t: f64) -> bool {
        self.contains_with_slack(t, 0.0)
    }

    /// Membership where closed endpoints are widened by `slack`. Open
    /// endpoints stay strict.
    pub fn contains_with_slack(&self, t: f64, slack: f64) -> bool {
        if !t.is_finite() {
            return false;
        }
        let above = if self.lower_closed {
            t >= self.lower - slack
        } else {
            t > self.lower
        };
        let below = if self.upper_closed {
            t <= self.upper + slack
        } else {
            t < self.upper
        };
        above && below
    }

    /// Moves `t` onto the closed hull of the interval.
    pub fn clamp(&self, t: f64) -> f64 {
        t.max(self.lower).min(self.upper)
    }

    /// Closest point of a slightly shrunk copy of the interval, so that open
    /// endpoints are never hit.
    pub fn clamp_inside(&self, t: f64) -> f64 {
        let margin = if self.is_bounded() {
            1e-9 * self.width()
        } else {
            1e-9 * (1.0 + t.abs())
        };
        let lo = if self.lower_closed {
            self.lower
        } else {
            self.lower + margin.max(self.lower.abs() * f64::EPSILON * 4.0)
        };
        let hi = if self.upper_closed {
            self.upper
        } else {
            self.upper - margin.max(self.upper.abs() * f64::EPSILON * 4.0)
        };
        t.max(lo).min(hi)
    }

    /// Smallest closed interval containing every value, if any.
    pub fn hull(values: impl IntoIterator<Item = f64>) -> Option<(f64, f64)> {
        values.into_iter().fold(None, |acc, v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.lower_closed { '[' } else { '(' };
        let r = if self.upper_closed { ']' } else { ')' };
        write!(f, "{l}{}, {}{r}", self.lower, self.upper)
    }
}
