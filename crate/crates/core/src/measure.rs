use std::fmt;

/// A scalar measured over a restricted region of the grid, or the sentinel
/// reported when the region is empty. The sentinel reads as `+∞`, the
/// value of an infimum over an empty set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measured {
    Value(f64),
    Empty,
}

impl Measured {
    pub fn value(self) -> Option<f64> {
        match self {
            Measured::Value(v) => Some(v),
            Measured::Empty => None,
        }
    }

    /// The value, with `+∞` standing in for an empty region.
    pub fn or_infinity(self) -> f64 {
        self.value().unwrap_or(f64::INFINITY)
    }

    pub fn is_empty(self) -> bool {
        matches!(self, Measured::Empty)
    }

    pub(crate) fn from_fold(v: f64, any: bool) -> Self {
        if any {
            Measured::Value(v)
        } else {
            Measured::Empty
        }
    }
}

impl fmt::Display for Measured {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Measured::Value(v) => write!(f, "{v:e}"),
            Measured::Empty => f.write_str("inf"),
        }
    }
}

/// `dist ≥ delta`, with a relative allowance of 1e-12 so that grid points
/// lying exactly at distance `delta` are not lost to rounding.
#[inline]
pub fn at_least(dist: f64, delta: f64) -> bool {
    dist >= delta * (1.0 - 1e-12)
}
