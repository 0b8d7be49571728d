//! Graded degrees.
//!
//! Two flavours are used throughout the reasoner: [`Unit`] degrees in `[0, 1]`
//! (belief certainty, emotion intensity) and [`Signed`] degrees in `[-1, 1]`
//! (attitudes, liking, dominance). Values are quantized to twelve decimals on
//! construction so that degrees produced by arithmetic compare and print the
//! same way on every platform.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use thiserror::Error;

/// Tolerance used for every degree comparison.
pub const EPS: f64 = 1e-9;

const QUANTUM: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DegreeError {
    #[error("degree {value} out of range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("degree is not a finite number")]
    NotFinite,
}

pub(crate) fn quantize(x: f64) -> f64 {
    let q = (x * QUANTUM).round() / QUANTUM;
    if q == 0.0 {
        0.0
    } else {
        q
    }
}

fn checked(value: f64, lo: f64, hi: f64) -> Result<f64, DegreeError> {
    if !value.is_finite() {
        return Err(DegreeError::NotFinite);
    }
    if value < lo - EPS || value > hi + EPS {
        return Err(DegreeError::OutOfRange { value, lo, hi });
    }
    Ok(quantize(value.clamp(lo, hi)))
}

/// `a > b` beyond tolerance. All threshold guards are strict.
pub fn gt(a: f64, b: f64) -> bool {
    a > b + EPS
}

/// `a < b` beyond tolerance.
pub fn lt(a: f64, b: f64) -> bool {
    a < b - EPS
}

pub fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= EPS
}

macro_rules! degree_type {
    ($name:ident, $lo:expr, $hi:expr) => {
        #[derive(Clone, Copy)]
        pub struct $name(f64);

        impl $name {
            pub const MIN: f64 = $lo;
            pub const MAX: f64 = $hi;

            pub fn new(value: f64) -> Result<Self, DegreeError> {
                checked(value, $lo, $hi).map(Self)
            }

            pub fn value(self) -> f64 {
                self.0
            }
        }

        impl PartialEq for $name {
            fn eq(&self, other: &Self) -> bool {
                self.0.to_bits() == other.0.to_bits()
            }
        }

        impl Eq for $name {}

        impl Hash for $name {
            fn hash<H: Hasher>(&self, state: &mut H) {
                self.0.to_bits().hash(state);
            }
        }

        impl PartialOrd for $name {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }

        impl Ord for $name {
            fn cmp(&self, other: &Self) -> Ordering {
                self.0.total_cmp(&other.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }

        impl TryFrom<f64> for $name {
            type Error = DegreeError;

            fn try_from(value: f64) -> Result<Self, Self::Error> {
                Self::new(value)
            }
        }
    };
}

degree_type!(Unit, 0.0, 1.0);
degree_type!(Signed, -1.0, 1.0);

impl Unit {
    pub const ONE: Unit = Unit(1.0);
    pub const ZERO: Unit = Unit(0.0);

    pub fn complement(self) -> Unit {
        Unit(quantize(1.0 - self.0))
    }
}

impl Signed {
    pub const ZERO: Signed = Signed(0.0);

    pub fn negated(self) -> Signed {
        Signed(quantize(-self.0))
    }
}

impl From<Unit> for Signed {
    fn from(u: Unit) -> Self {
        Signed(u.0)
    }
}
