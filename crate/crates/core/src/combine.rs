//! Degree combination functions used by rule effects.

use std::fmt;

use thiserror::Error;

use crate::appraisal::{intensity, IntensityError, IntensityMode};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CombineError {
    #[error("combinator `{0}` needs at least {1} argument(s)")]
    Arity(&'static str, usize),
    #[error(transparent)]
    Intensity(#[from] IntensityError),
}

/// The average combinator `f(k,k') = ((k+k')/4)+0.5`, generalised to any
/// number of arguments as `mean/2 + 0.5`. Maps `[-1,1]` inputs into `[0,1]`.
pub fn avg(xs: &[f64]) -> f64 {
    mean(xs) / 2.0 + 0.5
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sign-preserving average for attitude contagion: the magnitude goes through
/// [`avg`] and the sign of the source attitude is kept.
pub fn signed_avg(k: f64, rest: &[f64]) -> f64 {
    let mut args = Vec::with_capacity(rest.len() + 1);
    args.push(k.abs());
    args.extend_from_slice(rest);
    let magnitude = avg(&args);
    if k < 0.0 {
        -magnitude
    } else {
        magnitude
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Combinator {
    Avg,
    Mean,
    SignedAvg,
    Min,
    Intensity,
}

impl Combinator {
    pub const ALL: [Combinator; 5] = [
        Combinator::Avg,
        Combinator::Mean,
        Combinator::SignedAvg,
        Combinator::Min,
        Combinator::Intensity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Combinator::Avg => "avg",
            Combinator::Mean => "mean",
            Combinator::SignedAvg => "savg",
            Combinator::Min => "min",
            Combinator::Intensity => "intensity",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }

    pub fn apply(self, args: &[f64], mode: IntensityMode) -> Result<f64, CombineError> {
        let need = |n: usize| {
            if args.len() < n {
                Err(CombineError::Arity(self.name(), n))
            } else {
                Ok(())
            }
        };
        match self {
            Combinator::Avg => {
                need(1)?;
                Ok(avg(args))
            }
            Combinator::Mean => {
                need(1)?;
                Ok(mean(args))
            }
            Combinator::SignedAvg => {
                need(1)?;
                Ok(signed_avg(args[0], &args[1..]))
            }
            Combinator::Min => {
                need(1)?;
                Ok(args.iter().copied().fold(f64::INFINITY, f64::min))
            }
            Combinator::Intensity => {
                need(2)?;
                Ok(intensity(args[0], args[1], &args[2..], mode)?)
            }
        }
    }
}

impl fmt::Display for Combinator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
