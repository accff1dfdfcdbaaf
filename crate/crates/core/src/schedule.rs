use serde::{Deserialize, Serialize};

use crate::error::ProblemError;

/// Step sizes `mu_k = scale / (k + offset)^exponent` for `k >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSchedule")]
pub struct StepSchedule {
    scale: f64,
    offset: f64,
    exponent: f64,
}

#[derive(Deserialize)]
struct RawSchedule {
    scale: f64,
    offset: f64,
    exponent: f64,
}

impl TryFrom<RawSchedule> for StepSchedule {
    type Error = ProblemError;

    fn try_from(raw: RawSchedule) -> Result<Self, Self::Error> {
        StepSchedule::new(raw.scale, raw.offset, raw.exponent)
    }
}

impl StepSchedule {
    /// Rejects exponents outside `(0.5, 1]`, where the steps either fail to be
    /// square summable or sum to a finite total.
    pub fn new(scale: f64, offset: f64, exponent: f64) -> Result<Self, ProblemError> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(ProblemError::ScheduleScale(scale));
        }
        if !(offset.is_finite() && offset >= 0.0) {
            return Err(ProblemError::ScheduleOffset(offset));
        }
        if !(exponent > 0.5 && exponent <= 1.0) {
            return Err(ProblemError::ScheduleExponent(exponent));
        }
        Ok(Self { scale, offset, exponent })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// `rho = 2p - 1`.
    pub fn rho(&self) -> f64 {
        2.0 * self.exponent - 1.0
    }

    pub fn step(&self, k: usize) -> f64 {
        self.scale / (k as f64 + self.offset).powf(self.exponent)
    }
}
