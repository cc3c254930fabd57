//! Quadrature noise variances relative to the quantum noise limit.
//!
//! All internal algebra works on linear variances (QNL = 1); decibels appear
//! only at I/O boundaries. The two newtypes keep the units straight.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A noise variance in linear units relative to the QNL; strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VarianceLinear(f64);

/// A noise variance in decibels relative to the QNL (`10 log10` of linear).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VarianceDb(f64);

impl VarianceLinear {
    pub fn new(value: f64) -> Result<Self> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::domain(format!(
                "linear variance must be positive and finite, got {value}"
            )));
        }
        Ok(VarianceLinear(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn to_db(self) -> VarianceDb {
        VarianceDb(10.0 * self.0.log10())
    }
}

impl VarianceDb {
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::domain(format!("dB variance must be finite, got {value}")));
        }
        Ok(VarianceDb(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn to_linear(self) -> VarianceLinear {
        VarianceLinear(10f64.powf(self.0 / 10.0))
    }
}

/// `10^(db/10)` on raw floats; convenience for call sites that have already
/// validated their inputs.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `10 log10(linear)` on raw floats.
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}
