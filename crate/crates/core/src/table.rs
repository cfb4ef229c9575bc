//! The 2x2 exposure-by-disease table and the two statistics every estimator
//! is built from.
//!
//! Layout (rows are exposure, columns are disease):
//!
//! ```text
//!          D=0   D=1
//!   E=0     a     b
//!   E=1     c     d
//! ```
//!
//! Cells are real-valued so that continuity-corrected tables and tables of
//! expected counts share one type.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContingencyTable {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl ContingencyTable {
    /// Builds a table, rejecting negative or non-finite cells and an all-zero
    /// total.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        for (cell, value) in [('a', a), ('b', b), ('c', c), ('d', d)] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidCell { cell, value });
            }
        }
        if a + b + c + d <= 0.0 {
            return Err(Error::EmptyTable);
        }
        Ok(Self { a, b, c, d })
    }

    /// Builds a table from integer counts.
    pub fn from_counts(a: u64, b: u64, c: u64, d: u64) -> Result<Self> {
        Self::new(a as f64, b as f64, c as f64, d as f64)
    }

    /// Unexposed, no disease.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Unexposed, disease.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// Exposed, no disease.
    pub fn c(&self) -> f64 {
        self.c
    }

    /// Exposed, disease.
    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn cells(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn total(&self) -> f64 {
        self.a + self.b + self.c + self.d
    }

    /// Exchanges the exposure rows, which inverts the odds ratio.
    pub fn swap_exposure(&self) -> Self {
        Self {
            a: self.c,
            b: self.d,
            c: self.a,
            d: self.b,
        }
    }

    fn require_positive(&self) -> Result<()> {
        for (cell, value) in [('a', self.a), ('b', self.b), ('c', self.c), ('d', self.d)] {
            if value == 0.0 {
                return Err(Error::DegenerateTable { cell });
            }
        }
        Ok(())
    }
}

/// Adds `delta` to every cell.
pub fn apply_continuity(table: &ContingencyTable, delta: f64) -> Result<ContingencyTable> {
    if !delta.is_finite() || delta < 0.0 {
        return Err(Error::InvalidContinuity(delta));
    }
    ContingencyTable::new(
        table.a + delta,
        table.b + delta,
        table.c + delta,
        table.d + delta,
    )
}

/// Cross-product odds ratio `(a d) / (b c)`.
pub fn crude_or(table: &ContingencyTable) -> Result<f64> {
    table.require_positive()?;
    Ok((table.a * table.d) / (table.b * table.c))
}

/// Delta-method standard deviation of `ln(OR)`: `sqrt(1/a + 1/b + 1/c + 1/d)`.
pub fn sigma_hat(table: &ContingencyTable) -> Result<f64> {
    log_variance(table).map(f64::sqrt)
}

pub(crate) fn log_variance(table: &ContingencyTable) -> Result<f64> {
    table.require_positive()?;
    Ok(1.0 / table.a + 1.0 / table.b + 1.0 / table.c + 1.0 / table.d)
}
