//! Standard normal CDF and quantile.

use std::f64::consts::SQRT_2;

use statrs::function::erf::{erfc, erfc_inv};

use crate::{Error, Result};

/// Standard normal CDF, `0.5 * erfc(-x / sqrt(2))`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Inverse standard normal CDF for `p` in the open interval `(0, 1)`.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidProbability(p));
    }
    Ok(quantile_unchecked(p))
}

/// `z_{1 - alpha/2}` for a two-sided interval.
pub(crate) fn two_sided_z(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidProbability(alpha));
    }
    Ok(quantile_unchecked(1.0 - alpha / 2.0))
}

#[inline]
pub(crate) fn quantile_unchecked(p: f64) -> f64 {
    -SQRT_2 * erfc_inv(2.0 * p)
}
