//! Method II: parametric bootstrap from the bias-corrected lognormal.

use crate::estimators::{corrected_params, EstimateWithCI, Method};
use crate::normal::two_sided_z;
use crate::table::ContingencyTable;
use crate::{Error, RandomStream, Result};

/// Bootstrap draws on the odds-ratio scale, sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapSample {
    draws: Vec<f64>,
}

impl BootstrapSample {
    /// Sorts `draws`; requires at least two strictly positive finite values.
    pub fn new(mut draws: Vec<f64>) -> Result<Self> {
        if draws.len() < 2 {
            return Err(Error::InvalidSettings(format!(
                "a bootstrap sample needs at least 2 draws, got {}",
                draws.len()
            )));
        }
        if let Some(bad) = draws.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::InvalidSettings(format!(
                "bootstrap draws must be positive and finite, got {bad}"
            )));
        }
        draws.sort_unstable_by(f64::total_cmp);
        Ok(Self { draws })
    }

    pub fn draws(&self) -> &[f64] {
        &self.draws
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.draws.iter().sum::<f64>() / self.draws.len() as f64
    }
}

/// `count` draws of `exp(mu + sigma Z)`, one uniform per draw.
pub fn sample_lognormal(
    mu: f64,
    sigma: f64,
    count: usize,
    stream: &mut RandomStream,
) -> Result<BootstrapSample> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidSettings(format!(
            "lognormal sigma must be positive, got {sigma}"
        )));
    }
    if count < 2 {
        return Err(Error::InvalidSettings(format!(
            "bootstrap count must be at least 2, got {count}"
        )));
    }
    let draws = (0..count)
        .map(|_| (mu + sigma * stream.next_standard_normal()).exp())
        .collect();
    BootstrapSample::new(draws)
}

/// Quantile by linear interpolation between order statistics at zero-based
/// rank `(len - 1) p`.
pub fn empirical_quantile(sample: &BootstrapSample, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidProbability(p));
    }
    Ok(interpolate(&sample.draws, p))
}

fn interpolate(sorted: &[f64], p: f64) -> f64 {
    let rank = (sorted.len() - 1) as f64 * p;
    let lo = rank.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = rank - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Draws `pbs` realisations from `LN(ln OR - s^2/2, s)` and reports the
/// sample median with the `alpha/2` and `1 - alpha/2` sample quantiles.
pub fn percentile_bootstrap_estimate(
    table: &ContingencyTable,
    alpha: f64,
    pbs: usize,
    stream: &mut RandomStream,
) -> Result<EstimateWithCI> {
    two_sided_z(alpha)?;
    let (mu, sigma) = corrected_params(table)?;
    let sample = sample_lognormal(mu, sigma, pbs, stream)?;
    Ok(EstimateWithCI {
        method: Method::PctlBoot,
        point: interpolate(&sample.draws, 0.5),
        lower: interpolate(&sample.draws, alpha / 2.0),
        upper: interpolate(&sample.draws, 1.0 - alpha / 2.0),
        alpha,
        mu_used: mu,
        sigma_used: sigma,
    })
}
