//! Point and interval estimation for the odds ratio of a 2x2 table.
//!
//! Four methods are provided:
//!
//! - [`Method::Standard`]: the crude cross-product odds ratio with the usual
//!   log-scale Wald interval.
//! - [`Method::PctlBoot`]: a parametric bootstrap from the bias-corrected
//!   lognormal `LN(ln(OR) - s^2/2, s)`, reading the median and the
//!   `alpha/2`, `1 - alpha/2` quantiles off the bootstrap sample.
//! - [`Method::PctlCalc`]: the same interval computed in closed form.
//! - [`Method::Barendregt`]: a variant that re-solves the log-scale spread
//!   from the lognormal variance before re-centring.
//!
//! The [`simulation`] and [`metrics`] modules implement a reproducible,
//! parallel Monte Carlo study of coverage, bias, width and power for these
//! methods, and [`report`] renders the result as markdown, CSV or JSON.

pub mod bootstrap;
mod error;
pub mod estimators;
pub mod metrics;
pub mod normal;
pub mod report;
pub mod rng;
pub mod simulation;
pub mod table;

pub use bootstrap::{
    empirical_quantile, percentile_bootstrap_estimate, sample_lognormal, BootstrapSample,
};
pub use error::{Error, Result};
pub use estimators::{
    barendregt_estimate, estimate, or_star, percentile_calc_estimate, standard_estimate,
    EstimateWithCI, Method,
};
pub use metrics::{theoretical_power, MethodAccumulator, MethodSummary, SimulationReport};
pub use normal::{normal_cdf, normal_quantile};
pub use rng::RandomStream;
pub use simulation::{
    cell_probabilities, generate_table, run_simulation, run_simulation_observed, true_or,
    ReplicationRecord, SimulationSettings, StudyDesign,
};
pub use table::{apply_continuity, crude_or, sigma_hat, ContingencyTable};
