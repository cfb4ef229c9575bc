//! Closed-form point and interval estimators, plus a dispatcher over all
//! four methods.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bootstrap::percentile_bootstrap_estimate;
use crate::normal::two_sided_z;
use crate::table::{crude_or, log_variance, ContingencyTable};
use crate::{RandomStream, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// (I) crude odds ratio with the log-scale Wald interval.
    Standard,
    /// (II) parametric bootstrap percentile interval.
    PctlBoot,
    /// (III) calculated percentile interval.
    PctlCalc,
    /// (IV) Barendregt recalculation.
    Barendregt,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Standard,
        Method::PctlBoot,
        Method::PctlCalc,
        Method::Barendregt,
    ];

    /// Name used on the command line and in CSV/JSON output.
    pub fn key(self) -> &'static str {
        match self {
            Method::Standard => "standard",
            Method::PctlBoot => "pctl-boot",
            Method::PctlCalc => "pctl-calc",
            Method::Barendregt => "barendregt",
        }
    }

    /// Row label for the markdown tables.
    pub fn label(self) -> &'static str {
        match self {
            Method::Standard => "Standard (I)",
            Method::PctlBoot => "Pctl Boot. (II)",
            Method::PctlCalc => "Pctl Calc. (III)",
            Method::Barendregt => "Barendregt (IV)",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.key().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                format!(
                    "unknown method `{s}` (expected standard, pctl-boot, pctl-calc or barendregt)"
                )
            })
    }
}

/// A point estimate with its two-sided interval, on the odds-ratio scale.
///
/// `mu_used`/`sigma_used` are the log-scale location and spread the method
/// centred its interval on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithCI {
    pub method: Method,
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub alpha: f64,
    pub mu_used: f64,
    pub sigma_used: f64,
}

impl EstimateWithCI {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }

    fn log_symmetric(method: Method, mu: f64, sigma: f64, z: f64, alpha: f64) -> Self {
        Self {
            method,
            point: mu.exp(),
            lower: (mu - z * sigma).exp(),
            upper: (mu + z * sigma).exp(),
            alpha,
            mu_used: mu,
            sigma_used: sigma,
        }
    }
}

/// Method I: point `OR`, interval `exp(ln OR -/+ z s)`.
pub fn standard_estimate(table: &ContingencyTable, alpha: f64) -> Result<EstimateWithCI> {
    let z = two_sided_z(alpha)?;
    let or = crude_or(table)?;
    let sigma = log_variance(table)?.sqrt();
    let mut est = EstimateWithCI::log_symmetric(Method::Standard, or.ln(), sigma, z, alpha);
    est.point = or;
    Ok(est)
}

/// Bias-corrected point estimate `OR * exp(-s^2/2)`: the median of the
/// lognormal whose mean is the crude odds ratio.
pub fn or_star(table: &ContingencyTable) -> Result<f64> {
    Ok(crude_or(table)? * (-log_variance(table)? / 2.0).exp())
}

/// Method III: interval centred on `ln OR - s^2/2` with spread `s`.
pub fn percentile_calc_estimate(table: &ContingencyTable, alpha: f64) -> Result<EstimateWithCI> {
    let z = two_sided_z(alpha)?;
    let (mu, sigma) = corrected_params(table)?;
    Ok(EstimateWithCI::log_symmetric(
        Method::PctlCalc,
        mu,
        sigma,
        z,
        alpha,
    ))
}

/// `(ln OR - s^2/2, s)`, the lognormal fitted by methods II and III.
pub(crate) fn corrected_params(table: &ContingencyTable) -> Result<(f64, f64)> {
    let variance = log_variance(table)?;
    Ok((crude_or(table)?.ln() - variance / 2.0, variance.sqrt()))
}

/// Log-scale spread after the Barendregt recalculation.
///
/// Takes the natural-scale variance of `LN(mu*, s)`,
/// `V = (e^{s^2} - 1) e^{2 mu* + s^2}`, and solves for the spread of a
/// lognormal with mean `e^{mu*}` and variance `V`:
/// `s*^2 = ln(1 + V e^{-2 mu*}) = ln(1 + (e^{s^2} - 1) e^{s^2})`.
pub fn barendregt_variance(log_variance: f64) -> f64 {
    (log_variance.exp_m1() * log_variance.exp()).ln_1p()
}

/// Method IV: re-solve the spread from the lognormal variance at
/// `mu* = ln OR - s^2/2`, then re-centre at `mu** = ln OR - s*^2/2`.
pub fn barendregt_estimate(table: &ContingencyTable, alpha: f64) -> Result<EstimateWithCI> {
    let z = two_sided_z(alpha)?;
    let log_or = crude_or(table)?.ln();
    let recalculated = barendregt_variance(log_variance(table)?);
    let mu = log_or - recalculated / 2.0;
    Ok(EstimateWithCI::log_symmetric(
        Method::Barendregt,
        mu,
        recalculated.sqrt(),
        z,
        alpha,
    ))
}

/// Runs `method` on `table`. Only [`Method::PctlBoot`] touches `stream`, and
/// it draws exactly `pbs` uniforms from it.
pub fn estimate(
    method: Method,
    table: &ContingencyTable,
    alpha: f64,
    pbs: usize,
    stream: &mut RandomStream,
) -> Result<EstimateWithCI> {
    match method {
        Method::Standard => standard_estimate(table, alpha),
        Method::PctlBoot => percentile_bootstrap_estimate(table, alpha, pbs, stream),
        Method::PctlCalc => percentile_calc_estimate(table, alpha),
        Method::Barendregt => barendregt_estimate(table, alpha),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::sigma_hat;
    use crate::Error;
    use proptest::prelude::*;

    fn table1() -> ContingencyTable {
        ContingencyTable::new(77.5, 22.5, 92.5, 7.5).unwrap()
    }

    fn balanced() -> ContingencyTable {
        ContingencyTable::new(25.0, 25.0, 25.0, 25.0).unwrap()
    }

    fn close(x: f64, y: f64, tol: f64) {
        assert!((x - y).abs() <= tol, "{x} vs {y} (tol {tol})");
    }

    /// Solves `(e^s - 1) m^2 = v` for `s` by bisection.
    fn solve_lognormal_spread(mean: f64, variance: f64) -> f64 {
        let f = |s: f64| (s.exp() - 1.0) * mean * mean - variance;
        let (mut lo, mut hi) = (0.0, 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid
            } else {
                lo = mid
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn standard_values() {
        let e = standard_estimate(&table1(), 0.05).unwrap();
        close(e.point, 0.27928, 5e-6);
        close(e.lower, 0.115865, 1e-6);
        close(e.upper, 0.673170, 1e-6);
        close(e.mu_used, -1.27554, 1e-5);
        close(e.sigma_used, 0.44888, 1e-5);

        let e = standard_estimate(&balanced(), 0.05).unwrap();
        assert_eq!(e.point, 1.0);
        close(e.lower, 0.456583, 1e-6);
        close(e.upper, 2.190184, 1e-6);
        close(e.lower * e.upper, 1.0, 1e-14);
    }

    #[test]
    fn interval_collapses_as_alpha_approaches_one() {
        let e = standard_estimate(&table1(), 1.0 - 1e-9).unwrap();
        close(e.lower, e.point, 1e-8);
        close(e.upper, e.point, 1e-8);
    }

    #[test]
    fn rejects_bad_alpha_and_zero_cells() {
        assert!(matches!(
            standard_estimate(&table1(), 0.0),
            Err(Error::InvalidProbability(_))
        ));
        let z = ContingencyTable::new(0.0, 1.0, 1.0, 1.0).unwrap();
        for m in Method::ALL {
            let mut s = RandomStream::new(0, 0);
            assert!(matches!(
                estimate(m, &z, 0.05, 10, &mut s),
                Err(Error::DegenerateTable { cell: 'a' })
            ));
        }
    }

    #[test]
    fn or_star_values() {
        close(or_star(&table1()).unwrap(), 0.25251, 5e-6);
        close(
            or_star(&table1()).unwrap(),
            0.27928 * (-0.201491f64 / 2.0).exp(),
            2e-6,
        );
        close(or_star(&balanced()).unwrap(), (-0.08f64).exp(), 1e-15);
        // or_star -> crude_or as cells grow with fixed proportions
        let big = ContingencyTable::new(77.5e8, 22.5e8, 92.5e8, 7.5e8).unwrap();
        close(or_star(&big).unwrap(), crude_or(&big).unwrap(), 1e-9);
    }

    #[test]
    fn percentile_calc_values() {
        let e = percentile_calc_estimate(&table1(), 0.05).unwrap();
        close(e.point, 0.25251, 5e-6);
        close(e.lower, 0.10476, 1e-5);
        close(e.upper, 0.60866, 1e-5);
        let s = standard_estimate(&table1(), 0.05).unwrap();
        close(e.lower, s.lower * 0.90416, 1e-5);
        close(e.upper / e.lower, s.upper / s.lower, 1e-12);

        let e = percentile_calc_estimate(&balanced(), 0.05).unwrap();
        let s = standard_estimate(&balanced(), 0.05).unwrap();
        close(e.point, 0.92312, 5e-6);
        close(e.lower, s.lower * e.point, 1e-14);
        close(e.upper, s.upper * e.point, 1e-14);
    }

    #[test]
    fn barendregt_matches_root_finder() {
        for t in [table1(), balanced()] {
            let s2 = sigma_hat(&t).unwrap().powi(2);
            let mu_star = crude_or(&t).unwrap().ln() - s2 / 2.0;
            let variance = (s2.exp() - 1.0) * (2.0 * mu_star + s2).exp();
            let oracle = solve_lognormal_spread(mu_star.exp(), variance);
            close(barendregt_variance(s2), oracle, 1e-12);
        }
    }

    #[test]
    fn barendregt_values() {
        // values frozen from the bisection oracle above
        let e = barendregt_estimate(&table1(), 0.05).unwrap();
        close(e.sigma_used.powi(2), 0.2414204, 1e-7);
        close(e.mu_used, -1.3962532, 1e-7);
        close(e.point, 0.2475226, 1e-7);
        close(e.lower, 0.0944889, 1e-7);
        close(e.upper, 0.6484090, 1e-7);

        let e = barendregt_estimate(&balanced(), 0.05).unwrap();
        close(e.sigma_used.powi(2), 0.1853311, 1e-7);
        close(e.point, 0.9114983, 1e-7);
        assert!(e.point < 1.0);
        assert!(e.sigma_used > 0.4);
    }

    #[test]
    fn barendregt_small_spread_limit() {
        let big = ContingencyTable::new(77.5e8, 22.5e8, 92.5e8, 7.5e8).unwrap();
        let e = barendregt_estimate(&big, 0.05).unwrap();
        let s = sigma_hat(&big).unwrap();
        close(e.sigma_used / s, 1.0, 1e-6);
        close(e.point, crude_or(&big).unwrap(), 1e-8);
    }

    #[test]
    fn method_keys_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.key().parse::<Method>().unwrap(), m);
        }
        assert!("wald".parse::<Method>().is_err());
    }

    fn cell() -> impl Strategy<Value = f64> {
        0.5f64..400.0
    }

    proptest! {
        #[test]
        fn multiplicative_shift(a in cell(), b in cell(), c in cell(), d in cell(), alpha in 0.001f64..0.5) {
            let t = ContingencyTable::new(a, b, c, d).unwrap();
            let s = standard_estimate(&t, alpha).unwrap();
            let p = percentile_calc_estimate(&t, alpha).unwrap();
            let shift = (-sigma_hat(&t).unwrap().powi(2) / 2.0).exp();
            prop_assert!((p.lower / (s.lower * shift) - 1.0).abs() < 1e-12);
            prop_assert!((p.upper / (s.upper * shift) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn geometric_midpoint(a in cell(), b in cell(), c in cell(), d in cell()) {
            let t = ContingencyTable::new(a, b, c, d).unwrap();
            for e in [standard_estimate(&t, 0.05).unwrap(), percentile_calc_estimate(&t, 0.05).unwrap()] {
                prop_assert!(((e.lower * e.upper).sqrt() / e.point - 1.0).abs() < 1e-12);
                prop_assert!(e.lower <= e.point && e.point <= e.upper);
            }
        }

        #[test]
        fn corrected_points_below_crude(a in cell(), b in cell(), c in cell(), d in cell()) {
            let t = ContingencyTable::new(a, b, c, d).unwrap();
            let or = crude_or(&t).unwrap();
            prop_assert!(or_star(&t).unwrap() < or);
            prop_assert!(barendregt_estimate(&t, 0.05).unwrap().point < or);
        }

        #[test]
        fn smaller_alpha_is_wider(a in cell(), b in cell(), c in cell(), d in cell(), alpha in 0.01f64..0.5) {
            let t = ContingencyTable::new(a, b, c, d).unwrap();
            let narrow = alpha;
            let wide = alpha / 2.0;
            for f in [standard_estimate, percentile_calc_estimate, barendregt_estimate] {
                prop_assert!(f(&t, wide).unwrap().width() > f(&t, narrow).unwrap().width());
            }
        }

        #[test]
        fn standard_reciprocity(a in cell(), b in cell(), c in cell(), d in cell()) {
            let t = ContingencyTable::new(a, b, c, d).unwrap();
            let e = standard_estimate(&t, 0.05).unwrap();
            let r = standard_estimate(&t.swap_exposure(), 0.05).unwrap();
            prop_assert!((r.point * e.point - 1.0).abs() < 1e-12);
            prop_assert!((r.lower * e.upper - 1.0).abs() < 1e-12);
            prop_assert!((r.upper * e.lower - 1.0).abs() < 1e-12);
        }
    }
}
