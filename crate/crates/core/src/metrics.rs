//! Aggregation of per-replication estimates into coverage, bias, width and
//! power summaries, and the closed-form power of the interval test.

use serde::{Deserialize, Serialize};

use crate::estimators::{EstimateWithCI, Method};
use crate::normal::{normal_cdf, two_sided_z};
use crate::simulation::{true_or, SimulationSettings, StudyDesign};
use crate::{Error, Result};

/// How one interval relates to the true odds ratio and to 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    /// Upper bound below the truth.
    pub miss_high: bool,
    /// Lower bound above the truth.
    pub miss_low: bool,
    /// Interval excludes 1.
    pub rejects_null: bool,
}

impl Verdict {
    pub fn classify(estimate: &EstimateWithCI, or_true: f64) -> Self {
        Self {
            miss_high: estimate.upper < or_true,
            miss_low: estimate.lower > or_true,
            rejects_null: estimate.lower > 1.0 || estimate.upper < 1.0,
        }
    }

    pub fn covered(&self) -> bool {
        !(self.miss_high || self.miss_low)
    }
}

/// Streaming sums for one method. Event counts are exact integers; merging
/// two accumulators is equivalent to recording both replication sets.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MethodAccumulator {
    count: u64,
    miss_high: u64,
    miss_low: u64,
    rejections: u64,
    sum_point: f64,
    sum_point_sq: f64,
    sum_lower: f64,
    sum_upper: f64,
    sum_width: f64,
}

impl MethodAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn record(&mut self, estimate: &EstimateWithCI, or_true: f64) -> Verdict {
        let verdict = Verdict::classify(estimate, or_true);
        self.count += 1;
        self.miss_high += u64::from(verdict.miss_high);
        self.miss_low += u64::from(verdict.miss_low);
        self.rejections += u64::from(verdict.rejects_null);
        self.sum_point += estimate.point;
        self.sum_point_sq += estimate.point * estimate.point;
        self.sum_lower += estimate.lower;
        self.sum_upper += estimate.upper;
        self.sum_width += estimate.width();
        verdict
    }

    pub fn merge(&mut self, other: &Self) {
        self.count += other.count;
        self.miss_high += other.miss_high;
        self.miss_low += other.miss_low;
        self.rejections += other.rejections;
        self.sum_point += other.sum_point;
        self.sum_point_sq += other.sum_point_sq;
        self.sum_lower += other.sum_lower;
        self.sum_upper += other.sum_upper;
        self.sum_width += other.sum_width;
    }

    pub fn finalize(&self, method: Method) -> Result<MethodSummary> {
        if self.count == 0 {
            return Err(Error::EmptyAccumulator);
        }
        let n = self.count as f64;
        let mean_point = self.sum_point / n;
        let point_sd = if self.count > 1 {
            ((self.sum_point_sq - n * mean_point * mean_point).max(0.0) / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let misses = self.miss_high + self.miss_low;
        Ok(MethodSummary {
            method,
            mean_point,
            point_sd,
            one_minus_coverage: misses as f64 / n,
            miss_high: self.miss_high as f64 / n,
            miss_low: self.miss_low as f64 / n,
            mean_lower: self.sum_lower / n,
            mean_upper: self.sum_upper / n,
            mean_width: self.sum_width / n,
            empirical_power: self.rejections as f64 / n,
            replication_count: self.count,
            miss_high_count: self.miss_high,
            miss_low_count: self.miss_low,
            rejection_count: self.rejections,
        })
    }
}

/// Monte Carlo summary of one method over all replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub mean_point: f64,
    /// Sample standard deviation of the point estimates.
    pub point_sd: f64,
    pub one_minus_coverage: f64,
    pub miss_high: f64,
    pub miss_low: f64,
    pub mean_lower: f64,
    pub mean_upper: f64,
    pub mean_width: f64,
    pub empirical_power: f64,
    pub replication_count: u64,
    pub miss_high_count: u64,
    pub miss_low_count: u64,
    pub rejection_count: u64,
}

impl MethodSummary {
    pub fn covered_count(&self) -> u64 {
        self.replication_count - self.miss_high_count - self.miss_low_count
    }

    /// Binomial standard error of the 1 - coverage estimate.
    pub fn coverage_std_error(&self) -> f64 {
        let p = self.one_minus_coverage;
        (p * (1.0 - p) / self.replication_count as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub design: StudyDesign,
    pub settings: SimulationSettings,
    pub or_true: f64,
    pub theoretical_power: f64,
    pub summaries: Vec<MethodSummary>,
}

impl SimulationReport {
    pub fn summary(&self, method: Method) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method)
    }
}

/// Power of the two-sided interval test of `OR = 1`, using expected group
/// sizes `n P(E)` and `n (1 - P(E))`.
pub fn theoretical_power(design: &StudyDesign, alpha: f64) -> Result<f64> {
    design.validate()?;
    let z = two_sided_z(alpha)?;
    let n = design.n as f64;
    let exposed = n * design.p_exposure;
    let unexposed = n - exposed;
    let (p1, p0) = (design.p_disease_exposed, design.p_disease_unexposed);
    let variance = 1.0 / (exposed * p1 * (1.0 - p1)) + 1.0 / (unexposed * p0 * (1.0 - p0));
    Ok(normal_cdf(true_or(design).ln().abs() / variance.sqrt() - z))
}
