//! Rendering of simulation reports and single-table estimates.
//!
//! Markdown mirrors the layout of a published coverage table (3 decimals for
//! estimates and bounds, 4 for proportions). CSV and JSON carry full
//! round-trip precision.

use std::fmt::Write as _;
use std::io;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::estimators::EstimateWithCI;
use crate::metrics::{MethodSummary, SimulationReport};
use crate::simulation::ReplicationRecord;
use crate::table::ContingencyTable;

pub const SUMMARY_CSV_HEADER: [&str; 9] = [
    "method",
    "mean_point",
    "one_minus_coverage",
    "miss_high",
    "miss_low",
    "mean_lower",
    "mean_upper",
    "mean_width",
    "empirical_power",
];

pub const ESTIMATE_CSV_HEADER: [&str; 7] = [
    "method",
    "point",
    "lower",
    "upper",
    "alpha",
    "mu_used",
    "sigma_used",
];

pub const REPLICATION_CSV_HEADER: [&str; 9] = [
    "replication",
    "method",
    "point",
    "lower",
    "upper",
    "covered",
    "miss_high",
    "miss_low",
    "rejects_null",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Markdown,
    Csv,
    /// Pretty-printed JSON.
    Structured,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "markdown" | "md" => Ok(Self::Markdown),
            "csv" => Ok(Self::Csv),
            "structured" | "json" => Ok(Self::Structured),
            other => Err(format!(
                "unknown format `{other}` (expected markdown, csv or structured)"
            )),
        }
    }
}

/// Result of the `estimate` mode: one table, every requested method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub table: ContingencyTable,
    pub continuity: f64,
    pub corrected: ContingencyTable,
    pub alpha: f64,
    pub pbs_count: usize,
    pub seed: u64,
    pub estimates: Vec<EstimateWithCI>,
}

pub fn render_report(report: &SimulationReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Markdown => report_markdown(report),
        OutputFormat::Csv => report_csv(report),
        OutputFormat::Structured => to_json(report),
    }
}

pub fn render_estimates(report: &EstimateReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Markdown => estimates_markdown(report),
        OutputFormat::Csv => estimates_csv(report),
        OutputFormat::Structured => to_json(report),
    }
}

/// Parses the structured (JSON) rendering back into a report.
pub fn parse_structured(text: &str) -> serde_json::Result<SimulationReport> {
    serde_json::from_str(text)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("reports serialise to JSON");
    out.push('\n');
    out
}

fn confidence_percent(alpha: f64) -> String {
    trim_decimal(format!("{:.4}", (1.0 - alpha) * 100.0))
}

fn trim_decimal(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn report_markdown(report: &SimulationReport) -> String {
    let d = &report.design;
    let s = &report.settings;
    let mut out = String::new();
    let _ = writeln!(out, "# OR_true = {:.3}\n", report.or_true);
    let _ = writeln!(
        out,
        "Intended {}% confidence intervals. Theoretical power to reject OR_true = 1: {:.3}\n",
        confidence_percent(s.alpha),
        report.theoretical_power
    );
    let _ = writeln!(
        out,
        "n = {}, P(E) = {}, P(D|E) = {}, P(D|not E) = {}, #MC = {}, #PBS = {}, alpha = {}, seed = {}\n",
        d.n, d.p_exposure, d.p_disease_exposed, d.p_disease_unexposed, s.mc_count, s.pbs_count, s.alpha, s.seed
    );
    out.push_str(
        "| Method / Mean point estimate | 1 - P(OR_true in CI) (Mean LB, Mean UB) [width] \
         | P(miss: OR_true too high) | P(miss: OR_true too low) | MC empirical power |\n",
    );
    out.push_str("|---|---|---|---|---|\n");
    for m in &report.summaries {
        let _ = writeln!(
            out,
            "| {} / {:.3} | {:.4} ({:.3}, {:.3}) [{:.3}] | {:.4} | {:.4} | {:.4} |",
            m.method.label(),
            m.mean_point,
            m.one_minus_coverage,
            m.mean_lower,
            m.mean_upper,
            m.mean_width,
            m.miss_high,
            m.miss_low,
            m.empirical_power
        );
    }
    out
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header).expect("in-memory write");
    for row in rows {
        writer.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

fn summary_row(m: &MethodSummary) -> Vec<String> {
    vec![
        m.method.key().to_string(),
        m.mean_point.to_string(),
        m.one_minus_coverage.to_string(),
        m.miss_high.to_string(),
        m.miss_low.to_string(),
        m.mean_lower.to_string(),
        m.mean_upper.to_string(),
        m.mean_width.to_string(),
        m.empirical_power.to_string(),
    ]
}

fn report_csv(report: &SimulationReport) -> String {
    csv_string(
        &SUMMARY_CSV_HEADER,
        report.summaries.iter().map(summary_row),
    )
}

fn estimates_markdown(report: &EstimateReport) -> String {
    let [a, b, c, d] = report.corrected.cells();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Table (a, b, c, d) = ({a}, {b}, {c}, {d}) after adding {} to each cell; {}% intervals\n",
        report.continuity,
        confidence_percent(report.alpha)
    );
    out.push_str("| Method | Point estimate | Lower | Upper | mu | sigma |\n");
    out.push_str("|---|---|---|---|---|---|\n");
    for e in &report.estimates {
        let _ = writeln!(
            out,
            "| {} | {:.3} | {:.3} | {:.3} | {:.4} | {:.4} |",
            e.method.label(),
            e.point,
            e.lower,
            e.upper,
            e.mu_used,
            e.sigma_used
        );
    }
    out
}

fn estimates_csv(report: &EstimateReport) -> String {
    csv_string(
        &ESTIMATE_CSV_HEADER,
        report.estimates.iter().map(|e| {
            vec![
                e.method.key().to_string(),
                e.point.to_string(),
                e.lower.to_string(),
                e.upper.to_string(),
                e.alpha.to_string(),
                e.mu_used.to_string(),
                e.sigma_used.to_string(),
            ]
        }),
    )
}

/// Streams per-replication rows as CSV.
pub struct ReplicationWriter<W: io::Write> {
    inner: csv::Writer<W>,
}

impl<W: io::Write> ReplicationWriter<W> {
    pub fn new(sink: W) -> csv::Result<Self> {
        let mut inner = csv::Writer::from_writer(sink);
        inner.write_record(REPLICATION_CSV_HEADER)?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, record: &ReplicationRecord) -> csv::Result<()> {
        let e = &record.estimate;
        let v = &record.verdict;
        let flag = |b: bool| if b { "1" } else { "0" };
        self.inner.write_record([
            record.replication.to_string().as_str(),
            e.method.key(),
            &e.point.to_string(),
            &e.lower.to_string(),
            &e.upper.to_string(),
            flag(v.covered()),
            flag(v.miss_high),
            flag(v.miss_low),
            flag(v.rejects_null),
        ])
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.inner.flush()?;
        self.inner.into_inner().map_err(|e| e.into_error())
    }
}
