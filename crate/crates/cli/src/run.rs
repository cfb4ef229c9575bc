use std::fs::File;
use std::io::BufWriter;

use anyhow::{Context, Result};
use oddsratio::report::{render_estimates, render_report, EstimateReport, ReplicationWriter};
use oddsratio::{
    apply_continuity, estimate, run_simulation, run_simulation_observed, ContingencyTable,
    RandomStream, SimulationSettings, StudyDesign,
};

use crate::config::{Mode, RunConfig};

/// Runs the configured mode and returns the rendered document.
pub fn execute(config: &RunConfig) -> Result<String> {
    match &config.mode {
        Mode::Estimate { table, continuity } => {
            let report = run_estimate(table, *continuity, &config.settings)?;
            Ok(render_estimates(&report, config.format))
        }
        Mode::Simulate { design } => {
            let mut builder = rayon::ThreadPoolBuilder::new();
            if let Some(threads) = config.threads {
                builder = builder.num_threads(threads);
            }
            let pool = builder.build().context("building worker pool")?;
            let report = pool.install(|| simulate(design, config))?;
            Ok(render_report(&report, config.format))
        }
    }
}

/// Applies the continuity correction and every requested method. The
/// bootstrap draws from stream 0 of `settings.seed`.
pub fn run_estimate(
    table: &ContingencyTable,
    continuity: f64,
    settings: &SimulationSettings,
) -> Result<EstimateReport> {
    let corrected = apply_continuity(table, continuity)?;
    let mut stream = RandomStream::new(settings.seed, 0);
    let estimates = settings
        .methods
        .iter()
        .map(|&m| {
            estimate(
                m,
                &corrected,
                settings.alpha,
                settings.pbs_count,
                &mut stream,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EstimateReport {
        table: *table,
        continuity,
        corrected,
        alpha: settings.alpha,
        pbs_count: settings.pbs_count,
        seed: settings.seed,
        estimates,
    })
}

fn simulate(design: &StudyDesign, config: &RunConfig) -> Result<oddsratio::SimulationReport> {
    let Some(path) = &config.dump_replications else {
        return Ok(run_simulation(design, &config.settings)?);
    };
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut writer = ReplicationWriter::new(BufWriter::new(file))?;
    let mut failure = None;
    let report = run_simulation_observed(design, &config.settings, |record| {
        if failure.is_none() {
            failure = writer.write(record).err();
        }
    })?;
    if let Some(e) = failure {
        return Err(e).with_context(|| format!("writing {}", path.display()));
    }
    writer
        .finish()
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(report)
}
