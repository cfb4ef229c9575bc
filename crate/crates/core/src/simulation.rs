//! Prospective-study table generator and the Monte Carlo harness.
//!
//! Replication `i` draws from `RandomStream::new(seed, i)`: first `2n`
//! uniforms for the subjects (exposure, then disease, per subject), then
//! `pbs_count` uniforms if the bootstrap method is requested. Replications
//! are grouped into fixed blocks of [`BLOCK_SIZE`] whose partial sums are
//! merged in block order, so the report does not depend on the number of
//! worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::estimators::{estimate, EstimateWithCI, Method};
use crate::metrics::{theoretical_power, MethodAccumulator, SimulationReport, Verdict};
use crate::table::{apply_continuity, ContingencyTable};
use crate::{Error, RandomStream, Result};

pub const BLOCK_SIZE: u64 = 256;
const BLOCKS_PER_WAVE: u64 = 64;
pub const CONTINUITY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyDesign {
    /// Subjects per replication.
    pub n: u64,
    pub p_exposure: f64,
    /// P(D=1 | E=1).
    pub p_disease_exposed: f64,
    /// P(D=1 | E=0).
    pub p_disease_unexposed: f64,
}

impl StudyDesign {
    pub fn new(
        n: u64,
        p_exposure: f64,
        p_disease_exposed: f64,
        p_disease_unexposed: f64,
    ) -> Result<Self> {
        let design = Self {
            n,
            p_exposure,
            p_disease_exposed,
            p_disease_unexposed,
        };
        design.validate()?;
        Ok(design)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 4 {
            return Err(Error::InvalidDesign(format!(
                "n must be at least 4, got {}",
                self.n
            )));
        }
        for (name, p) in [
            ("p_exposure", self.p_exposure),
            ("p_disease_exposed", self.p_disease_exposed),
            ("p_disease_unexposed", self.p_disease_unexposed),
        ] {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidDesign(format!(
                    "{name} must lie in (0, 1), got {p}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSettings {
    pub mc_count: u64,
    pub pbs_count: usize,
    pub alpha: f64,
    pub seed: u64,
    pub methods: Vec<Method>,
}

impl SimulationSettings {
    /// Settings running all four methods.
    pub fn new(mc_count: u64, pbs_count: usize, alpha: f64, seed: u64) -> Self {
        Self {
            mc_count,
            pbs_count,
            alpha,
            seed,
            methods: Method::ALL.to_vec(),
        }
    }

    pub fn with_methods(mut self, methods: impl IntoIterator<Item = Method>) -> Self {
        self.methods = methods.into_iter().collect();
        self.methods.sort();
        self.methods.dedup();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.mc_count < 1 {
            return Err(Error::InvalidSettings("mc_count must be at least 1".into()));
        }
        if self.pbs_count < 2 {
            return Err(Error::InvalidSettings(format!(
                "pbs_count must be at least 2, got {}",
                self.pbs_count
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidSettings(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidSettings("no methods requested".into()));
        }
        Ok(())
    }

    /// Uniforms consumed by one replication of `design`.
    pub fn uniforms_per_replication(&self, design: &StudyDesign) -> u64 {
        let boot = if self.methods.contains(&Method::PctlBoot) {
            self.pbs_count as u64
        } else {
            0
        };
        2 * design.n + boot
    }
}

/// Cell probabilities `(P(a), P(b), P(c), P(d))` in table order.
pub fn cell_probabilities(design: &StudyDesign) -> [f64; 4] {
    let pe = design.p_exposure;
    let (pde, pdu) = (design.p_disease_exposed, design.p_disease_unexposed);
    [
        (1.0 - pdu) * (1.0 - pe),
        pdu * (1.0 - pe),
        (1.0 - pde) * pe,
        pde * pe,
    ]
}

/// Odds ratio implied by the design's conditional disease probabilities.
pub fn true_or(design: &StudyDesign) -> f64 {
    let odds = |p: f64| p / (1.0 - p);
    odds(design.p_disease_exposed) / odds(design.p_disease_unexposed)
}

/// Simulates `n` subjects: exposure, then disease given exposure, each a
/// Bernoulli draw. Consumes exactly `2n` uniforms.
pub fn generate_table(design: &StudyDesign, stream: &mut RandomStream) -> ContingencyTable {
    let mut cells = [0u64; 4];
    for _ in 0..design.n {
        let exposed = stream.bernoulli(design.p_exposure);
        let p_disease = if exposed {
            design.p_disease_exposed
        } else {
            design.p_disease_unexposed
        };
        let diseased = stream.bernoulli(p_disease);
        cells[2 * usize::from(exposed) + usize::from(diseased)] += 1;
    }
    // a nonempty design always yields a valid table
    ContingencyTable::from_counts(cells[0], cells[1], cells[2], cells[3])
        .expect("generated counts are nonnegative with positive total")
}

/// One method's result for one replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub replication: u64,
    pub estimate: EstimateWithCI,
    pub verdict: Verdict,
}

pub fn run_simulation(
    design: &StudyDesign,
    settings: &SimulationSettings,
) -> Result<SimulationReport> {
    run(design, settings, None)
}

/// Like [`run_simulation`], also handing every per-replication record to
/// `observer` in replication order (methods in canonical order within a
/// replication).
pub fn run_simulation_observed<F>(
    design: &StudyDesign,
    settings: &SimulationSettings,
    mut observer: F,
) -> Result<SimulationReport>
where
    F: FnMut(&ReplicationRecord),
{
    run(design, settings, Some(&mut observer))
}

struct BlockResult {
    accumulators: Vec<MethodAccumulator>,
    records: Vec<ReplicationRecord>,
}

fn run(
    design: &StudyDesign,
    settings: &SimulationSettings,
    mut observer: Option<&mut dyn FnMut(&ReplicationRecord)>,
) -> Result<SimulationReport> {
    design.validate()?;
    settings.validate()?;
    let settings = settings.clone().with_methods(settings.methods.clone());
    let or_true = true_or(design);
    let keep_records = observer.is_some();

    let block_count = settings.mc_count.div_ceil(BLOCK_SIZE);
    let mut totals = vec![MethodAccumulator::new(); settings.methods.len()];
    let mut wave_start = 0;
    while wave_start < block_count {
        let wave_end = (wave_start + BLOCKS_PER_WAVE).min(block_count);
        let results: Vec<Result<BlockResult>> = (wave_start..wave_end)
            .into_par_iter()
            .map(|block| run_block(design, &settings, or_true, block, keep_records))
            .collect();
        for result in results {
            let block = result?;
            for (total, part) in totals.iter_mut().zip(&block.accumulators) {
                total.merge(part);
            }
            if let Some(observer) = observer.as_mut() {
                block.records.iter().for_each(observer);
            }
        }
        wave_start = wave_end;
    }

    let summaries = settings
        .methods
        .iter()
        .zip(&totals)
        .map(|(&method, acc)| acc.finalize(method))
        .collect::<Result<Vec<_>>>()?;
    Ok(SimulationReport {
        design: *design,
        theoretical_power: theoretical_power(design, settings.alpha)?,
        settings,
        or_true,
        summaries,
    })
}

fn run_block(
    design: &StudyDesign,
    settings: &SimulationSettings,
    or_true: f64,
    block: u64,
    keep_records: bool,
) -> Result<BlockResult> {
    let start = block * BLOCK_SIZE;
    let end = (start + BLOCK_SIZE).min(settings.mc_count);
    let mut accumulators = vec![MethodAccumulator::new(); settings.methods.len()];
    let mut records = Vec::new();
    for replication in start..end {
        let mut stream = RandomStream::new(settings.seed, replication);
        let table = apply_continuity(&generate_table(design, &mut stream), CONTINUITY)?;
        for (acc, &method) in accumulators.iter_mut().zip(&settings.methods) {
            let est = estimate(
                method,
                &table,
                settings.alpha,
                settings.pbs_count,
                &mut stream,
            )?;
            let verdict = acc.record(&est, or_true);
            if keep_records {
                records.push(ReplicationRecord {
                    replication,
                    estimate: est,
                    verdict,
                });
            }
        }
    }
    Ok(BlockResult {
        accumulators,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table1() -> StudyDesign {
        StudyDesign::new(200, 0.5, 0.075, 0.225).unwrap()
    }

    #[test]
    fn design_validation() {
        assert!(StudyDesign::new(3, 0.5, 0.1, 0.2).is_err());
        assert!(StudyDesign::new(200, 1.0, 0.1, 0.2).is_err());
        assert!(StudyDesign::new(200, 0.5, 0.0, 0.2).is_err());
        assert!(StudyDesign::new(200, 0.5, 0.1, f64::NAN).is_err());
    }

    #[test]
    fn settings_validation() {
        let ok = SimulationSettings::new(10, 2, 0.05, 0);
        assert!(ok.validate().is_ok());
        assert!(SimulationSettings::new(0, 1000, 0.05, 0)
            .validate()
            .is_err());
        assert!(SimulationSettings::new(10, 1, 0.05, 0).validate().is_err());
        assert!(SimulationSettings::new(10, 1000, 1.5, 0)
            .validate()
            .is_err());
        assert!(ok.with_methods([]).validate().is_err());
    }

    #[test]
    fn cell_probability_values() {
        let p = cell_probabilities(&table1());
        let expected = [0.3875, 0.1125, 0.4625, 0.0375];
        for (x, y) in p.iter().zip(expected) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let expected_cells: Vec<f64> = p.iter().map(|q| 200.0 * q).collect();
        for (x, y) in expected_cells.iter().zip([77.5, 22.5, 92.5, 7.5]) {
            assert!((x - y).abs() < 1e-12);
        }
        let uniform = cell_probabilities(&StudyDesign::new(10, 0.5, 0.5, 0.5).unwrap());
        assert_eq!(uniform, [0.25; 4]);
    }

    #[test]
    fn true_or_values() {
        assert!((true_or(&table1()) - 0.27928).abs() < 5e-6);
        let t2 = StudyDesign::new(200, 0.5, 0.2667, 0.1333).unwrap();
        assert!((true_or(&t2) - 2.364721).abs() < 1e-6);
        assert_eq!(true_or(&StudyDesign::new(200, 0.5, 0.3, 0.3).unwrap()), 1.0);
    }

    #[test]
    fn generated_tables_sum_to_n() {
        let mut stream = RandomStream::new(1, 0);
        for _ in 0..50 {
            let t = generate_table(&table1(), &mut stream);
            assert_eq!(t.total(), 200.0);
        }
        assert_eq!(stream.consumed(), 50 * 400);
    }

    #[test]
    fn degenerate_design_fills_one_cell() {
        let d = StudyDesign {
            n: 37,
            p_exposure: 1.0,
            p_disease_exposed: 1.0,
            p_disease_unexposed: 0.5,
        };
        let t = generate_table(&d, &mut RandomStream::new(0, 0));
        assert_eq!(t.cells(), [0.0, 0.0, 0.0, 37.0]);
    }

    #[test]
    fn mean_cells_match_expectation() {
        let d = table1();
        let reps = 100_000u64;
        let mut sums = [0.0; 4];
        for i in 0..reps {
            let t = generate_table(&d, &mut RandomStream::new(77, i));
            for (s, c) in sums.iter_mut().zip(t.cells()) {
                *s += c;
            }
        }
        for (s, e) in sums.iter().zip([77.5, 22.5, 92.5, 7.5]) {
            assert!(
                (s / reps as f64 - e).abs() < 0.5,
                "{} vs {e}",
                s / reps as f64
            );
        }
    }

    #[test]
    fn single_replication() {
        let s = SimulationSettings::new(1, 50, 0.05, 9);
        let report = run_simulation(&table1(), &s).unwrap();
        for m in &report.summaries {
            assert_eq!(m.replication_count, 1);
            assert!(m.one_minus_coverage == 0.0 || m.one_minus_coverage == 1.0);
        }
    }

    #[test]
    fn stream_discipline() {
        let d = table1();
        let s = SimulationSettings::new(3, 100, 0.05, 5);
        assert_eq!(s.uniforms_per_replication(&d), 500);
        let s = s.with_methods([Method::Standard]);
        assert_eq!(s.uniforms_per_replication(&d), 400);
    }

    #[test]
    fn observer_replays_replications() {
        let d = table1();
        let s = SimulationSettings::new(600, 50, 0.05, 3)
            .with_methods([Method::PctlBoot, Method::Standard]);
        let mut records = Vec::new();
        let report = run_simulation_observed(&d, &s, |r| records.push(*r)).unwrap();
        assert_eq!(records.len(), 1200);
        assert_eq!(records[0].replication, 0);
        assert_eq!(records[0].estimate.method, Method::Standard);
        assert_eq!(records[1].estimate.method, Method::PctlBoot);
        assert_eq!(records[1199].replication, 599);

        // replication 517 replayed by hand
        let mut stream = RandomStream::new(3, 517);
        let t = apply_continuity(&generate_table(&d, &mut stream), 0.5).unwrap();
        let std = estimate(Method::Standard, &t, 0.05, 50, &mut stream).unwrap();
        let boot = estimate(Method::PctlBoot, &t, 0.05, 50, &mut stream).unwrap();
        assert_eq!(records[2 * 517].estimate, std);
        assert_eq!(records[2 * 517 + 1].estimate, boot);
        assert_eq!(stream.consumed(), s.uniforms_per_replication(&d));

        assert_eq!(report, run_simulation(&d, &s).unwrap());
    }

    #[test]
    fn thread_count_does_not_change_report() {
        let d = table1();
        let s = SimulationSettings::new(2000, 100, 0.05, 11);
        let run_with = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_simulation(&d, &s).unwrap())
        };
        let one = run_with(1);
        assert_eq!(one, run_with(3));
        assert_eq!(one, run_with(8));
    }
}
