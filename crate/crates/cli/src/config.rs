use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use oddsratio::report::OutputFormat;
use oddsratio::{ContingencyTable, Method, SimulationSettings, StudyDesign};
use serde::Deserialize;
use thiserror::Error;

pub const DEFAULT_P_EXPOSURE: f64 = 0.5;
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_MC: u64 = 200_000;
pub const DEFAULT_PBS: usize = 1_000;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_CONTINUITY: f64 = 0.5;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Clap(#[from] clap::Error),
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config file {path}: {source}")]
    File {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Mode {
    Estimate {
        table: ContingencyTable,
        continuity: f64,
    },
    Simulate {
        design: StudyDesign,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub settings: SimulationSettings,
    pub format: OutputFormat,
    pub threads: Option<usize>,
    pub dump_replications: Option<PathBuf>,
}

/// Odds-ratio point and interval estimation, and Monte Carlo coverage
/// studies of the estimators.
#[derive(Debug, Parser)]
#[command(name = "oddsratio", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate the odds ratio of one 2x2 table with every requested method.
    Estimate(EstimateArgs),
    /// Run a Monte Carlo study of a prospective design.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Flat TOML key/value file; keys mirror the flag names, flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Two-sided level; intervals have coverage 1 - alpha. [default: 0.05]
    #[arg(long)]
    alpha: Option<f64>,
    /// Parametric bootstrap draws per estimate. [default: 1000]
    #[arg(long)]
    pbs: Option<usize>,
    /// Random seed. [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated subset of standard,pctl-boot,pctl-calc,barendregt. [default: all]
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    /// markdown, csv or structured (JSON). [default: markdown]
    #[arg(long)]
    format: Option<OutputFormat>,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Unexposed, no disease.
    #[arg(long)]
    a: Option<f64>,
    /// Unexposed, disease.
    #[arg(long)]
    b: Option<f64>,
    /// Exposed, no disease.
    #[arg(long)]
    c: Option<f64>,
    /// Exposed, disease.
    #[arg(long)]
    d: Option<f64>,
    /// Added to every cell before estimation; 0 disables. [default: 0.5]
    #[arg(long)]
    continuity: Option<f64>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Subjects per replication.
    #[arg(long)]
    n: Option<u64>,
    /// P(E=1). [default: 0.5]
    #[arg(long)]
    p_exposure: Option<f64>,
    /// P(D=1 | E=1).
    #[arg(long)]
    p_d_exposed: Option<f64>,
    /// P(D=1 | E=0).
    #[arg(long)]
    p_d_unexposed: Option<f64>,
    /// Monte Carlo replications. [default: 200000]
    #[arg(long)]
    mc: Option<u64>,
    /// Worker threads; never changes the output.
    #[arg(long)]
    threads: Option<usize>,
    /// Write per-replication rows as CSV to this path.
    #[arg(long)]
    dump_replications: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct FileConfig {
    a: Option<f64>,
    b: Option<f64>,
    c: Option<f64>,
    d: Option<f64>,
    continuity: Option<f64>,
    n: Option<u64>,
    p_exposure: Option<f64>,
    p_d_exposed: Option<f64>,
    p_d_unexposed: Option<f64>,
    mc: Option<u64>,
    threads: Option<usize>,
    dump_replications: Option<PathBuf>,
    alpha: Option<f64>,
    pbs: Option<usize>,
    seed: Option<u64>,
    methods: Option<String>,
    format: Option<String>,
}

impl FileConfig {
    fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        toml::from_str(&text).map_err(|source| ConfigError::File {
            path: path.to_owned(),
            source,
        })
    }

    fn methods(&self) -> Result<Option<Vec<Method>>, ConfigError> {
        self.methods
            .as_deref()
            .map(|s| {
                s.split(',')
                    .map(|m| m.parse::<Method>().map_err(ConfigError::Usage))
                    .collect()
            })
            .transpose()
    }

    fn format(&self) -> Result<Option<OutputFormat>, ConfigError> {
        self.format
            .as_deref()
            .map(|s| s.parse().map_err(ConfigError::Usage))
            .transpose()
    }
}

fn required<T>(flag: Option<T>, file: Option<T>, name: &str) -> Result<T, ConfigError> {
    flag.or(file)
        .ok_or_else(|| ConfigError::Usage(format!("missing required value --{name}")))
}

fn usage(e: oddsratio::Error) -> ConfigError {
    ConfigError::Usage(e.to_string())
}

fn settings(
    common: CommonArgs,
    file: &FileConfig,
    mc: Option<u64>,
) -> Result<(SimulationSettings, OutputFormat), ConfigError> {
    let methods = match common.methods {
        Some(m) => Some(m),
        None => file.methods()?,
    }
    .unwrap_or_else(|| Method::ALL.to_vec());
    let format = match common.format {
        Some(f) => Some(f),
        None => file.format()?,
    }
    .unwrap_or_default();
    let settings = SimulationSettings::new(
        mc.or(file.mc).unwrap_or(DEFAULT_MC),
        common.pbs.or(file.pbs).unwrap_or(DEFAULT_PBS),
        common.alpha.or(file.alpha).unwrap_or(DEFAULT_ALPHA),
        common.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
    )
    .with_methods(methods);
    settings.validate().map_err(usage)?;
    Ok((settings, format))
}

/// Parses `argv` (program name first), merging in `--config` when given.
/// Flags override file values; defaults fill whatever is left.
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig, ConfigError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    match cli.command {
        Command::Estimate(args) => {
            let file = match &args.common.config {
                Some(path) => FileConfig::load(path)?,
                None => FileConfig::default(),
            };
            let table = ContingencyTable::new(
                required(args.a, file.a, "a")?,
                required(args.b, file.b, "b")?,
                required(args.c, file.c, "c")?,
                required(args.d, file.d, "d")?,
            )
            .map_err(usage)?;
            let continuity = args
                .continuity
                .or(file.continuity)
                .unwrap_or(DEFAULT_CONTINUITY);
            if !(continuity.is_finite() && continuity >= 0.0) {
                return Err(ConfigError::Usage(format!(
                    "--continuity must be a nonnegative number, got {continuity}"
                )));
            }
            let (settings, format) = settings(args.common, &file, None)?;
            Ok(RunConfig {
                mode: Mode::Estimate { table, continuity },
                settings,
                format,
                threads: None,
                dump_replications: None,
            })
        }
        Command::Simulate(args) => {
            let file = match &args.common.config {
                Some(path) => FileConfig::load(path)?,
                None => FileConfig::default(),
            };
            let design = StudyDesign::new(
                required(args.n, file.n, "n")?,
                args.p_exposure
                    .or(file.p_exposure)
                    .unwrap_or(DEFAULT_P_EXPOSURE),
                required(args.p_d_exposed, file.p_d_exposed, "p-d-exposed")?,
                required(args.p_d_unexposed, file.p_d_unexposed, "p-d-unexposed")?,
            )
            .map_err(usage)?;
            let threads = args.threads.or(file.threads);
            if threads == Some(0) {
                return Err(ConfigError::Usage("--threads must be at least 1".into()));
            }
            let dump_replications = args.dump_replications.or(file.dump_replications.clone());
            let (settings, format) = settings(args.common, &file, args.mc)?;
            Ok(RunConfig {
                mode: Mode::Simulate { design },
                settings,
                format,
                threads,
                dump_replications,
            })
        }
    }
}
