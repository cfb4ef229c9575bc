use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid cell value {value} for cell `{cell}`: must be finite and nonnegative")]
    InvalidCell { cell: char, value: f64 },
    #[error("table has an empty total")]
    EmptyTable,
    #[error("degenerate table: cell `{cell}` is zero (apply a continuity correction first)")]
    DegenerateTable { cell: char },
    #[error("probability {0} is outside the open interval (0, 1)")]
    InvalidProbability(f64),
    #[error("invalid study design: {0}")]
    InvalidDesign(String),
    #[error("invalid simulation settings: {0}")]
    InvalidSettings(String),
    #[error("cannot summarise an empty accumulator")]
    EmptyAccumulator,
    #[error("invalid continuity correction {0}")]
    InvalidContinuity(f64),
}
