//! Configuration-driven ℏ sweeps, power-law fits and result files.

mod config;
mod fit;
mod output;
mod sweep;

pub use config::{DirectionSpec, ExperimentConfig};
pub use fit::{fit_power_law, ScalingFit};
pub use output::{
    csv_rows, fit_columns, format_float, read_columns, read_csv, to_json_string, write_csv, write_results, CsvRow,
    OutputFiles, CSV_COLUMNS,
};
pub use sweep::{
    load_surface, resolve_direction, run_sweep, MomentumNumbers, RowData, RowOutcome, SweepResult, SweepRow,
    WidthNumbers,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunnerError {
    #[error("need at least 3 points for a fit, got {0}")]
    TooFewPoints(usize),
    #[error("log–log fit needs positive data, got ({x}, {y})")]
    NonPositiveData { x: f64, y: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("config: {0}")]
    Config(String),
    #[error("surface: {0}")]
    Surface(String),
    #[error("{0}")]
    Io(String),
}
