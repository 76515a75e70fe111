//! `superscar` command-line driver.

mod args;
mod flow;
mod measure;
mod quasimode;
mod spectral;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use superscar_core::experiment_runner::{fit_columns, run_sweep, to_json_string, write_results, ExperimentConfig};

pub type CliResult<T> = Result<T, String>;

#[derive(Parser)]
#[command(name = "superscar", version, about = "Gaussian quasimodes on translation surfaces and rational billiards")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an ℏ sweep described by a TOML config; writes sweep.csv and manifest.json.
    Run {
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Power-law fit of one CSV column against another.
    Fit {
        csv: PathBuf,
        #[arg(long, default_value = "lambda")]
        x: String,
        #[arg(long, default_value = "width")]
        y: String,
    },
    /// Straight-line flow on a translation surface.
    #[command(subcommand)]
    Flow(flow::FlowCommand),
    /// Euclidean spectral-width computations.
    #[command(subcommand)]
    Spectral(spectral::SpectralCommand),
    /// Surface quasimode fields and norms.
    #[command(subcommand, name = "surface-quasimode")]
    SurfaceQuasimode(quasimode::QuasimodeCommand),
    /// Momentum-space measurements on sampled fields and folded billiard quasimodes.
    #[command(subcommand)]
    Measure(measure::MeasureCommand),
}

fn run(config: PathBuf, out: Option<PathBuf>) -> CliResult<bool> {
    let mut c = ExperimentConfig::from_path(&config).map_err(|e| e.to_string())?;
    if let Some(o) = out {
        c.output_dir = o.to_string_lossy().into_owned();
    }
    let result = run_sweep(&c).map_err(|e| e.to_string())?;
    let files = write_results(&result, PathBuf::from(&c.output_dir).as_path()).map_err(|e| e.to_string())?;
    for row in &result.rows {
        match row.error() {
            Some(e) => eprintln!("hbar {}: error: {e}", row.hbar),
            None => {
                let d = row.data().expect("row has data");
                eprintln!(
                    "hbar {}: T {:.6e}, width {:.6e}, width·T {:.4}",
                    row.hbar, d.t, d.surface.width, d.surface.width_times_t
                );
            }
        }
    }
    if let Some(f) = &result.width_fit {
        eprintln!("width ~ lambda^{:.4}", f.exponent);
    }
    println!("{}", files.csv.display());
    println!("{}", files.manifest.display());
    Ok(result.all_ok())
}

fn fit(csv: PathBuf, x: &str, y: &str) -> CliResult<bool> {
    let f = std::fs::File::open(&csv).map_err(|e| format!("{}: {e}", csv.display()))?;
    let fit = fit_columns(f, x, y).map_err(|e| e.to_string())?;
    print!("{}", to_json_string(&fit).map_err(|e| e.to_string())?);
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, out } => run(config, out),
        Command::Fit { csv, x, y } => fit(csv, &x, &y),
        Command::Flow(c) => flow::execute(c),
        Command::Spectral(c) => spectral::execute(c),
        Command::SurfaceQuasimode(c) => quasimode::execute(c),
        Command::Measure(c) => measure::execute(c),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
