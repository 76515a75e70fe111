use std::path::PathBuf;

use clap::{Subcommand, ValueEnum};
use superscar_core::exec::map_indexed;
use superscar_core::experiment_runner::{write_csv, CsvRow};
use superscar_core::gaussian_wavepacket::{SemiclassicalParams, TimeWindow, WindowKind};
use superscar_core::linear_flow::UnitDirection;
use superscar_core::spectral_width::spectral_width_report;
use superscar_core::surface_geometry::Vec2;

use crate::args::{emit, execution};
use crate::CliResult;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum WindowArg {
    Bump,
}

impl From<WindowArg> for WindowKind {
    fn from(w: WindowArg) -> Self {
        match w {
            WindowArg::Bump => WindowKind::Bump,
        }
    }
}

#[derive(Subcommand)]
pub enum SpectralCommand {
    /// Euclidean norm, defect and width over an ℏ grid with `T = c·ℏ^a`.
    Sweep {
        /// Comma-separated ℏ values.
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        hbar_grid: Vec<f64>,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, value_enum, default_value = "bump")]
        window: WindowArg,
        #[arg(long, default_value_t = 1.0)]
        t_constant: f64,
        /// Exponent `a`; defaults to `3/4 + 2ε`.
        #[arg(long)]
        t_exponent: Option<f64>,
        #[arg(long)]
        sequential: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn execute(cmd: SpectralCommand) -> CliResult<bool> {
    let SpectralCommand::Sweep { hbar_grid, epsilon, window, t_constant, t_exponent, sequential, out } = cmd;
    let hs = hbar_grid;
    if hs.is_empty() {
        return Err("empty ℏ grid".into());
    }
    let a = t_exponent.unwrap_or(0.75 + 2.0 * epsilon);
    let rows = map_indexed(execution(sequential), hs.len(), |i| -> Result<CsvRow, String> {
        let h = hs[i];
        let p = SemiclassicalParams::new(h, epsilon, Vec2::zeros(), UnitDirection::horizontal())
            .map_err(|e| e.to_string())?;
        let t = t_constant * h.powf(a);
        let w = TimeWindow::new(t, 1.0, window.into()).map_err(|e| e.to_string())?;
        let r = spectral_width_report(&p, &w).map_err(|e| e.to_string())?;
        Ok(CsvRow {
            hbar: h,
            t,
            lambda: p.lambda(),
            norm_sq: r.norm_sq,
            defect_sq: r.defect_sq,
            width: r.width,
            width_times_t: r.width_times_t,
        })
    });
    let mut ok = Vec::new();
    let mut all_ok = true;
    for (h, r) in hs.iter().zip(rows) {
        match r {
            Ok(row) => ok.push(row),
            Err(e) => {
                eprintln!("hbar {h}: error: {e}");
                all_ok = false;
            }
        }
    }
    let mut buf = Vec::new();
    write_csv(&ok, &mut buf).map_err(|e| e.to_string())?;
    emit(out.as_ref(), &buf)?;
    Ok(all_ok)
}
