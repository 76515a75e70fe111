use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use serde_json::json;
use superscar_core::experiment_runner::to_json_string;
use superscar_core::gaussian_wavepacket::TimeWindow;
use superscar_core::linear_flow::{time_budget, TimeBudget};
use superscar_core::spectral_width::spectral_width_report;
use superscar_core::surface_geometry::TranslationSurface;
use superscar_core::surface_quasimode::{
    sample_surface_field, surface_spectral_width, SurfaceGrid, SurfaceQuasimodeEval, DEFECT_POINTS_PER_WAVELENGTH,
    NORM_POINTS_PER_WAVELENGTH,
};

use crate::args::{emit, execution, load_surface, LaunchArgs};
use crate::CliResult;

#[derive(Args, Debug, Clone)]
pub struct SurfaceArgs {
    #[arg(long)]
    pub surface: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub polygon: usize,
    #[command(flatten)]
    pub launch: LaunchArgs,
    /// Keep going when the tube is not certified inside its cylinder.
    #[arg(long)]
    pub allow_uncertified: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FieldArg {
    Value,
    Defect,
}

#[derive(Subcommand)]
pub enum QuasimodeCommand {
    /// Sample the field on the surface grid; writes `<out>` and its `.json` sidecar.
    Eval {
        #[command(flatten)]
        args: SurfaceArgs,
        #[arg(long, value_enum, default_value = "value")]
        field: FieldArg,
        #[arg(long, default_value_t = NORM_POINTS_PER_WAVELENGTH)]
        points_per_wavelength: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Surface norm, defect and width next to the Euclidean values.
    Norms {
        #[command(flatten)]
        args: SurfaceArgs,
        #[arg(long, default_value_t = DEFECT_POINTS_PER_WAVELENGTH)]
        points_per_wavelength: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn build(a: &SurfaceArgs) -> CliResult<(TranslationSurface, SurfaceQuasimodeEval, TimeBudget)> {
    let s = load_surface(&a.surface)?;
    let p = a.launch.params()?;
    let cyl = SurfaceQuasimodeEval::cylinder_for(&s, a.polygon, &p).map_err(|e| e.to_string())?;
    let budget =
        time_budget(p.hbar(), p.eps(), cyl.length, cyl.width, a.launch.t_constant).map_err(|e| e.to_string())?;
    let w = TimeWindow::bump(budget.t).map_err(|e| e.to_string())?;
    let e = SurfaceQuasimodeEval::with_cylinder(&s, a.polygon, p, w, cyl, !a.allow_uncertified)
        .map_err(|e| e.to_string())?;
    Ok((s, e, budget))
}

pub fn execute(cmd: QuasimodeCommand) -> CliResult<bool> {
    match cmd {
        QuasimodeCommand::Eval { args, field, points_per_wavelength, out } => {
            let (s, e, _) = build(&args)?;
            let g = SurfaceGrid::for_hbar(&s, args.launch.hbar, points_per_wavelength)
                .map_err(|e| e.to_string())?
                .with_execution(execution(args.launch.sequential));
            let (value, defect) = sample_surface_field(&e, &g).map_err(|e| e.to_string())?;
            let f = if field == FieldArg::Value { value } else { defect };
            f.write(&out).map_err(|e| e.to_string())?;
            println!("{}", out.display());
        }
        QuasimodeCommand::Norms { args, points_per_wavelength, out } => {
            let (s, e, budget) = build(&args)?;
            let g = SurfaceGrid::for_hbar(&s, args.launch.hbar, points_per_wavelength)
                .map_err(|e| e.to_string())?
                .with_execution(execution(args.launch.sequential));
            let surface = surface_spectral_width(&e, &g).map_err(|e| e.to_string())?;
            let euclidean = spectral_width_report(&e.params(), &e.window()).map_err(|e| e.to_string())?;
            let record = json!({
                "budget": budget,
                "translates": e.translates.len(),
                "certification": e.certification,
                "surface": surface,
                "euclidean": euclidean,
            });
            emit(out.as_ref(), to_json_string(&record).map_err(|e| e.to_string())?.as_bytes())?;
        }
    }
    Ok(true)
}
