use serde::{Deserialize, Serialize};

use super::{fit_power_law, ExperimentConfig, RunnerError, ScalingFit};
use crate::exec::map_indexed;
use crate::gaussian_wavepacket::{SemiclassicalParams, TimeWindow};
use crate::linear_flow::{search_periodic_directions, time_budget_with_exponent, BudgetConstraint, UnitDirection};
use crate::semiclassical_analysis::{localization_mass, momentum_density_from_field, DftOptions};
use crate::spectral_width::spectral_width_report;
use crate::surface_geometry::{SurfaceFile, SurfacePoint, TranslationSurface, Vec2};
use crate::surface_quasimode::{sample_surface_field, surface_spectral_width, SurfaceGrid, SurfaceQuasimodeEval};

/// Width, norms and `T` of one quasimode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthNumbers {
    pub norm_sq: f64,
    pub defect_sq: f64,
    pub width: f64,
    pub width_times_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumNumbers {
    pub radius: f64,
    /// Mass of the normalised momentum density in `B(ξ₀, radius)`.
    pub localization_mass: f64,
    pub peak: [f64; 2],
}

/// Everything computed at one `ℏ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowData {
    pub t: f64,
    pub binding: BudgetConstraint,
    pub lambda: f64,
    pub cylinder_length: f64,
    pub cylinder_width: f64,
    pub translates: usize,
    pub certification_max_transverse: f64,
    pub euclidean: WidthNumbers,
    pub surface: WidthNumbers,
    pub momentum: Option<MomentumNumbers>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub hbar: f64,
    #[serde(flatten)]
    pub outcome: RowOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowOutcome {
    Ok(Box<RowData>),
    Error(String),
}

impl SweepRow {
    pub fn data(&self) -> Option<&RowData> {
        match &self.outcome {
            RowOutcome::Ok(d) => Some(d),
            RowOutcome::Error(_) => None,
        }
    }

    pub fn error(&self) -> Option<&str> {
        match &self.outcome {
            RowOutcome::Ok(_) => None,
            RowOutcome::Error(e) => Some(e),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: ExperimentConfig,
    pub config_hash: String,
    /// Direction actually used, after resolving `"auto"`.
    pub xi0: [f64; 2],
    pub rows: Vec<SweepRow>,
    /// Surface width against `λ` over the successful rows.
    pub width_fit: Option<ScalingFit>,
}

impl SweepResult {
    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.data().is_some())
    }
}

pub fn load_surface(config: &ExperimentConfig) -> Result<TranslationSurface, RunnerError> {
    let text =
        std::fs::read_to_string(&config.surface).map_err(|e| RunnerError::Io(format!("{}: {e}", config.surface)))?;
    SurfaceFile::from_json(&text).and_then(|f| f.build()).map_err(|e| RunnerError::Surface(e.to_string()))
}

/// Explicit `ξ₀`, or the shortest periodic direction through `x₀` (ties broken by angle).
pub fn resolve_direction(
    config: &ExperimentConfig,
    surface: &TranslationSurface,
) -> Result<UnitDirection, RunnerError> {
    match &config.xi0 {
        super::DirectionSpec::Vector(v) => {
            UnitDirection::new(Vec2::new(v[0], v[1])).map_err(|e| RunnerError::Config(e.to_string()))
        }
        super::DirectionSpec::Keyword(_) => {
            let bound = config.auto_length_bound.unwrap_or(4.0 * surface.total_area.sqrt());
            let x0 = SurfacePoint::new(config.polygon, Vec2::new(config.x0[0], config.x0[1]));
            search_periodic_directions(surface, bound, x0)
                .first()
                .map(|(d, _)| *d)
                .ok_or_else(|| RunnerError::Config(format!("no periodic direction of length ≤ {bound}")))
        }
    }
}

/// Runs every `ℏ` of the grid; a failing row is recorded and the others continue.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult, RunnerError> {
    config.validate()?;
    let surface = load_surface(config)?;
    let xi0 = resolve_direction(config, &surface)?;
    let rows = map_indexed(config.execution, config.hbar.len(), |i| {
        let hbar = config.hbar[i];
        let outcome = match run_row(config, &surface, xi0, hbar) {
            Ok(d) => RowOutcome::Ok(Box::new(d)),
            Err(e) => {
                log::warn!("row hbar = {hbar} failed: {e}");
                RowOutcome::Error(e)
            }
        };
        SweepRow { hbar, outcome }
    });
    let pts: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.data().map(|d| (d.lambda, d.surface.width))).collect();
    let width_fit = fit_power_law(&pts).ok();
    let v = xi0.vector();
    Ok(SweepResult { config: config.clone(), config_hash: config.hash(), xi0: [v.x, v.y], rows, width_fit })
}

fn run_row(
    config: &ExperimentConfig,
    surface: &TranslationSurface,
    xi0: UnitDirection,
    hbar: f64,
) -> Result<RowData, String> {
    let x0 = Vec2::new(config.x0[0], config.x0[1]);
    let params = SemiclassicalParams::new(hbar, config.eps, x0, xi0).map_err(|e| e.to_string())?;
    let cyl = SurfaceQuasimodeEval::cylinder_for(surface, config.polygon, &params).map_err(|e| e.to_string())?;
    let budget =
        time_budget_with_exponent(hbar, config.eps, cyl.length, cyl.width, config.t_constant, config.t_exponent())
            .map_err(|e| e.to_string())?;
    let window = TimeWindow::new(budget.t, 1.0, config.window).map_err(|e| e.to_string())?;
    let (length, width) = (cyl.length, cyl.width);
    let eval = SurfaceQuasimodeEval::with_cylinder(surface, config.polygon, params, window, cyl, true)
        .map_err(|e| e.to_string())?;

    let eucl = spectral_width_report(&params, &window).map_err(|e| e.to_string())?;
    let grid = SurfaceGrid::for_hbar(surface, hbar, config.points_per_wavelength)
        .map_err(|e| e.to_string())?
        .with_execution(config.execution);
    let surf = surface_spectral_width(&eval, &grid).map_err(|e| e.to_string())?;

    let momentum = if config.momentum {
        let g = SurfaceGrid::for_hbar(surface, hbar, config.momentum_points_per_wavelength)
            .map_err(|e| e.to_string())?
            .with_execution(config.execution);
        let (field, _) = sample_surface_field(&eval, &g).map_err(|e| e.to_string())?;
        let opts = DftOptions { pad: 1, execution: config.execution };
        let d = momentum_density_from_field(&field, &opts).map_err(|e| e.to_string())?;
        let radius = config.localization_factor * hbar.sqrt();
        let peak = d.argmax();
        Some(MomentumNumbers {
            radius,
            localization_mass: localization_mass(&d, xi0.vector(), radius),
            peak: [peak.x, peak.y],
        })
    } else {
        None
    };

    Ok(RowData {
        t: budget.t,
        binding: budget.binding,
        lambda: params.lambda(),
        cylinder_length: length,
        cylinder_width: width,
        translates: eval.translates.len(),
        certification_max_transverse: eval.certification.max_transverse,
        euclidean: WidthNumbers {
            norm_sq: eucl.norm_sq,
            defect_sq: eucl.defect_sq,
            width: eucl.width,
            width_times_t: eucl.width_times_t,
        },
        surface: WidthNumbers {
            norm_sq: surf.norm_sq,
            defect_sq: surf.defect_sq,
            width: surf.width,
            width_times_t: surf.width_times_t,
        },
        momentum,
    })
}
