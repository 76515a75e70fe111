use std::path::{Path, PathBuf};

use clap::Subcommand;
use superscar_core::experiment_runner::format_float;
use superscar_core::gaussian_wavepacket::TimeWindow;
use superscar_core::linear_flow::time_budget;
use superscar_core::semiclassical_analysis::{
    localization_mass, momentum_density_from_field, neumann_defect, weyl_matrix_element, DftOptions, DiracComb,
    FoldedQuasimode, MomentumDensity, MomentumSymbol,
};
use superscar_core::surface_geometry::{unfold_rational_polygon, PlanarPolygon};
use superscar_core::surface_quasimode::{SampledField, SurfaceQuasimodeEval, NORM_POINTS_PER_WAVELENGTH};

use crate::args::{emit, execution, parse_pair, vec2, LaunchArgs};
use crate::CliResult;

#[derive(Subcommand)]
pub enum MeasureCommand {
    /// Momentum density of a sampled field as `xi1,xi2,mass` rows.
    Momentum {
        field: PathBuf,
        /// Zero-extension factor of the DFT.
        #[arg(long, default_value_t = 1)]
        pad: usize,
        /// Cells with smaller mass are omitted.
        #[arg(long, default_value_t = 1e-12)]
        threshold: f64,
        /// Reports the mass in `B(center, radius)` on stderr.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true, requires = "radius")]
        center: Option<[f64; 2]>,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        sequential: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Weyl matrix elements of the standard symbol suite against a single atom at `xi0`.
    Weyl {
        field: PathBuf,
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        xi0: [f64; 2],
        #[arg(long, default_value_t = 1)]
        pad: usize,
        #[arg(long)]
        sequential: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Folded billiard quasimode: atom masses of the dihedral comb and the Neumann defect.
    Fold {
        /// Polygon vertices `x,y;x,y;...`, counterclockwise.
        #[arg(long, allow_hyphen_values = true)]
        vertices: String,
        /// Angle denominators `q_i`, comma-separated; detected when omitted.
        #[arg(long, value_delimiter = ',')]
        denominators: Vec<u32>,
        #[command(flatten)]
        launch: LaunchArgs,
        #[arg(long, default_value_t = 1)]
        pad: usize,
        /// Boundary samples per edge for the Neumann defect.
        #[arg(long, default_value_t = 200)]
        edge_samples: usize,
        /// Writes the folded field in the binary field format.
        #[arg(long)]
        field_out: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn density(field: &Path, pad: usize, sequential: bool) -> CliResult<MomentumDensity> {
    let f = SampledField::read(field).map_err(|e| e.to_string())?;
    let opts = DftOptions { pad, execution: execution(sequential) };
    momentum_density_from_field(&f, &opts).map_err(|e| e.to_string())
}

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| e.to_string())?;
    for r in rows {
        w.write_record(r).map_err(|e| e.to_string())?;
    }
    w.into_inner().map_err(|e| e.to_string())
}

fn parse_vertices(s: &str) -> CliResult<PlanarPolygon> {
    let pts = s.split(';').map(|p| parse_pair(p).map(vec2)).collect::<Result<Vec<_>, _>>()?;
    PlanarPolygon::new(pts, 1e-9).map_err(|e| e.to_string())
}

pub fn execute(cmd: MeasureCommand) -> CliResult<bool> {
    match cmd {
        MeasureCommand::Momentum { field, pad, threshold, center, radius, sequential, out } => {
            let d = density(&field, pad, sequential)?;
            let rows = d
                .points
                .iter()
                .zip(&d.masses)
                .filter(|(_, m)| **m >= threshold)
                .map(|(p, m)| vec![format_float(p.x), format_float(p.y), format_float(*m)])
                .collect();
            emit(out.as_ref(), &csv_text(&["xi1", "xi2", "mass"], rows)?)?;
            let peak = d.argmax();
            eprintln!("peak ({}, {}), resolution {}", peak.x, peak.y, d.resolution);
            if let (Some(c), Some(r)) = (center, radius) {
                eprintln!("mass in B(({}, {}), {r}) = {}", c[0], c[1], localization_mass(&d, vec2(c), r));
            }
        }
        MeasureCommand::Weyl { field, xi0, pad, sequential, out } => {
            let d = density(&field, pad, sequential)?;
            let xi = vec2(xi0);
            let xi = xi / xi.norm();
            let comb = DiracComb::single(xi);
            let rows = MomentumSymbol::suite(xi)
                .iter()
                .map(|a| {
                    let v = weyl_matrix_element(a, &d);
                    let c = comb.pair(a);
                    vec![a.name(), format_float(v), format_float(c), format_float((v - c).abs())]
                })
                .collect();
            emit(out.as_ref(), &csv_text(&["symbol", "value", "comb", "error"], rows)?)?;
        }
        MeasureCommand::Fold { vertices, denominators, launch, pad, edge_samples, field_out, out } => {
            let poly = parse_vertices(&vertices)?;
            let u = unfold_rational_polygon(&poly, &denominators, 1e-9).map_err(|e| e.to_string())?;
            let p = launch.params()?;
            let cyl = SurfaceQuasimodeEval::cylinder_for(&u.surface, 0, &p).map_err(|e| e.to_string())?;
            let t =
                time_budget(p.hbar(), p.eps(), cyl.length, cyl.width, launch.t_constant).map_err(|e| e.to_string())?.t;
            let folded = FoldedQuasimode::new(u, p, TimeWindow::bump(t).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            let spacing = std::f64::consts::TAU * p.hbar() / NORM_POINTS_PER_WAVELENGTH;
            let field = folded.sample(spacing).map_err(|e| e.to_string())?;
            if let Some(path) = &field_out {
                field.write(path).map_err(|e| e.to_string())?;
            }
            let opts = DftOptions { pad, execution: execution(launch.sequential) };
            let d = momentum_density_from_field(&field, &opts).map_err(|e| e.to_string())?;
            let atoms = DiracComb::dihedral(&folded.unfolding, p.xi0().vector()).distinct_atoms(1e-6);
            let mut sep = f64::INFINITY;
            for i in 0..atoms.len() {
                for j in i + 1..atoms.len() {
                    sep = sep.min((atoms[i].0 - atoms[j].0).norm());
                }
            }
            let r = if atoms.len() > 1 { 0.5 * sep } else { 5.0 * p.hbar().sqrt() };
            let rows = atoms
                .iter()
                .map(|(a, w)| {
                    vec![
                        format_float(a.x),
                        format_float(a.y),
                        format_float(*w),
                        format_float(localization_mass(&d, *a, r)),
                    ]
                })
                .collect();
            emit(out.as_ref(), &csv_text(&["xi1", "xi2", "weight", "mass"], rows)?)?;
            let n = neumann_defect(&folded, edge_samples).map_err(|e| e.to_string())?;
            eprintln!("T {t}, atoms {}, ball radius {r}, neumann defect {}", atoms.len(), n.defect);
        }
    }
    Ok(true)
}
