use std::path::PathBuf;

use clap::Subcommand;
use serde_json::json;
use superscar_core::experiment_runner::to_json_string;
use superscar_core::linear_flow::{find_cylinder, search_periodic_directions, trace_flow};
use superscar_core::surface_geometry::SurfacePoint;

use crate::args::{direction, emit, load_surface, parse_pair, vec2};
use crate::CliResult;

#[derive(Subcommand)]
pub enum FlowCommand {
    /// Trace a straight line until it reaches `length` or a cone point.
    Trace {
        #[arg(long)]
        surface: PathBuf,
        #[arg(long, default_value_t = 0)]
        polygon: usize,
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        x0: [f64; 2],
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        dir: [f64; 2],
        #[arg(long)]
        length: f64,
        #[arg(long, default_value_t = 1e-9)]
        hit_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cylinder of closed orbits through a point.
    Cylinder {
        #[arg(long)]
        surface: PathBuf,
        #[arg(long, default_value_t = 0)]
        polygon: usize,
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        x0: [f64; 2],
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        dir: [f64; 2],
        #[arg(long)]
        max_length: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Periodic directions through a point with orbit length at most `bound`.
    Search {
        #[arg(long)]
        surface: PathBuf,
        #[arg(long, default_value_t = 0)]
        polygon: usize,
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        x0: [f64; 2],
        #[arg(long)]
        bound: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn execute(cmd: FlowCommand) -> CliResult<bool> {
    match cmd {
        FlowCommand::Trace { surface, polygon, x0, dir, length, hit_tol, out } => {
            let s = load_surface(&surface)?;
            let tr = trace_flow(&s, SurfacePoint::new(polygon, vec2(x0)), direction(dir)?, length, hit_tol)
                .map_err(|e| e.to_string())?;
            emit(out.as_ref(), to_json_string(&tr).map_err(|e| e.to_string())?.as_bytes())?;
        }
        FlowCommand::Cylinder { surface, polygon, x0, dir, max_length, out } => {
            let s = load_surface(&surface)?;
            let c = find_cylinder(&s, direction(dir)?, SurfacePoint::new(polygon, vec2(x0)), max_length)
                .map_err(|e| e.to_string())?;
            emit(out.as_ref(), to_json_string(&c).map_err(|e| e.to_string())?.as_bytes())?;
        }
        FlowCommand::Search { surface, polygon, x0, bound, out } => {
            let s = load_surface(&surface)?;
            let found = search_periodic_directions(&s, bound, SurfacePoint::new(polygon, vec2(x0)));
            let records: Vec<_> = found
                .iter()
                .map(|(d, c)| json!({ "direction": [d.vector().x, d.vector().y], "cylinder": c }))
                .collect();
            emit(out.as_ref(), to_json_string(&records).map_err(|e| e.to_string())?.as_bytes())?;
        }
    }
    Ok(true)
}
