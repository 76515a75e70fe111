//! Shared argument types and output helpers.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;
use superscar_core::exec::Execution;
use superscar_core::gaussian_wavepacket::SemiclassicalParams;
use superscar_core::linear_flow::UnitDirection;
use superscar_core::surface_geometry::{TranslationSurface, Vec2};

use crate::CliResult;

/// `"x,y"` as a pair of floats.
pub fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(format!("expected \"x,y\", got {s:?}"));
    }
    let p = |t: &str| t.parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok([p(parts[0])?, p(parts[1])?])
}

pub fn vec2(p: [f64; 2]) -> Vec2 {
    Vec2::new(p[0], p[1])
}

pub fn direction(p: [f64; 2]) -> CliResult<UnitDirection> {
    UnitDirection::new(vec2(p)).map_err(|e| e.to_string())
}

pub fn load_surface(path: &Path) -> CliResult<TranslationSurface> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    TranslationSurface::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Writes to `out` or stdout.
pub fn emit(out: Option<&PathBuf>, bytes: &[u8]) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| format!("{}: {e}", p.display())),
        None => std::io::stdout().write_all(bytes).map_err(|e| e.to_string()),
    }
}

pub fn execution(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

/// Launch data of a quasimode.
#[derive(Args, Debug, Clone)]
pub struct LaunchArgs {
    /// Starting point `x,y` in polygon coordinates.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub x0: [f64; 2],
    /// Launch direction `a,b`; normalised.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub xi0: [f64; 2],
    #[arg(long)]
    pub hbar: f64,
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    /// Constant `c` of the time-scale term `c·ℏ^{3/4+2ε}`.
    #[arg(long, default_value_t = 1.0)]
    pub t_constant: f64,
    /// Run single-threaded.
    #[arg(long)]
    pub sequential: bool,
}

impl LaunchArgs {
    pub fn params(&self) -> CliResult<SemiclassicalParams> {
        SemiclassicalParams::new(self.hbar, self.epsilon, vec2(self.x0), direction(self.xi0)?)
            .map_err(|e| e.to_string())
    }
}
