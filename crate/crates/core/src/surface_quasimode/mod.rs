//! Surface quasimode `Λ_λ` as a sum of Euclidean quasimodes over lifted translates, with its
//! norm, defect and spectral width on a sampled surface grid.

mod cutoff;
mod eval;
mod field_io;
mod grid;

pub use cutoff::{cutoff_profile, CutoffState};
pub use eval::{SurfaceQuasimodeEval, CYLINDER_SEARCH_FACTOR};
pub use field_io::{FieldHeader, FieldKind, PolygonBlock, SampledField};
pub use grid::{
    sample_surface_field, surface_defect_norm_squared, surface_norm_squared, surface_norms, surface_spectral_width,
    PolygonGrid, SurfaceGrid, SurfaceNorms, DEFECT_POINTS_PER_WAVELENGTH, NORM_POINTS_PER_WAVELENGTH,
};

use thiserror::Error;

use crate::gaussian_wavepacket::WavepacketError;
use crate::linear_flow::FlowError;
use crate::surface_geometry::GeometryError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurfaceQuasimodeError {
    #[error("translate sum is not certified: {0}")]
    PreconditionNotCertified(String),
    #[error("grid spacing {spacing} exceeds the maximum {max} for this ℏ")]
    GridTooCoarse { spacing: f64, max: f64 },
    #[error("field has zero norm")]
    ZeroNorm,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("io: {0}")]
    Io(String),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Wavepacket(#[from] WavepacketError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl From<std::io::Error> for SurfaceQuasimodeError {
    fn from(e: std::io::Error) -> Self {
        SurfaceQuasimodeError::Io(e.to_string())
    }
}
