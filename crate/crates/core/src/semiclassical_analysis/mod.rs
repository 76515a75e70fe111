//! Momentum densities of quasimodes, Weyl matrix elements of momentum symbols, Dirac-comb limits,
//! and the folded quasimode on a rational billiard.

mod density;
mod folded;
mod symbols;

pub use density::{
    euclidean_density_value, euclidean_support_box, momentum_density_closed_form, momentum_density_closed_form_on,
    momentum_density_from_field, sample_euclidean_field, DensityRoute, DftOptions, MomentumDensity, PolarGrid,
};
pub use folded::{folded_momentum_measure, neumann_defect, FoldedQuasimode, NeumannReport};
pub use symbols::{
    dirac_limit_error, localization_mass, weyl_matrix_element, DiracComb, DiracLimitTable, MomentumSymbol,
    DIRAC_ERROR_FLOOR,
};

use thiserror::Error;

use crate::gaussian_wavepacket::WavepacketError;
use crate::surface_geometry::GeometryError;
use crate::surface_quasimode::SurfaceQuasimodeError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("field has zero norm")]
    ZeroField,
    #[error("point ({x}, {y}) lies outside the polygon")]
    PointOutsidePolygon { x: f64, y: f64 },
    #[error("grid spacing {spacing} exceeds the maximum {max} for this ℏ")]
    GridTooCoarse { spacing: f64, max: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Surface(#[from] SurfaceQuasimodeError),
    #[error(transparent)]
    Wavepacket(#[from] WavepacketError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
