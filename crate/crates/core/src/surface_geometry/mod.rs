//! Planar polygons glued by translations, cone points, and rational-polygon unfoldings.

mod io;
mod polygon;
mod surface;
mod unfolding;

pub use io::SurfaceFile;
pub use polygon::{cross, PlanarPolygon};
pub use surface::{
    build_surface, cone_angles, ConePoint, EdgeIdentification, EdgeRef, SurfacePoint, TranslationSurface,
};
pub use unfolding::{
    fold_point, lcm_of, rational_angle, unfold_rational_polygon, unfold_rational_polygon_with_cap, DihedralUnfolding,
    Isometry, DEFAULT_UNFOLD_CAP,
};

use thiserror::Error;

pub type Vec2 = nalgebra::Vector2<f64>;
pub type Mat2 = nalgebra::Matrix2<f64>;

pub const DEFAULT_TOL_GEOM: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(String),
    #[error("pairing mismatch between {a:?} and {b:?}: {reason}")]
    PairingMismatch { a: EdgeRef, b: EdgeRef, reason: String },
    #[error("edge pairing is not a perfect matching: {0}")]
    NonMatching(String),
    #[error("vertex class did not close after {0} steps")]
    VertexWalkOverflow(usize),
    #[error("cone angle {angle} at class {class} is not a positive multiple of 2π")]
    InvalidConeAngle { class: usize, angle: f64 },
    #[error("angle {angle} at vertex {vertex} is not a rational multiple of π")]
    IrrationalAngle { vertex: usize, angle: f64 },
    #[error("unfolding group order exceeds cap {0}")]
    UnfoldOverflow(usize),
    #[error("point ({x}, {y}) is outside the surface")]
    PointOutsideSurface { x: f64, y: f64 },
    #[error("invalid surface description: {0}")]
    Format(String),
}
