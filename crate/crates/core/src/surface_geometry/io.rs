use serde::{Deserialize, Serialize};

use super::{
    build_surface, EdgeIdentification, GeometryError, PlanarPolygon, TranslationSurface, Vec2, DEFAULT_TOL_GEOM,
};

/// On-disk surface description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceFile {
    pub polygons: Vec<Vec<[f64; 2]>>,
    pub identifications: Vec<EdgeIdentification>,
    #[serde(default = "default_tol")]
    pub tol_geom: f64,
}

fn default_tol() -> f64 {
    DEFAULT_TOL_GEOM
}

impl SurfaceFile {
    pub fn from_json(text: &str) -> Result<Self, GeometryError> {
        serde_json::from_str(text).map_err(|e| GeometryError::Format(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("surface file serializes")
    }

    pub fn build(&self) -> Result<TranslationSurface, GeometryError> {
        let polygons = self
            .polygons
            .iter()
            .map(|p| PlanarPolygon::new(p.iter().map(|&[x, y]| Vec2::new(x, y)).collect(), self.tol_geom))
            .collect::<Result<Vec<_>, _>>()?;
        build_surface(polygons, self.identifications.clone(), self.tol_geom)
    }

    pub fn from_surface(surface: &TranslationSurface) -> Self {
        Self {
            polygons: surface.polygons.iter().map(|p| p.vertices().iter().map(|v| [v.x, v.y]).collect()).collect(),
            identifications: surface.identifications.clone(),
            tol_geom: surface.tol_geom,
        }
    }
}

impl TranslationSurface {
    pub fn from_json(text: &str) -> Result<Self, GeometryError> {
        SurfaceFile::from_json(text)?.build()
    }

    pub fn to_json(&self) -> String {
        SurfaceFile::from_surface(self).to_json()
    }
}
