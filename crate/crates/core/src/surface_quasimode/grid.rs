use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::eval::SurfaceQuasimodeEval;
use super::field_io::{FieldKind, PolygonBlock, SampledField};
use super::SurfaceQuasimodeError;
use crate::exec::{map_indexed, try_map_indexed, Execution};
use crate::gaussian_wavepacket::FieldValue;
use crate::spectral_width::{SpectralWidthReport, WidthMethod};
use crate::surface_geometry::{SurfacePoint, TranslationSurface, Vec2};

/// Minimum samples per wavelength `2πℏ` for norms.
pub const NORM_POINTS_PER_WAVELENGTH: f64 = 8.0;
/// Minimum samples per wavelength for defect norms.
pub const DEFECT_POINTS_PER_WAVELENGTH: f64 = 16.0;

/// Cell-centred samples of one polygon's bounding box; `mask` marks samples inside the polygon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonGrid {
    pub block: PolygonBlock,
    pub mask: Vec<bool>,
}

impl PolygonGrid {
    pub fn weight(&self) -> f64 {
        self.block.hx * self.block.hy
    }
}

/// Midpoint-rule sample grids on every polygon of a surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceGrid {
    pub polygons: Vec<PolygonGrid>,
    /// Largest actual spacing over all blocks and axes.
    pub spacing: f64,
    pub execution: Execution,
}

impl SurfaceGrid {
    /// Spacing at most `max_spacing` on each axis, cells tiling each bounding box exactly.
    pub fn new(surface: &TranslationSurface, max_spacing: f64) -> Result<Self, SurfaceQuasimodeError> {
        if !(max_spacing > 0.0 && max_spacing.is_finite()) {
            return Err(SurfaceQuasimodeError::Invalid(format!("grid spacing must be positive, got {max_spacing}")));
        }
        let mut polygons = Vec::with_capacity(surface.polygons.len());
        let mut spacing: f64 = 0.0;
        for (k, poly) in surface.polygons.iter().enumerate() {
            let (lo, hi) = poly.bounding_box();
            let ext = hi - lo;
            let nx = (ext.x / max_spacing).ceil().max(1.0) as usize;
            let ny = (ext.y / max_spacing).ceil().max(1.0) as usize;
            let block =
                PolygonBlock { polygon: k, origin: [lo.x, lo.y], nx, ny, hx: ext.x / nx as f64, hy: ext.y / ny as f64 };
            spacing = spacing.max(block.hx).max(block.hy);
            let mut mask = Vec::with_capacity(nx * ny);
            for j in 0..ny {
                for i in 0..nx {
                    mask.push(poly.strictly_contains(block.point(i, j)));
                }
            }
            polygons.push(PolygonGrid { block, mask });
        }
        Ok(Self { polygons, spacing, execution: Execution::default() })
    }

    /// Grid with `points_per_wavelength` samples per `2πℏ`.
    pub fn for_hbar(
        surface: &TranslationSurface,
        hbar: f64,
        points_per_wavelength: f64,
    ) -> Result<Self, SurfaceQuasimodeError> {
        Self::new(surface, TAU * hbar / points_per_wavelength)
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn len(&self) -> usize {
        self.polygons.iter().map(|g| g.block.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn check(&self, hbar: f64, points_per_wavelength: f64) -> Result<(), SurfaceQuasimodeError> {
        let max = TAU * hbar / points_per_wavelength;
        if self.spacing > max * (1.0 + 1e-12) {
            return Err(SurfaceQuasimodeError::GridTooCoarse { spacing: self.spacing, max });
        }
        Ok(())
    }

    /// `(block, row)` pairs in storage order.
    fn rows(&self) -> Vec<(usize, usize)> {
        self.polygons.iter().enumerate().flat_map(|(k, g)| (0..g.block.ny).map(move |j| (k, j))).collect()
    }

    /// Samples of `f` at every masked point, zero elsewhere, in storage order.
    pub fn sample<T, F>(&self, f: F) -> Result<Vec<T>, SurfaceQuasimodeError>
    where
        T: Send + Default + Clone,
        F: Fn(SurfacePoint) -> Result<T, SurfaceQuasimodeError> + Sync + Send,
    {
        let rows = self.rows();
        let per_row = try_map_indexed(self.execution, rows.len(), |r| {
            let (k, j) = rows[r];
            let g = &self.polygons[k];
            let mut out = vec![T::default(); g.block.nx];
            for (i, slot) in out.iter_mut().enumerate() {
                if g.mask[j * g.block.nx + i] {
                    *slot = f(SurfacePoint::new(g.block.polygon, g.block.point(i, j)))?;
                }
            }
            Ok::<_, SurfaceQuasimodeError>(out)
        })?;
        Ok(per_row.into_iter().flatten().collect())
    }

    /// Weighted sums `Σ w·f(x)` per component, reduced row by row in a fixed order.
    fn integrate<const N: usize, F>(&self, f: F) -> Result<[f64; N], SurfaceQuasimodeError>
    where
        F: Fn(SurfacePoint) -> Result<[f64; N], SurfaceQuasimodeError> + Sync + Send,
    {
        let rows = self.rows();
        let per_row = try_map_indexed(self.execution, rows.len(), |r| {
            let (k, j) = rows[r];
            let g = &self.polygons[k];
            let mut acc = [0.0; N];
            for i in 0..g.block.nx {
                if g.mask[j * g.block.nx + i] {
                    let v = f(SurfacePoint::new(g.block.polygon, g.block.point(i, j)))?;
                    for (a, x) in acc.iter_mut().zip(v) {
                        *a += x;
                    }
                }
            }
            Ok::<_, SurfaceQuasimodeError>((k, acc))
        })?;
        let mut total = [0.0; N];
        for (k, acc) in per_row {
            let w = self.polygons[k].weight();
            for (t, a) in total.iter_mut().zip(acc) {
                *t += w * a;
            }
        }
        Ok(total)
    }

    pub fn blocks(&self) -> Vec<PolygonBlock> {
        self.polygons.iter().map(|g| g.block.clone()).collect()
    }

    /// `∫|f|²` for an arbitrary field on the surface.
    pub fn norm_squared<F>(&self, f: F) -> Result<f64, SurfaceQuasimodeError>
    where
        F: Fn(SurfacePoint) -> Result<Complex64, SurfaceQuasimodeError> + Sync + Send,
    {
        Ok(self.integrate(|x| Ok([f(x)?.norm_sqr()]))?[0])
    }

    /// Nearest grid point's plane position in the chart of `polygon`.
    pub fn nearest(&self, polygon: usize, x: Vec2) -> Option<(usize, usize)> {
        let g = self.polygons.get(polygon)?;
        let b = &g.block;
        let i = ((x.x - b.origin[0]) / b.hx - 0.5).round();
        let j = ((x.y - b.origin[1]) / b.hy - 0.5).round();
        if i < 0.0 || j < 0.0 || i as usize >= b.nx || j as usize >= b.ny {
            return None;
        }
        Some((i as usize, j as usize))
    }
}

/// `‖Λ_λ‖²` and `‖(Δ+λ)Λ_λ‖²` on one set of samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceNorms {
    pub norm_sq: f64,
    pub defect_sq: f64,
    pub spacing: f64,
    pub samples: usize,
}

/// `Λ_λ` and `(Δ+λ)Λ_λ` on every grid row, masked, in storage order.
fn field_rows(eval: &SurfaceQuasimodeEval, grid: &SurfaceGrid) -> Vec<(usize, Vec<FieldValue>)> {
    let rows = grid.rows();
    map_indexed(grid.execution, rows.len(), |r| {
        let (k, j) = rows[r];
        let g = &grid.polygons[k];
        let b = &g.block;
        let mut out = vec![FieldValue::default(); b.nx];
        eval.add_field_on_line(b.polygon, b.point(0, j), Vec2::new(b.hx, 0.0), &mut out);
        for (i, f) in out.iter_mut().enumerate() {
            if !g.mask[j * b.nx + i] {
                *f = FieldValue::default();
            }
        }
        (k, out)
    })
}

fn row_norms(eval: &SurfaceQuasimodeEval, grid: &SurfaceGrid) -> (f64, f64) {
    let rows = field_rows(eval, grid);
    let (mut n, mut d) = (0.0, 0.0);
    for (k, out) in rows {
        let w = grid.polygons[k].weight();
        let (rn, rd) = out.iter().fold((0.0, 0.0), |(a, b), f| (a + f.value.norm_sqr(), b + f.defect.norm_sqr()));
        n += w * rn;
        d += w * rd;
    }
    (n, d)
}

pub fn surface_norms(eval: &SurfaceQuasimodeEval, grid: &SurfaceGrid) -> Result<SurfaceNorms, SurfaceQuasimodeError> {
    grid.check(eval.params().hbar(), DEFECT_POINTS_PER_WAVELENGTH)?;
    let (n, d) = row_norms(eval, grid);
    Ok(SurfaceNorms { norm_sq: n, defect_sq: d, spacing: grid.spacing, samples: grid.len() })
}

pub fn surface_norm_squared(eval: &SurfaceQuasimodeEval, grid: &SurfaceGrid) -> Result<f64, SurfaceQuasimodeError> {
    grid.check(eval.params().hbar(), NORM_POINTS_PER_WAVELENGTH)?;
    Ok(row_norms(eval, grid).0)
}

pub fn surface_defect_norm_squared(
    eval: &SurfaceQuasimodeEval,
    grid: &SurfaceGrid,
) -> Result<f64, SurfaceQuasimodeError> {
    Ok(surface_norms(eval, grid)?.defect_sq)
}

pub fn surface_spectral_width(
    eval: &SurfaceQuasimodeEval,
    grid: &SurfaceGrid,
) -> Result<SpectralWidthReport, SurfaceQuasimodeError> {
    let n = surface_norms(eval, grid)?;
    if !(n.norm_sq > 0.0) {
        return Err(SurfaceQuasimodeError::ZeroNorm);
    }
    let p = eval.params();
    let t = eval.window().t_scale;
    let width = (n.defect_sq / n.norm_sq).sqrt();
    Ok(SpectralWidthReport {
        hbar: p.hbar(),
        t,
        lambda: p.lambda(),
        norm_sq: n.norm_sq,
        defect_sq: n.defect_sq,
        width,
        width_times_t: width * t,
        method: WidthMethod::SurfaceGrid,
        norm_error: None,
        defect_error: None,
        overlap_cross_check: None,
    })
}

/// `Λ_λ` and `(Δ+λ)Λ_λ` sampled on the grid.
pub fn sample_surface_field(
    eval: &SurfaceQuasimodeEval,
    grid: &SurfaceGrid,
) -> Result<(SampledField, SampledField), SurfaceQuasimodeError> {
    grid.check(eval.params().hbar(), NORM_POINTS_PER_WAVELENGTH)?;
    let (v, d): (Vec<Complex64>, Vec<Complex64>) =
        field_rows(eval, grid).into_iter().flat_map(|(_, row)| row).map(|f| (f.value, f.defect)).unzip();
    let h = eval.params().hbar();
    Ok((
        SampledField::new(FieldKind::Value, h, grid.blocks(), v)?,
        SampledField::new(FieldKind::Defect, h, grid.blocks(), d)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_grid_tiles() {
        let s = TranslationSurface::square_torus(1.0);
        let g = SurfaceGrid::new(&s, 0.3).unwrap();
        assert_eq!(g.polygons[0].block.nx, 4);
        assert_eq!(g.spacing, 0.25);
        assert!(g.polygons[0].mask.iter().all(|m| *m));
        let area = g.norm_squared(|_| Ok(Complex64::new(1.0, 0.0))).unwrap();
        assert!((area - 1.0).abs() < 1e-15);
    }

    #[test]
    fn l_surface_mask_area() {
        let s = TranslationSurface::l_surface();
        let g = SurfaceGrid::new(&s, 0.01).unwrap();
        let area = g.norm_squared(|_| Ok(Complex64::new(1.0, 0.0))).unwrap();
        assert!((area - s.total_area).abs() < 1e-12, "{area}");
    }

    #[test]
    fn coarse_rejected() {
        let s = TranslationSurface::square_torus(1.0);
        let g = SurfaceGrid::new(&s, 0.1).unwrap();
        assert!(matches!(g.check(0.1, 8.0), Err(SurfaceQuasimodeError::GridTooCoarse { .. })));
        assert!(g.check(0.2, 8.0).is_ok());
    }

    #[test]
    fn execution_modes_agree() {
        let s = TranslationSurface::square_torus(1.0);
        let g = SurfaceGrid::new(&s, 0.01).unwrap();
        let f = |x: SurfacePoint| Ok(Complex64::new((7.0 * x.position.x).sin(), x.position.y.cos()));
        let a = g.clone().with_execution(Execution::Sequential).norm_squared(f).unwrap();
        let b = g.with_execution(Execution::Parallel).norm_squared(f).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
