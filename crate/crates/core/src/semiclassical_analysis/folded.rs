use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{momentum_density_from_field, AnalysisError, DftOptions, MomentumDensity};
use crate::gaussian_wavepacket::{FieldValue, SemiclassicalParams, TimeWindow};
use crate::surface_geometry::{DihedralUnfolding, SurfacePoint, Vec2};
use crate::surface_quasimode::{
    FieldKind, PolygonBlock, SampledField, SurfaceQuasimodeEval, NORM_POINTS_PER_WAVELENGTH,
};

/// `Ψ_λ(x) = Σ_{g∈D} Λ_λ(gx)` on the rational polygon `P`.
#[derive(Debug, Clone)]
pub struct FoldedQuasimode {
    pub unfolding: DihedralUnfolding,
    pub eval: SurfaceQuasimodeEval,
}

impl FoldedQuasimode {
    /// `params.x0()` is a point of `P`; the quasimode is launched from it in copy 0.
    pub fn new(
        unfolding: DihedralUnfolding,
        params: SemiclassicalParams,
        window: TimeWindow,
    ) -> Result<Self, AnalysisError> {
        let x0 = params.x0();
        if !unfolding.base_polygon.contains(x0, unfolding.surface.tol_geom) {
            return Err(AnalysisError::PointOutsidePolygon { x: x0.x, y: x0.y });
        }
        let g0 = unfolding.group_elements[0];
        let p = params.with_x0(g0.apply(x0)).with_xi0(
            crate::linear_flow::UnitDirection::new(g0.apply_linear(params.xi0().vector()))
                .map_err(|e| AnalysisError::Invalid(e.to_string()))?,
        );
        let eval = SurfaceQuasimodeEval::new(&unfolding.surface, 0, p, window)?;
        Ok(Self { unfolding, eval })
    }

    pub fn hbar(&self) -> f64 {
        self.eval.params().hbar()
    }

    /// `Ψ_λ(x)` for `x ∈ P`.
    pub fn value(&self, x: Vec2) -> Result<Complex64, AnalysisError> {
        if !self.unfolding.base_polygon.contains(x, self.unfolding.surface.tol_geom) {
            return Err(AnalysisError::PointOutsidePolygon { x: x.x, y: x.y });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, g) in self.unfolding.group_elements.iter().enumerate() {
            acc += self.eval.value(SurfacePoint::new(k, g.apply(x)))?;
        }
        Ok(acc)
    }

    /// Adds `Ψ_λ` at `start + i·delta` into `out`; the points need not lie in `P`.
    pub fn add_on_line(&self, start: Vec2, delta: Vec2, out: &mut [FieldValue]) {
        for (k, g) in self.unfolding.group_elements.iter().enumerate() {
            self.eval.add_field_on_line(k, g.apply(start), g.apply_linear(delta), out);
        }
    }

    /// Cell-centred samples of `Ψ_λ` over the bounding box of `P`, zero outside `P`.
    pub fn sample(&self, max_spacing: f64) -> Result<SampledField, AnalysisError> {
        let max = TAU * self.hbar() / NORM_POINTS_PER_WAVELENGTH;
        if !(max_spacing > 0.0) {
            return Err(AnalysisError::Invalid(format!("spacing must be positive, got {max_spacing}")));
        }
        let p = &self.unfolding.base_polygon;
        let (lo, hi) = p.bounding_box();
        let ext = hi - lo;
        let nx = (ext.x / max_spacing).ceil().max(1.0) as usize;
        let ny = (ext.y / max_spacing).ceil().max(1.0) as usize;
        let block =
            PolygonBlock { polygon: 0, origin: [lo.x, lo.y], nx, ny, hx: ext.x / nx as f64, hy: ext.y / ny as f64 };
        let spacing = block.hx.max(block.hy);
        if spacing > max * (1.0 + 1e-12) {
            return Err(AnalysisError::GridTooCoarse { spacing, max });
        }
        let mut values = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            let mut row = vec![FieldValue::default(); nx];
            self.add_on_line(block.point(0, j), Vec2::new(block.hx, 0.0), &mut row);
            for (i, f) in row.into_iter().enumerate() {
                values.push(if p.strictly_contains(block.point(i, j)) { f.value } else { Complex64::new(0.0, 0.0) });
            }
        }
        Ok(SampledField::new(FieldKind::Folded, self.hbar(), vec![block], values)?)
    }

    /// `‖Ψ_λ‖²_{L²(P)}` by the midpoint rule at spacing `max_spacing`.
    pub fn norm_squared(&self, max_spacing: f64) -> Result<f64, AnalysisError> {
        let f = self.sample(max_spacing)?;
        let b = &f.header.blocks[0];
        Ok(b.hx * b.hy * f.values.iter().map(Complex64::norm_sqr).sum::<f64>())
    }
}

/// Momentum density of `Ψ_λ` zero-extended outside `P`.
pub fn folded_momentum_measure(
    folded: &FoldedQuasimode,
    max_spacing: f64,
    opts: &DftOptions,
) -> Result<MomentumDensity, AnalysisError> {
    momentum_density_from_field(&folded.sample(max_spacing)?, opts)
}

/// Worst boundary sample of the normal derivative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeumannReport {
    /// `max |∂_nΨ| / (λ^{1/2}·max|Ψ|)`.
    pub defect: f64,
    pub max_normal_derivative: f64,
    pub max_abs: f64,
    pub worst_point: [f64; 2],
    pub samples: usize,
    pub step: f64,
}

/// One-sided normal derivatives `(−3f₀ + 4f₁ − f₂)/(2δ)`, `δ = ℏ/32`, at `samples_per_edge` points per edge.
///
/// `max|Ψ|` is taken over the boundary stencils and a grid at eight samples per wavelength.
pub fn neumann_defect(folded: &FoldedQuasimode, samples_per_edge: usize) -> Result<NeumannReport, AnalysisError> {
    let h = folded.hbar();
    let max = TAU * h / NORM_POINTS_PER_WAVELENGTH;
    let p = &folded.unfolding.base_polygon;
    let step = h / 32.0;
    let mut max_d: f64 = 0.0;
    let mut worst = Vec2::zeros();
    let mut max_abs: f64 = 0.0;
    let mut samples = 0;
    for e in 0..p.len() {
        let (a, b) = p.edge(e);
        let len = (b - a).norm();
        let spacing = len / samples_per_edge.max(1) as f64;
        if spacing > max * (1.0 + 1e-12) {
            return Err(AnalysisError::GridTooCoarse { spacing, max });
        }
        let t = (b - a) / len;
        // Counter-clockwise boundary: the interior is on the left.
        let inward = Vec2::new(-t.y, t.x);
        for m in 0..samples_per_edge {
            let s = a + (b - a) * ((m as f64 + 0.5) / samples_per_edge as f64);
            let f: Vec<Complex64> =
                (0..3).map(|k| folded.value(s + inward * (k as f64 * step))).collect::<Result<_, _>>()?;
            let d = ((f[0] * -3.0 + f[1] * 4.0 - f[2]) / (2.0 * step)).norm();
            max_abs = f.iter().fold(max_abs, |acc, z| acc.max(z.norm()));
            if d > max_d {
                max_d = d;
                worst = s;
            }
            samples += 1;
        }
    }
    let field = folded.sample(max)?;
    max_abs = field.values.iter().fold(max_abs, |acc, z| acc.max(z.norm()));
    if max_abs == 0.0 {
        return Err(AnalysisError::ZeroField);
    }
    let lambda = folded.eval.params().lambda();
    Ok(NeumannReport {
        defect: max_d / (lambda.sqrt() * max_abs),
        max_normal_derivative: max_d,
        max_abs,
        worst_point: [worst.x, worst.y],
        samples,
        step,
    })
}
