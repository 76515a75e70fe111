use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::exec::{map_indexed, Execution};
use crate::gaussian_wavepacket::{gamma_hat, EuclideanQuasimode, FieldValue};
use crate::surface_geometry::Vec2;
use crate::surface_quasimode::{FieldKind, PolygonBlock, SampledField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityRoute {
    /// Discrete Fourier transform of a sampled field.
    Dft,
    /// Closed-form momentum profile of a Euclidean quasimode on a polar grid.
    ClosedForm,
}

/// `dμ_ψ(ξ) = ℏ⁻²‖ψ‖⁻²|ψ̂(ξ/ℏ)|²dξ` as point masses on momentum cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumDensity {
    pub hbar: f64,
    pub route: DensityRoute,
    /// Cell centres in the `ξ` plane.
    pub points: Vec<Vec2>,
    /// Cell masses; they sum to one.
    pub masses: Vec<f64>,
    /// Cell areas in the `ξ` plane.
    pub areas: Vec<f64>,
    /// Unnormalised total `ℏ⁻²∫|ψ̂(ξ/ℏ)|²dξ`, which approximates `‖ψ‖²`.
    pub raw_mass: f64,
    /// Largest cell diameter in `ξ`.
    pub resolution: f64,
}

impl MomentumDensity {
    fn normalised(
        hbar: f64,
        route: DensityRoute,
        points: Vec<Vec2>,
        raw: Vec<f64>,
        areas: Vec<f64>,
        resolution: f64,
    ) -> Result<Self, AnalysisError> {
        let raw_mass: f64 = raw.iter().sum();
        if !(raw_mass > 0.0 && raw_mass.is_finite()) {
            return Err(AnalysisError::ZeroField);
        }
        let masses = raw.into_iter().map(|m| m / raw_mass).collect();
        Ok(Self { hbar, route, points, masses, areas, raw_mass, resolution })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Density values `mass / area`.
    pub fn values(&self) -> Vec<f64> {
        self.masses.iter().zip(&self.areas).map(|(m, a)| m / a).collect()
    }

    /// `∫f dμ`.
    pub fn expectation<F: Fn(Vec2) -> f64>(&self, f: F) -> f64 {
        self.points.iter().zip(&self.masses).map(|(&x, &m)| m * f(x)).sum()
    }

    /// Cell of largest density.
    pub fn argmax(&self) -> Vec2 {
        let v = self.values();
        let k = (0..v.len()).fold(0, |b, i| if v[i] > v[b] { i } else { b });
        self.points[k]
    }

    /// Up to `count` cells of largest density, each at least `separation` from those already chosen.
    pub fn peaks(&self, count: usize, separation: f64) -> Vec<Vec2> {
        let v = self.values();
        let mut order: Vec<usize> = (0..v.len()).collect();
        order.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
        let mut out: Vec<Vec2> = Vec::new();
        for k in order {
            if out.len() == count {
                break;
            }
            let p = self.points[k];
            if out.iter().all(|q| (q - p).norm() >= separation) {
                out.push(p);
            }
        }
        out
    }
}

/// Options for the DFT route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DftOptions {
    /// Zero extension factor; `1` treats each block as one period.
    pub pad: usize,
    pub execution: Execution,
}

impl Default for DftOptions {
    fn default() -> Self {
        Self { pad: 1, execution: Execution::default() }
    }
}

/// In-place 2D forward DFT of row-major `data` (`nx` fastest).
fn fft2(data: &mut [Complex64], nx: usize, ny: usize, exec: Execution) {
    let mut planner = FftPlanner::<f64>::new();
    let fx = planner.plan_fft_forward(nx);
    let fy = planner.plan_fft_forward(ny);
    let rows = map_indexed(exec, ny, |j| {
        let mut row = data[j * nx..(j + 1) * nx].to_vec();
        fx.process(&mut row);
        row
    });
    for (j, row) in rows.into_iter().enumerate() {
        data[j * nx..(j + 1) * nx].copy_from_slice(&row);
    }
    let cols = map_indexed(exec, nx, |i| {
        let mut col: Vec<Complex64> = (0..ny).map(|j| data[j * nx + i]).collect();
        fy.process(&mut col);
        col
    });
    for (i, col) in cols.into_iter().enumerate() {
        for (j, z) in col.into_iter().enumerate() {
            data[j * nx + i] = z;
        }
    }
}

/// Signed frequency index of DFT bin `m` out of `n`.
fn signed_index(m: usize, n: usize) -> f64 {
    if m < n.div_ceil(2) {
        m as f64
    } else {
        m as f64 - n as f64
    }
}

/// Momentum density of a sampled field by DFT, with `ψ̂(k) = (1/2π)∫ψe^{−ik·x}dx`.
///
/// Blocks must share one spacing; their densities add incoherently on a common frequency grid.
pub fn momentum_density_from_field(field: &SampledField, opts: &DftOptions) -> Result<MomentumDensity, AnalysisError> {
    let blocks = &field.header.blocks;
    let first = blocks.first().ok_or(AnalysisError::ZeroField)?;
    let (hx, hy) = (first.hx, first.hy);
    if blocks.iter().any(|b| (b.hx - hx).abs() > 1e-12 * hx || (b.hy - hy).abs() > 1e-12 * hy) {
        return Err(AnalysisError::Invalid("blocks have different spacings".into()));
    }
    if opts.pad == 0 {
        return Err(AnalysisError::Invalid("pad must be at least 1".into()));
    }
    let nx = opts.pad * blocks.iter().map(|b| b.nx).max().unwrap_or(1);
    let ny = opts.pad * blocks.iter().map(|b| b.ny).max().unwrap_or(1);
    let mut power = vec![0.0; nx * ny];
    for (k, b) in blocks.iter().enumerate() {
        let vals = field.block(k);
        if vals.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
            continue;
        }
        let mut data = vec![Complex64::new(0.0, 0.0); nx * ny];
        for j in 0..b.ny {
            data[j * nx..j * nx + b.nx].copy_from_slice(&vals[j * b.nx..(j + 1) * b.nx]);
        }
        fft2(&mut data, nx, ny, opts.execution);
        for (p, z) in power.iter_mut().zip(&data) {
            *p += z.norm_sqr();
        }
    }
    let h = field.header.hbar;
    let (dkx, dky) = (TAU / (nx as f64 * hx), TAU / (ny as f64 * hy));
    // |ψ̂|²·Δk with ψ̂ = (hx·hy/2π)·DFT.
    let scale = (hx * hy / TAU).powi(2) * dkx * dky;
    let area = h * h * dkx * dky;
    let mut points = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            points.push(Vec2::new(h * dkx * signed_index(i, nx), h * dky * signed_index(j, ny)));
        }
    }
    let raw = power.into_iter().map(|p| p * scale).collect();
    MomentumDensity::normalised(h, DensityRoute::Dft, points, raw, vec![area; nx * ny], h * dkx.hypot(dky))
}

/// Axis-aligned box holding `Φ_λ` up to `e^{−50}` of its peak.
pub fn euclidean_support_box(m: &EuclideanQuasimode) -> (Vec2, Vec2) {
    let h = m.params.hbar();
    let t = m.window.t_scale;
    let travel = m.params.xi0().vector() * (2.0 * t / h);
    let spread = 10.0 * (h * h + 4.0 * t * t).sqrt() / h.sqrt();
    let x0 = m.params.x0();
    let lo = Vec2::new(x0.x - travel.x.abs() - spread, x0.y - travel.y.abs() - spread);
    let hi = Vec2::new(x0.x + travel.x.abs() + spread, x0.y + travel.y.abs() + spread);
    (lo, hi)
}

/// `Φ_λ` sampled on a cell-centred grid over [`euclidean_support_box`] with spacing at most `max_spacing`.
pub fn sample_euclidean_field(m: &EuclideanQuasimode, max_spacing: f64) -> Result<SampledField, AnalysisError> {
    if !(max_spacing > 0.0) {
        return Err(AnalysisError::Invalid(format!("spacing must be positive, got {max_spacing}")));
    }
    let (lo, hi) = euclidean_support_box(m);
    let ext = hi - lo;
    let nx = (ext.x / max_spacing).ceil() as usize;
    let ny = (ext.y / max_spacing).ceil() as usize;
    let block = PolygonBlock { polygon: 0, origin: [lo.x, lo.y], nx, ny, hx: ext.x / nx as f64, hy: ext.y / ny as f64 };
    let rule = m.theta_rule(None);
    let mut values = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let mut row = vec![FieldValue::default(); nx];
        m.add_field_on_line(&rule, block.point(0, j), Vec2::new(block.hx, 0.0), &mut row);
        values.extend(row.into_iter().map(|f| f.value));
    }
    Ok(SampledField::new(FieldKind::Value, m.params.hbar(), vec![block], values)?)
}

/// Unnormalised `ℏ⁻²|Φ̂_λ(ξ/ℏ)|²` from the closed-form momentum profile.
pub fn euclidean_density_value(m: &EuclideanQuasimode, xi: Vec2) -> Result<f64, AnalysisError> {
    let h = m.params.hbar();
    Ok(m.momentum_profile(xi)?.norm_sqr() / (h * h))
}

/// Polar grid for the closed-form route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub radial_step: f64,
    pub angular_count: usize,
}

impl PolarGrid {
    /// Annulus `|ξ| ∈ 1 ± 10ℏ^{1/2−ε}`, radial step `min(√ℏ/8, ℏ²/(8T))`, angular step at most `√ℏ/8`.
    pub fn for_quasimode(m: &EuclideanQuasimode) -> Self {
        let h = m.params.hbar();
        let t = m.window.t_scale;
        let half = 10.0 * m.params.localization_radius();
        let r_min = (1.0 - half).max(0.0);
        let r_max = 1.0 + half;
        let step = (h.sqrt() / 8.0).min(h * h / (8.0 * t));
        let n = ((r_max - r_min) / step).ceil();
        let angular_count = (TAU / (h.sqrt() / 8.0)).ceil() as usize;
        Self { r_min, r_max, radial_step: (r_max - r_min) / n, angular_count }
    }

    pub fn radial_count(&self) -> usize {
        ((self.r_max - self.r_min) / self.radial_step).round() as usize
    }
}

/// Momentum density of `Φ_λ` from its closed-form profile, midpoint rule on [`PolarGrid::for_quasimode`].
pub fn momentum_density_closed_form(m: &EuclideanQuasimode, exec: Execution) -> Result<MomentumDensity, AnalysisError> {
    momentum_density_closed_form_on(m, &PolarGrid::for_quasimode(m), exec)
}

pub fn momentum_density_closed_form_on(
    m: &EuclideanQuasimode,
    grid: &PolarGrid,
    exec: Execution,
) -> Result<MomentumDensity, AnalysisError> {
    let h = m.params.hbar();
    let t = m.window.t_scale;
    let xi0 = m.params.xi0().vector();
    let nr = grid.radial_count();
    let na = grid.angular_count;
    let dr = grid.radial_step;
    let dth = TAU / na as f64;
    // |Φ̂(ξ/ℏ)|²/ℏ² = (π/ℏ)·γ̂((ξ−ξ₀)/√ℏ)²·W(T(|ξ|²−1)/ℏ²)².
    let rows = map_indexed(exec, nr, |i| {
        let r = grid.r_min + (i as f64 + 0.5) * dr;
        let w = m.window.transform(t * (r * r - 1.0) / (h * h))?;
        let radial = PI / h * w * w;
        let area = r * dr * dth;
        let row: Vec<(Vec2, f64, f64)> = (0..na)
            .map(|j| {
                let th = (j as f64 + 0.5) * dth;
                let xi = Vec2::new(r * th.cos(), r * th.sin());
                let g = gamma_hat((xi - xi0) / h.sqrt());
                (xi, radial * g * g * area, area)
            })
            .collect();
        Ok::<_, AnalysisError>(row)
    });
    let mut points = Vec::with_capacity(nr * na);
    let mut raw = Vec::with_capacity(nr * na);
    let mut areas = Vec::with_capacity(nr * na);
    for row in rows {
        for (p, m, a) in row? {
            points.push(p);
            raw.push(m);
            areas.push(a);
        }
    }
    let resolution = dr.hypot(grid.r_max * dth);
    MomentumDensity::normalised(h, DensityRoute::ClosedForm, points, raw, areas, resolution)
}
