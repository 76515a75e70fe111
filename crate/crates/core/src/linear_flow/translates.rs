use serde::{Deserialize, Serialize};

use super::cylinder::Cylinder;
use super::trace::trace_flow;
use super::{FlowError, UnitDirection};
use crate::surface_geometry::{SurfacePoint, TranslationSurface, Vec2};

/// `Ω₀ = B(x₀, r_x) × B(ξ₀, r_ξ)` with both radii `ℏ^{1/2−ε}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceBox {
    pub x0: SurfacePoint,
    pub xi0: UnitDirection,
    pub position_radius: f64,
    pub direction_radius: f64,
}

impl PhaseSpaceBox {
    pub fn new(x0: SurfacePoint, xi0: UnitDirection, hbar: f64, eps: f64) -> Result<Self, FlowError> {
        if !(hbar > 0.0 && hbar < 1.0) {
            return Err(FlowError::Invalid(format!("hbar must lie in (0, 1), got {hbar}")));
        }
        let r = hbar.powf(0.5 - eps);
        Ok(Self { x0, xi0, position_radius: r, direction_radius: r })
    }

    /// Largest angle between `ξ₀` and a unit vector within `direction_radius` of it.
    pub fn max_angle(&self) -> f64 {
        if self.direction_radius >= 2.0 {
            std::f64::consts::PI
        } else {
            2.0 * (0.5 * self.direction_radius).asin()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfIntersectionReport {
    pub passed: bool,
    /// Largest |transverse offset| from the core reached by any sample.
    pub max_transverse: f64,
    /// Longitudinal extent of the swept tube.
    pub longitudinal_extent: f64,
    pub half_width: f64,
    pub length: f64,
    /// First sample violating the transverse check.
    pub offending_sample: Option<usize>,
    pub reason: Option<String>,
}

/// Checks that `∪_{|v|≤T} φ_{v/ℏ}Ω₀` stays inside the cylinder and does not wrap around it.
///
/// Works in developed cylinder coordinates, where the flow is a straight line; samples
/// `n_samples` points on `∂B(x₀, r)` paired with extreme directions `±max_angle`.
pub fn verify_no_self_intersection(
    surface: &TranslationSurface,
    bx: &PhaseSpaceBox,
    cylinder: &Cylinder,
    t: f64,
    hbar: f64,
    n_samples: usize,
) -> Result<SelfIntersectionReport, FlowError> {
    if !(t >= 0.0 && hbar > 0.0) {
        return Err(FlowError::Invalid(format!("need T >= 0 and hbar > 0, got T={t}, hbar={hbar}")));
    }
    let (s0, _) = cylinder
        .developed_coordinates(surface, bx.x0)
        .ok_or_else(|| FlowError::Invalid("phase-space box centre does not lie on the cylinder".into()))?;
    let d = cylinder.direction.vector();
    let angle_to_core = {
        let v = bx.xi0.vector();
        v.y.atan2(v.x) - d.y.atan2(d.x)
    };
    let tau = t / hbar;
    let r = bx.position_radius;
    let delta = bx.max_angle();
    let half_width = 0.5 * cylinder.width;
    let n = n_samples.max(1);
    let mut max_transverse: f64 = 0.0;
    let (mut u_min, mut u_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut offending = None;
    for k in 0..n {
        let alpha = std::f64::consts::TAU * k as f64 / n as f64;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let theta = angle_to_core + sign * delta;
        let (ps, pu) = (s0 + r * alpha.sin(), r * alpha.cos());
        let (ds, du) = (theta.sin(), theta.cos());
        // Extremes over v ∈ [−T, T] are attained at the endpoints.
        let s_ext = (ps + tau * ds).abs().max((ps - tau * ds).abs());
        max_transverse = max_transverse.max(s_ext);
        u_min = u_min.min(pu - tau * du.abs());
        u_max = u_max.max(pu + tau * du.abs());
        if offending.is_none() && s_ext >= half_width {
            offending = Some(k);
        }
    }
    let extent = u_max - u_min;
    let reason = if offending.is_some() {
        Some(format!("tube leaves the cylinder: transverse {max_transverse} >= {half_width}"))
    } else if extent >= cylinder.length {
        Some(format!("tube wraps around: longitudinal extent {extent} >= {}", cylinder.length))
    } else {
        None
    };
    Ok(SelfIntersectionReport {
        passed: reason.is_none(),
        max_transverse,
        longitudinal_extent: extent,
        half_width,
        length: cylinder.length,
        offending_sample: offending,
        reason,
    })
}

/// Lifted copies `τ_j Q` of the fundamental domain met by the unrolled cylinder.
///
/// A surface point `y` in polygon `polygons[k]` corresponds to the plane point `y − translations[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslateSet {
    /// Ordered by longitudinal position; index `j + m_t` holds `τ_j`.
    pub translations: Vec<Vec2>,
    pub polygons: Vec<usize>,
    pub m_t: usize,
    pub n_t: usize,
}

impl TranslateSet {
    pub fn len(&self) -> usize {
        self.translations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.translations.is_empty()
    }

    /// `τ_j` for `j ∈ [−M_T, N_T]`.
    pub fn get(&self, j: i64) -> Option<(usize, Vec2)> {
        let k = usize::try_from(j + self.m_t as i64).ok()?;
        Some((*self.polygons.get(k)?, *self.translations.get(k)?))
    }

    /// Translations attached to polygon `p`.
    pub fn for_polygon(&self, p: usize) -> impl Iterator<Item = Vec2> + '_ {
        self.polygons.iter().zip(&self.translations).filter(move |(q, _)| **q == p).map(|(_, t)| *t)
    }

    fn from_entries(mut entries: Vec<(usize, Vec2)>, origin: usize, dir: UnitDirection, tol: f64) -> Self {
        let d = dir.vector();
        let mut unique: Vec<(usize, Vec2)> = Vec::new();
        for e in entries.drain(..) {
            if !unique.iter().any(|u| u.0 == e.0 && (u.1 - e.1).norm() <= tol) {
                unique.push(e);
            }
        }
        // The copy of Q carrying translation τ sits at −τ in the plane.
        let key = |e: &(usize, Vec2)| (-e.1.dot(&d), -e.1.dot(&Vec2::new(-d.y, d.x)), e.0);
        unique.sort_by(|a, b| {
            let (ka, kb) = (key(a), key(b));
            ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1)).then(ka.2.cmp(&kb.2))
        });
        let zero = unique
            .iter()
            .position(|e| e.0 == origin && e.1.norm() <= tol)
            .expect("the starting copy is always recorded");
        let n_t = unique.len() - 1 - zero;
        let (polygons, translations) = unique.into_iter().unzip();
        Self { translations, polygons, m_t: zero, n_t }
    }
}

/// Accumulated translations along the trace from `start` (already carrying `base`) in both directions.
fn collect_along(
    surface: &TranslationSurface,
    start: SurfacePoint,
    base: Vec2,
    dir: UnitDirection,
    distance: f64,
    hit_tol: f64,
    out: &mut Vec<(usize, Vec2)>,
) -> Result<(), FlowError> {
    out.push((start.polygon, base));
    for d in [dir, dir.reversed()] {
        let tr = trace_flow(surface, start, d, distance, hit_tol)?;
        let mut acc = base;
        for seg in &tr.segments {
            acc += seg.tau;
            out.push((seg.polygon, acc));
        }
        if let super::Terminal::HitSingularity { cone_point, length } = tr.terminal {
            return Err(FlowError::HitSingularity { cone_point, length });
        }
    }
    Ok(())
}

/// Translations met by the straight trace from `x0` over distance `distance` both ways.
pub fn unroll_translates(
    surface: &TranslationSurface,
    x0: SurfacePoint,
    dir: UnitDirection,
    distance: f64,
) -> Result<TranslateSet, FlowError> {
    let mut entries = Vec::new();
    let hit_tol = 1e-9 * distance.max(1.0);
    collect_along(surface, x0, Vec2::zeros(), dir, distance, hit_tol, &mut entries)?;
    Ok(TranslateSet::from_entries(entries, x0.polygon, dir, 1e-9 * distance.max(1.0)))
}

/// Unrolls the cylinder around `x0` over the longitudinal budget `D = 4T/ℏ + 4·r`.
///
/// Parallels across the full cylinder width are traced so that every copy of `Q` meeting the
/// developed strip is recorded, not only those met by the core.
pub fn enumerate_translates(
    surface: &TranslationSurface,
    cylinder: &Cylinder,
    bx: &PhaseSpaceBox,
    t: f64,
    hbar: f64,
) -> Result<TranslateSet, FlowError> {
    let travel = 4.0 * t / hbar;
    if travel > cylinder.length {
        return Err(FlowError::BudgetExceeded { distance: travel, length: cylinder.length });
    }
    let distance = travel + 4.0 * bx.position_radius;
    let dir = cylinder.direction;
    let hit_tol = 1e-9 * cylinder.length;
    let (s0, _) = cylinder
        .developed_coordinates(surface, bx.x0)
        .ok_or_else(|| FlowError::Invalid("x0 does not lie on the cylinder".into()))?;
    let min_edge = surface
        .polygons
        .iter()
        .flat_map(|p| (0..p.len()).map(|i| p.edge_vector(i).norm()))
        .fold(f64::INFINITY, f64::min);
    let half = 0.5 * cylinder.width;
    let margin = 1e-6 * cylinder.width;
    let strips = ((2.0 * half / (0.5 * min_edge)).ceil() as usize + 1).clamp(2, 4096);
    let mut entries = Vec::new();
    collect_along(surface, bx.x0, Vec2::zeros(), dir, distance, hit_tol, &mut entries)?;
    for i in 0..=strips {
        let s = -half + margin + (2.0 * (half - margin)) * i as f64 / strips as f64 - s0;
        let perp = UnitDirection::new(dir.perp() * s.signum()).expect("unit");
        let across = trace_flow(surface, bx.x0, perp, s.abs(), hit_tol)?;
        if !across.completed() {
            continue;
        }
        let base = across.accumulated_translation();
        collect_along(surface, across.endpoint(), base, dir, distance, hit_tol, &mut entries)?;
    }
    Ok(TranslateSet::from_entries(entries, bx.x0.polygon, dir, 1e-9 * cylinder.length.max(1.0)))
}
