use serde::{Deserialize, Serialize};

use super::{FlowError, UnitDirection};
use crate::surface_geometry::{cross, SurfacePoint, TranslationSurface, Vec2};

/// Smallest forward parameter accepted as a genuine boundary crossing.
const T_MIN: f64 = 1e-12;
/// Distance within which a crossing is snapped to a vertex.
const VERTEX_SNAP: f64 = 1e-11;

/// Straight piece of a trace inside one polygon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowSegment {
    pub polygon: usize,
    pub start: Vec2,
    pub end: Vec2,
    /// Translation applied when entering this segment from the previous one (zero for the first).
    pub tau: Vec2,
}

impl FlowSegment {
    pub fn length(&self) -> f64 {
        (self.end - self.start).norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Terminal {
    Completed,
    HitSingularity { cone_point: usize, length: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowTrace {
    pub direction: UnitDirection,
    pub segments: Vec<FlowSegment>,
    pub total_length: f64,
    pub terminal: Terminal,
}

impl FlowTrace {
    pub fn endpoint(&self) -> SurfacePoint {
        let s = self.segments.last().expect("traces have at least one segment");
        SurfacePoint::new(s.polygon, s.end)
    }

    /// Sum of all edge translations crossed so far.
    pub fn accumulated_translation(&self) -> Vec2 {
        self.segments.iter().map(|s| s.tau).sum()
    }

    pub fn completed(&self) -> bool {
        self.terminal == Terminal::Completed
    }
}

enum Exit {
    Edge { edge: usize, t: f64 },
    Vertex { vertex: usize, t: f64 },
}

/// First boundary crossing of the ray `p + t d`, `t > T_MIN`.
fn find_exit(surface: &TranslationSurface, polygon: usize, p: Vec2, d: Vec2) -> Option<Exit> {
    let poly = surface.polygon(polygon);
    let n = poly.len();
    let mut best: Option<(f64, usize, f64)> = None;
    for i in 0..n {
        let (a, b) = poly.edge(i);
        let e = b - a;
        let len = e.norm();
        let denom = cross(d, e);
        if denom <= 1e-14 * len {
            continue;
        }
        let t = cross(a - p, e) / denom;
        let s = cross(a - p, d) / denom;
        let slack = VERTEX_SNAP / len;
        if t > T_MIN && s >= -slack && s <= 1.0 + slack && best.is_none_or(|(bt, _, _)| t < bt) {
            best = Some((t, i, s));
        }
    }
    let (t, i, s) = best?;
    let len = poly.edge_vector(i).norm();
    if s * len <= VERTEX_SNAP {
        Some(Exit::Vertex { vertex: i, t })
    } else if (1.0 - s) * len <= VERTEX_SNAP {
        Some(Exit::Vertex { vertex: (i + 1) % n, t })
    } else {
        Some(Exit::Edge { edge: i, t })
    }
}

/// Closest approach to a singular vertex of the polygon within `hit_tol`, before `limit`.
fn singular_near_miss(
    surface: &TranslationSurface,
    polygon: usize,
    p: Vec2,
    d: Vec2,
    limit: f64,
    hit_tol: f64,
) -> Option<(usize, f64)> {
    let poly = surface.polygon(polygon);
    let mut best: Option<(usize, f64)> = None;
    for v in 0..poly.len() {
        if !surface.is_singular_vertex(polygon, v) {
            continue;
        }
        let w = poly.vertex(v) - p;
        let u = w.dot(&d);
        if u < -hit_tol || u > limit + hit_tol {
            continue;
        }
        if cross(d, w).abs() <= hit_tol && best.is_none_or(|(_, bu)| u < bu) {
            best = Some((surface.vertex_class(polygon, v), u.max(0.0)));
        }
    }
    best
}

/// Traces the flow from `x0` in direction `dir` for length `max_length`, stopping at cone points.
pub fn trace_flow(
    surface: &TranslationSurface,
    x0: SurfacePoint,
    dir: UnitDirection,
    max_length: f64,
    hit_tol: f64,
) -> Result<FlowTrace, FlowError> {
    if x0.polygon >= surface.polygons.len() {
        return Err(FlowError::Invalid(format!("polygon {} does not exist", x0.polygon)));
    }
    if !(max_length >= 0.0 && max_length.is_finite()) {
        return Err(FlowError::Invalid(format!("max_length {max_length}")));
    }
    let start_poly = surface.polygon(x0.polygon);
    for v in 0..start_poly.len() {
        if surface.is_singular_vertex(x0.polygon, v) && (start_poly.vertex(v) - x0.position).norm() <= hit_tol {
            return Err(FlowError::StartAtSingularity(surface.vertex_class(x0.polygon, v)));
        }
    }
    let d = dir.vector();
    let mut segments = Vec::new();
    let mut polygon = x0.polygon;
    let mut p = x0.position;
    let mut tau = Vec2::zeros();
    let mut travelled = 0.0;
    let max_steps = 10_000_000usize;
    for _ in 0..max_steps {
        let remaining = max_length - travelled;
        let exit = find_exit(surface, polygon, p, d)
            .ok_or_else(|| FlowError::Numerical(format!("no exit from polygon {polygon} at ({}, {})", p.x, p.y)))?;
        let t_exit = match exit {
            Exit::Edge { t, .. } | Exit::Vertex { t, .. } => t,
        };
        let reach = t_exit.min(remaining);
        if let Some((cone, u)) = singular_near_miss(surface, polygon, p, d, reach, hit_tol) {
            segments.push(FlowSegment { polygon, start: p, end: p + d * u, tau });
            let length = travelled + u;
            return Ok(FlowTrace {
                direction: dir,
                segments,
                total_length: length,
                terminal: Terminal::HitSingularity { cone_point: cone, length },
            });
        }
        if t_exit >= remaining {
            segments.push(FlowSegment { polygon, start: p, end: p + d * remaining, tau });
            return Ok(FlowTrace { direction: dir, segments, total_length: max_length, terminal: Terminal::Completed });
        }
        let hit = p + d * t_exit;
        segments.push(FlowSegment { polygon, start: p, end: hit, tau });
        travelled += t_exit;
        match exit {
            Exit::Edge { edge, .. } => {
                let (other, shift) = surface.partner(polygon, edge);
                polygon = other.polygon;
                p = hit + shift;
                tau = shift;
            }
            Exit::Vertex { vertex, .. } => {
                let class = surface.vertex_class(polygon, vertex);
                if surface.cone_points[class].is_singular() {
                    let length = travelled;
                    return Ok(FlowTrace {
                        direction: dir,
                        segments,
                        total_length: length,
                        terminal: Terminal::HitSingularity { cone_point: class, length },
                    });
                }
                let here = surface.polygon(polygon).vertex(vertex);
                let (np, nv) = surface.sector_containing(class, d);
                let there = surface.polygon(np).vertex(nv);
                polygon = np;
                p = there;
                tau = there - here;
            }
        }
    }
    Err(FlowError::Numerical("step limit exceeded".into()))
}

/// Length at which the orbit from `x0` first returns to `x0`, if within `max_length`.
pub fn first_return(
    surface: &TranslationSurface,
    x0: SurfacePoint,
    dir: UnitDirection,
    max_length: f64,
    hit_tol: f64,
    close_tol: f64,
) -> Result<Option<f64>, FlowError> {
    let trace = trace_flow(surface, x0, dir, max_length * (1.0 + 1e-12) + close_tol, hit_tol)?;
    let d = dir.vector();
    let mut cum = 0.0;
    for seg in &trace.segments {
        let len = seg.length();
        if seg.polygon == x0.polygon {
            let w = x0.position - seg.start;
            let u = w.dot(&d);
            if u >= -close_tol
                && u <= len + close_tol
                && cross(d, w).abs() <= close_tol
                && cum + u > close_tol.max(1e-9)
            {
                return Ok(Some(cum + u));
            }
        }
        cum += len;
    }
    if let Terminal::HitSingularity { cone_point, length } = trace.terminal {
        return Err(FlowError::HitSingularity { cone_point, length });
    }
    Ok(None)
}
