use super::{FlowError, UnitDirection};
use crate::surface_geometry::{cross, PlanarPolygon, Vec2};

/// Billiard orbit in `polygon` from `x0` in direction `dir` for total length `length`.
///
/// Returns the start point, every bounce point, and the final point. Orbits reaching a corner
/// within `corner_tol` stop there.
pub fn billiard_trace(
    polygon: &PlanarPolygon,
    x0: Vec2,
    dir: UnitDirection,
    length: f64,
    corner_tol: f64,
) -> Result<Vec<Vec2>, FlowError> {
    if !polygon.contains(x0, corner_tol) {
        return Err(FlowError::Invalid(format!("start ({}, {}) is outside the polygon", x0.x, x0.y)));
    }
    let n = polygon.len();
    let mut pts = vec![x0];
    let mut p = x0;
    let mut d = dir.vector();
    let mut remaining = length;
    let mut last_edge = usize::MAX;
    while remaining > 0.0 {
        let mut best: Option<(f64, usize, f64)> = None;
        for i in 0..n {
            if i == last_edge {
                continue;
            }
            let (a, b) = polygon.edge(i);
            let e = b - a;
            let denom = cross(d, e);
            if denom <= 1e-14 * e.norm() {
                continue;
            }
            let t = cross(a - p, e) / denom;
            let s = cross(a - p, d) / denom;
            if t > 0.0 && (-1e-12..=1.0 + 1e-12).contains(&s) && best.is_none_or(|(bt, _, _)| t < bt) {
                best = Some((t, i, s));
            }
        }
        let (t, i, s) = best.ok_or_else(|| FlowError::Numerical("billiard ray escaped the polygon".into()))?;
        if t >= remaining {
            pts.push(p + d * remaining);
            break;
        }
        p += d * t;
        remaining -= t;
        pts.push(p);
        let len = polygon.edge_vector(i).norm();
        if s * len <= corner_tol || (1.0 - s) * len <= corner_tol {
            break;
        }
        let u = polygon.edge_vector(i) / len;
        d = u * (2.0 * d.dot(&u)) - d;
        last_edge = i;
    }
    Ok(pts)
}
