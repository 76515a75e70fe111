use serde::{Deserialize, Serialize};

use super::trace::{first_return, trace_flow, Terminal};
use super::{FlowError, UnitDirection};
use crate::surface_geometry::{cross, SurfacePoint, TranslationSurface};

const BISECTION_STEPS: usize = 60;

/// Maximal family of parallel closed orbits around a core orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub direction: UnitDirection,
    pub length: f64,
    pub width: f64,
    pub core_basepoint: SurfacePoint,
    pub boundary_saddles: Vec<usize>,
}

impl Cylinder {
    /// Signed transverse offset and longitudinal position of `p` relative to the core orbit.
    ///
    /// Found by walking from `p` perpendicular to the flow until the core is met; offsets are
    /// along `direction.perp()`. `None` if `p` is not within `width/2` of the core.
    pub fn developed_coordinates(&self, surface: &TranslationSurface, p: SurfacePoint) -> Option<(f64, f64)> {
        let hit_tol = 1e-9 * self.length;
        let d = self.direction.vector();
        let half = 0.5 * self.width;
        let core = trace_flow(surface, self.core_basepoint, self.direction, self.length, hit_tol).ok()?;
        let mut best: Option<(f64, f64)> = None;
        for sign in [-1.0, 1.0] {
            let n = transverse(self.direction, sign).vector();
            let Ok(walk) = trace_flow(surface, p, transverse(self.direction, sign), half, hit_tol) else {
                continue;
            };
            let mut walked = 0.0;
            for w in &walk.segments {
                let wl = w.length();
                let mut along = 0.0;
                for c in &core.segments {
                    let cl = c.length();
                    if c.polygon == w.polygon {
                        // w.start + a n = c.start + b d
                        let denom = cross(n, d);
                        let r = c.start - w.start;
                        let a = cross(r, d) / denom;
                        let b = cross(r, n) / denom;
                        let slack = 1e-12 * self.length;
                        if a >= -slack && a <= wl + slack && b >= -slack && b <= cl + slack {
                            let dist = walked + a.max(0.0);
                            if dist < half && best.is_none_or(|x| dist < x.0.abs()) {
                                best = Some((-sign * dist, along + b.max(0.0)));
                            }
                        }
                    }
                    along += cl;
                }
                walked += wl;
            }
        }
        best
    }
}

fn transverse(dir: UnitDirection, sign: f64) -> UnitDirection {
    UnitDirection::new(dir.perp() * sign).expect("perp of a unit vector is unit")
}

/// Point at signed transverse offset `s` from `x0`, reached by a geodesic perpendicular to `dir`.
fn offset_point(
    surface: &TranslationSurface,
    x0: SurfacePoint,
    dir: UnitDirection,
    s: f64,
    hit_tol: f64,
) -> Option<SurfacePoint> {
    if s == 0.0 {
        return Some(x0);
    }
    let tr = trace_flow(surface, x0, transverse(dir, s.signum()), s.abs(), hit_tol).ok()?;
    tr.completed().then(|| tr.endpoint())
}

/// True if no cone point lies in the strip of parallels between offsets `0` and `s`.
///
/// Traces the midline at `s/2` with hit tolerance `|s|/2`, which detects every cone in the strip.
fn strip_clear(
    surface: &TranslationSurface,
    x0: SurfacePoint,
    dir: UnitDirection,
    s: f64,
    length: f64,
    hit_tol: f64,
) -> bool {
    let Some(p) = offset_point(surface, x0, dir, 0.5 * s, hit_tol) else {
        return false;
    };
    trace_flow(surface, p, dir, length, 0.5 * s.abs() + hit_tol).is_ok_and(|tr| tr.completed())
}

/// Cone points met by the parallel at offset `s` (with a loose hit tolerance).
fn saddles_at(
    surface: &TranslationSurface,
    x0: SurfacePoint,
    dir: UnitDirection,
    s: f64,
    length: f64,
    tol: f64,
) -> Vec<usize> {
    let mut found = Vec::new();
    if let Some(p) = offset_point(surface, x0, dir, s, tol) {
        let mut start = p;
        let mut remaining = length;
        while remaining > tol {
            let Ok(tr) = trace_flow(surface, start, dir, remaining, tol) else { break };
            match tr.terminal {
                Terminal::Completed => break,
                Terminal::HitSingularity { cone_point, length: l } => {
                    if !found.contains(&cone_point) {
                        found.push(cone_point);
                    }
                    // Step past the cone point on the core side.
                    let e = tr.endpoint();
                    let back = -s.signum();
                    let nudge = e.position + dir.perp() * back * 4.0 * tol + dir.vector() * 4.0 * tol;
                    let Some(next) = surface.locate(nudge).filter(|q| q.polygon == e.polygon) else { break };
                    start = next;
                    remaining -= l + 4.0 * tol;
                }
            }
        }
    } else if let Ok(tr) = trace_flow(surface, x0, transverse(dir, s.signum()), s.abs(), tol) {
        if let Terminal::HitSingularity { cone_point, .. } = tr.terminal {
            found.push(cone_point);
        }
    }
    found
}

/// Cylinder of the closed orbit through `x0` in direction `dir`, with default tolerances.
pub fn find_cylinder(
    surface: &TranslationSurface,
    dir: UnitDirection,
    x0: SurfacePoint,
    max_length: f64,
) -> Result<Cylinder, FlowError> {
    find_cylinder_with_tol(surface, dir, x0, max_length, None)
}

/// As [`find_cylinder`]; `hit_tol` defaults to `1e-9·L`.
pub fn find_cylinder_with_tol(
    surface: &TranslationSurface,
    dir: UnitDirection,
    x0: SurfacePoint,
    max_length: f64,
    hit_tol: Option<f64>,
) -> Result<Cylinder, FlowError> {
    let base_tol = hit_tol.unwrap_or(1e-9 * max_length);
    let close_tol = 1e-7 * max_length.max(1.0);
    let length =
        first_return(surface, x0, dir, max_length, base_tol, close_tol)?.ok_or(FlowError::NotPeriodic(max_length))?;
    let hit_tol = hit_tol.unwrap_or(1e-9 * length);
    let max_width = surface.total_area / length;
    if !surface.has_singularities() {
        return Ok(Cylinder {
            direction: dir,
            length,
            width: max_width,
            core_basepoint: x0,
            boundary_saddles: Vec::new(),
        });
    }

    let mut reach = [0.0f64; 2];
    for (k, sign) in [1.0, -1.0].into_iter().enumerate() {
        let (mut good, mut bad) = (0.0, max_width * (1.0 + 1e-9));
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (good + bad);
            if strip_clear(surface, x0, dir, sign * mid, length, hit_tol) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        // The midline trace also flags cones up to `hit_tol` beyond the strip.
        reach[k] = 0.5 * (good + bad) + hit_tol;
    }
    let width = reach[0] + reach[1];
    if width > max_width * (1.0 + 1e-9) {
        return Err(FlowError::Numerical(format!("cylinder width {width} exceeds area/length {max_width}")));
    }
    let shift = 0.5 * (reach[0] - reach[1]);
    let core_basepoint = offset_point(surface, x0, dir, shift, hit_tol)
        .ok_or_else(|| FlowError::Numerical("core basepoint unreachable".into()))?;
    let saddle_tol = (1e-6 * length).max(hit_tol);
    let mut boundary_saddles = saddles_at(surface, x0, dir, reach[0], length, saddle_tol);
    for c in saddles_at(surface, x0, dir, -reach[1], length, saddle_tol) {
        if !boundary_saddles.contains(&c) {
            boundary_saddles.push(c);
        }
    }
    boundary_saddles.sort_unstable();
    Ok(Cylinder { direction: dir, length, width, core_basepoint, boundary_saddles })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface_geometry::Vec2;
    use approx::assert_relative_eq;

    fn pt(x: f64, y: f64) -> SurfacePoint {
        SurfacePoint::new(0, Vec2::new(x, y))
    }

    #[test]
    fn torus_horizontal() {
        let t = TranslationSurface::square_torus(1.0);
        let c = find_cylinder(&t, UnitDirection::horizontal(), pt(0.5, 0.5), 2.0).unwrap();
        assert_relative_eq!(c.length, 1.0, max_relative = 1e-12);
        assert_relative_eq!(c.width, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn torus_slope_half() {
        let t = TranslationSurface::square_torus(1.0);
        let d = UnitDirection::new(Vec2::new(2.0, 1.0)).unwrap();
        let c = find_cylinder(&t, d, pt(0.3, 0.4), 5.0).unwrap();
        assert_relative_eq!(c.length, 5f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(c.width, 1.0 / 5f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(c.length * c.width, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn l_surface_top_square() {
        let l = TranslationSurface::l_surface();
        let c = find_cylinder(&l, UnitDirection::horizontal(), pt(0.5, 1.5), 5.0).unwrap();
        assert_relative_eq!(c.length, 1.0, max_relative = 1e-12);
        assert_relative_eq!(c.width, 1.0, max_relative = 1e-9);
        assert_relative_eq!(c.core_basepoint.position.y, 1.5, epsilon = 1e-9);
        assert_eq!(c.boundary_saddles, vec![0]);
        assert!(c.length * c.width <= l.total_area);
    }

    #[test]
    fn l_surface_bottom_and_off_centre_start() {
        let l = TranslationSurface::l_surface();
        let c = find_cylinder(&l, UnitDirection::horizontal(), pt(0.5, 0.2), 5.0).unwrap();
        assert_relative_eq!(c.length, 2.0, max_relative = 1e-12);
        assert_relative_eq!(c.width, 1.0, max_relative = 1e-9);
        assert_relative_eq!(c.core_basepoint.position.y, 0.5, epsilon = 1e-9);
        let (s, _) = c.developed_coordinates(&l, pt(1.5, 0.8)).unwrap();
        assert_relative_eq!(s, 0.3, epsilon = 1e-9);
    }

    #[test]
    fn singular_orbit_reported() {
        let l = TranslationSurface::l_surface();
        let r = find_cylinder(&l, UnitDirection::horizontal(), pt(0.5, 1.0 - 1e-13), 5.0);
        assert!(r.is_err());
        let d = UnitDirection::new(Vec2::new(1.0, 0.5f64.sqrt())).unwrap();
        let r = find_cylinder(&TranslationSurface::square_torus(1.0), d, pt(0.5, 0.5), 20.0);
        assert!(matches!(r, Err(FlowError::NotPeriodic(_))));
    }
}
