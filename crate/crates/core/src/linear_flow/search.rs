use num_integer::Integer;

use super::cylinder::{find_cylinder, Cylinder};
use super::UnitDirection;
use crate::surface_geometry::{cross, SurfacePoint, TranslationSurface, Vec2};

const ANGULAR_GRID: usize = 10_000;
const MAX_DENOMINATOR: u64 = 64;

/// `x ≈ n/d` with the smallest `d ≤ 64`.
fn rational_approx(x: f64, tol: f64) -> Option<(i64, i64)> {
    (1..=MAX_DENOMINATOR as i64).find_map(|d| {
        let n = (x * d as f64).round();
        ((x - n / d as f64).abs() <= tol).then_some((n as i64, d))
    })
}

/// Basis of the lattice generated by the edge translations, if they span a rational 2D lattice.
pub fn period_lattice(surface: &TranslationSurface) -> Option<(Vec2, Vec2)> {
    let taus: Vec<Vec2> = surface.identifications.iter().map(|id| id.tau).filter(|t| t.norm() > 0.0).collect();
    let scale = taus.iter().map(|t| t.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    // Reference frame: shortest τ and the shortest τ independent of it.
    let mut sorted = taus.clone();
    sorted.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let e1 = sorted[0];
    let e2 = *sorted.iter().find(|t| cross(e1, **t).abs() > 1e-9 * scale * scale)?;
    let det = cross(e1, e2);
    let mut coords = Vec::with_capacity(taus.len());
    let mut q = 1u64;
    for t in &taus {
        let a = cross(*t, e2) / det;
        let b = cross(e1, *t) / det;
        let (an, ad) = rational_approx(a, 1e-9)?;
        let (bn, bd) = rational_approx(b, 1e-9)?;
        q = q.lcm(&(ad as u64)).lcm(&(bd as u64));
        coords.push(((an, ad), (bn, bd)));
    }
    let ints: Vec<(i64, i64)> =
        coords.iter().map(|&((an, ad), (bn, bd))| (an * (q as i64 / ad), bn * (q as i64 / bd))).collect();
    let ((a1, b1), (a2, b2)) = hermite_basis(&ints)?;
    let to_plane = |a: i64, b: i64| (e1 * a as f64 + e2 * b as f64) / q as f64;
    Some((to_plane(a1, b1), to_plane(a2, b2)))
}

/// Hermite basis `{(a, b), (0, d)}` of the integer lattice spanned by `v`.
fn hermite_basis(v: &[(i64, i64)]) -> Option<((i64, i64), (i64, i64))> {
    // Row with first coordinate gcd(x_i), built by extended Euclid.
    let mut row = (0i64, 0i64);
    for &(x, y) in v {
        let e = row.0.extended_gcd(&x);
        row = (e.gcd, e.x * row.1 + e.y * y);
    }
    if row.0 < 0 {
        row = (-row.0, -row.1);
    }
    if row.0 == 0 {
        return None;
    }
    let mut d = 0i64;
    for &(x, y) in v {
        d = d.gcd(&(y - (x / row.0) * row.1));
    }
    if d == 0 {
        return None;
    }
    Some(((row.0, row.1.rem_euclid(d)), (0, d)))
}

fn canonical(v: Vec2) -> Vec2 {
    if v.x < -1e-12 || (v.x.abs() <= 1e-12 && v.y < 0.0) {
        -v
    } else {
        v
    }
}

fn candidate_directions(surface: &TranslationSurface, bound: f64) -> Vec<UnitDirection> {
    let mut dirs: Vec<Vec2> = Vec::new();
    if let Some((b1, b2)) = period_lattice(surface) {
        let m = (bound / b1.norm().min(b2.norm()) * 4.0).ceil() as i64 + 2;
        for i in -m..=m {
            for j in -m..=m {
                if i.gcd(&j) != 1 {
                    continue;
                }
                let v = b1 * i as f64 + b2 * j as f64;
                if v.norm() <= bound * (1.0 + 1e-12) {
                    let c = canonical(v);
                    if !dirs.iter().any(|w| cross(*w, c).abs() <= 1e-9 * w.norm() * c.norm() && w.dot(&c) > 0.0) {
                        dirs.push(c);
                    }
                }
            }
        }
    } else {
        dirs.extend((0..ANGULAR_GRID).map(|k| {
            let a = std::f64::consts::PI * k as f64 / ANGULAR_GRID as f64;
            Vec2::new(a.cos(), a.sin())
        }));
    }
    dirs.into_iter().filter_map(|v| UnitDirection::new(v).ok()).collect()
}

/// Probe points: `x0`, then a 4×4 grid in each polygon's bounding box.
fn probes(surface: &TranslationSurface, x0: SurfacePoint) -> Vec<SurfacePoint> {
    let mut out = vec![x0];
    for (k, p) in surface.polygons.iter().enumerate() {
        let (lo, hi) = p.bounding_box();
        for i in 0..4 {
            for j in 0..4 {
                let q = lo + (hi - lo).component_mul(&Vec2::new((2 * i + 1) as f64 / 8.0, (2 * j + 1) as f64 / 8.0));
                // Irrational nudge keeps probes off saddle connections through lattice points.
                let q = q + Vec2::new(0.0137, 0.0071) * (hi - lo).norm() * 1e-2;
                if p.strictly_contains(q) {
                    out.push(SurfacePoint::new(k, q));
                }
            }
        }
    }
    out
}

/// Closed orbits of length at most `length_bound` found by scanning candidate directions, sorted by length.
///
/// Each direction is probed from `x0` and a grid of points per polygon; cylinders already containing a
/// probe point are not reported twice.
pub fn search_periodic_directions(
    surface: &TranslationSurface,
    length_bound: f64,
    x0: SurfacePoint,
) -> Vec<(UnitDirection, Cylinder)> {
    let mut found: Vec<(UnitDirection, Cylinder)> = Vec::new();
    if !(length_bound > 0.0) {
        return found;
    }
    let pts = probes(surface, x0);
    for dir in candidate_directions(surface, length_bound) {
        let mut here: Vec<Cylinder> = Vec::new();
        for &p in &pts {
            if here.iter().any(|c| c.developed_coordinates(surface, p).is_some()) {
                continue;
            }
            if let Ok(c) = find_cylinder(surface, dir, p, length_bound) {
                if c.length <= length_bound * (1.0 + 1e-12) {
                    here.push(c);
                }
            }
        }
        found.extend(here.into_iter().map(|c| (dir, c)));
    }
    found.sort_by(|a, b| a.1.length.total_cmp(&b.1.length).then(a.0.angle().total_cmp(&b.0.angle())));
    found
}
