use serde::{Deserialize, Serialize};

use super::{GeometryError, Vec2};

/// z-component of the planar cross product.
#[inline]
pub fn cross(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Simple counterclockwise polygon. Edge `i` runs from vertex `i` to vertex `i + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec2>", into = "Vec<Vec2>")]
pub struct PlanarPolygon {
    vertices: Vec<Vec2>,
}

impl TryFrom<Vec<Vec2>> for PlanarPolygon {
    type Error = GeometryError;
    fn try_from(v: Vec<Vec2>) -> Result<Self, Self::Error> {
        PlanarPolygon::new(v, super::DEFAULT_TOL_GEOM)
    }
}

impl From<PlanarPolygon> for Vec<Vec2> {
    fn from(p: PlanarPolygon) -> Self {
        p.vertices
    }
}

impl PlanarPolygon {
    pub fn new(vertices: Vec<Vec2>, tol: f64) -> Result<Self, GeometryError> {
        let n = vertices.len();
        if n < 3 {
            return Err(GeometryError::DegeneratePolygon(format!("{n} vertices")));
        }
        if vertices.iter().any(|v| !v.x.is_finite() || !v.y.is_finite()) {
            return Err(GeometryError::DegeneratePolygon("non-finite coordinate".into()));
        }
        let poly = Self { vertices };
        for i in 0..n {
            if poly.edge_vector(i).norm() <= tol {
                return Err(GeometryError::DegeneratePolygon(format!("edge {i} has zero length")));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (a0, a1) = poly.edge(i);
                let (b0, b1) = poly.edge(j);
                if segments_touch(a0, a1, b0, b1, tol) {
                    return Err(GeometryError::DegeneratePolygon(format!("edges {i} and {j} intersect")));
                }
            }
        }
        let area = poly.signed_area();
        if area <= tol * tol {
            return Err(GeometryError::DegeneratePolygon(format!(
                "signed area {area} is not positive (vertices must be counterclockwise)"
            )));
        }
        Ok(poly)
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, i: usize) -> Vec2 {
        self.vertices[i % self.vertices.len()]
    }

    pub fn edge(&self, i: usize) -> (Vec2, Vec2) {
        (self.vertex(i), self.vertex(i + 1))
    }

    pub fn edge_vector(&self, i: usize) -> Vec2 {
        self.vertex(i + 1) - self.vertex(i)
    }

    fn signed_area(&self) -> f64 {
        let n = self.len();
        0.5 * (0..n).map(|i| cross(self.vertex(i), self.vertex(i + 1))).sum::<f64>()
    }

    pub fn area(&self) -> f64 {
        self.signed_area()
    }

    /// Interior angle at vertex `i`, in (0, 2π).
    pub fn interior_angle(&self, i: usize) -> f64 {
        let n = self.len();
        let d_in = self.edge_vector((i + n - 1) % n);
        let d_out = self.edge_vector(i);
        let turn = cross(d_in, d_out).atan2(d_in.dot(&d_out));
        std::f64::consts::PI - turn
    }

    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    /// Distance from `p` to the boundary.
    pub fn boundary_distance(&self, p: Vec2) -> f64 {
        (0..self.len())
            .map(|i| {
                let (a, b) = self.edge(i);
                point_segment_distance(p, a, b)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// True if `p` is inside or within `tol` of the boundary.
    pub fn contains(&self, p: Vec2, tol: f64) -> bool {
        self.strictly_contains(p) || self.boundary_distance(p) <= tol
    }

    /// Crossing-number test; points exactly on the boundary may land either way.
    pub fn strictly_contains(&self, p: Vec2) -> bool {
        let n = self.len();
        let mut inside = false;
        for i in 0..n {
            let (a, b) = self.edge(i);
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn centroid(&self) -> Vec2 {
        let n = self.len();
        let mut c = Vec2::zeros();
        for i in 0..n {
            let (a, b) = self.edge(i);
            c += (a + b) * cross(a, b);
        }
        c / (6.0 * self.signed_area())
    }

    pub fn translated(&self, offset: Vec2) -> Self {
        Self { vertices: self.vertices.iter().map(|v| v + offset).collect() }
    }

    /// True if the interiors of two polygons overlap.
    pub fn overlaps(&self, other: &PlanarPolygon, tol: f64) -> bool {
        let (lo1, hi1) = self.bounding_box();
        let (lo2, hi2) = other.bounding_box();
        if lo1.x >= hi2.x - tol || lo2.x >= hi1.x - tol || lo1.y >= hi2.y - tol || lo2.y >= hi1.y - tol {
            return false;
        }
        for i in 0..self.len() {
            let (a0, a1) = self.edge(i);
            for j in 0..other.len() {
                let (b0, b1) = other.edge(j);
                if segments_cross_properly(a0, a1, b0, b1, tol) {
                    return true;
                }
            }
        }
        let interior = |p: &PlanarPolygon, q: &PlanarPolygon| {
            q.vertices.iter().any(|v| p.strictly_contains(*v) && p.boundary_distance(*v) > tol)
                || (p.strictly_contains(q.centroid()) && p.boundary_distance(q.centroid()) > tol)
        };
        interior(self, other) || interior(other, self)
    }
}

pub(crate) fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let e = b - a;
    let t = ((p - a).dot(&e) / e.norm_squared()).clamp(0.0, 1.0);
    (a + e * t - p).norm()
}

fn segments_touch(a0: Vec2, a1: Vec2, b0: Vec2, b1: Vec2, tol: f64) -> bool {
    segments_cross_properly(a0, a1, b0, b1, 0.0)
        || point_segment_distance(a0, b0, b1) <= tol
        || point_segment_distance(a1, b0, b1) <= tol
        || point_segment_distance(b0, a0, a1) <= tol
        || point_segment_distance(b1, a0, a1) <= tol
}

/// Segments cross at a point interior to both, away from endpoints by more than `tol`.
fn segments_cross_properly(a0: Vec2, a1: Vec2, b0: Vec2, b1: Vec2, tol: f64) -> bool {
    let da = a1 - a0;
    let db = b1 - b0;
    let denom = cross(da, db);
    if denom.abs() < 1e-300 {
        return false;
    }
    let t = cross(b0 - a0, db) / denom;
    let s = cross(b0 - a0, da) / denom;
    let ta = tol / da.norm();
    let tb = tol / db.norm();
    t > ta && t < 1.0 - ta && s > tb && s < 1.0 - tb
}
