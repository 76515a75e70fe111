use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::polygon::cross;
use super::{GeometryError, PlanarPolygon, Vec2};

const MAX_VERTEX_WALK: usize = 10_000;

/// `(polygon index, edge index)`; serialized as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct EdgeRef {
    pub polygon: usize,
    pub edge: usize,
}

impl EdgeRef {
    pub fn new(polygon: usize, edge: usize) -> Self {
        Self { polygon, edge }
    }
}

impl From<[usize; 2]> for EdgeRef {
    fn from(a: [usize; 2]) -> Self {
        Self::new(a[0], a[1])
    }
}

impl From<EdgeRef> for [usize; 2] {
    fn from(e: EdgeRef) -> Self {
        [e.polygon, e.edge]
    }
}

/// Edge `b` is edge `a` translated by `tau`, traversed in the opposite direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeIdentification {
    pub a: EdgeRef,
    pub b: EdgeRef,
    pub tau: Vec2,
}

/// A point of the surface in the coordinates of one of its polygons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub polygon: usize,
    pub position: Vec2,
}

impl SurfacePoint {
    pub fn new(polygon: usize, position: Vec2) -> Self {
        Self { polygon, position }
    }
}

/// Equivalence class of identified vertices, listed in counterclockwise order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConePoint {
    pub representative_vertices: Vec<(usize, usize)>,
    pub total_angle: f64,
}

impl ConePoint {
    /// Total angle strictly above 2π: a genuine singularity of the flat metric.
    pub fn is_singular(&self) -> bool {
        self.total_angle > TAU + 1e-6
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TranslationSurface {
    pub polygons: Vec<PlanarPolygon>,
    pub identifications: Vec<EdgeIdentification>,
    pub cone_points: Vec<ConePoint>,
    pub total_area: f64,
    pub tol_geom: f64,
    /// `partners[p][e] = (edge, τ)` with `edge = (p, e) + τ`.
    partners: Vec<Vec<(EdgeRef, Vec2)>>,
    /// `vertex_class[p][v]` indexes `cone_points`.
    vertex_class: Vec<Vec<usize>>,
}

pub fn build_surface(
    polygons: Vec<PlanarPolygon>,
    identifications: Vec<EdgeIdentification>,
    tol_geom: f64,
) -> Result<TranslationSurface, GeometryError> {
    if polygons.is_empty() || identifications.is_empty() {
        return Err(GeometryError::NonMatching("empty polygon or identification list".into()));
    }
    let mut partners: Vec<Vec<Option<(EdgeRef, Vec2)>>> = polygons.iter().map(|p| vec![None; p.len()]).collect();
    let valid = |e: EdgeRef| e.polygon < polygons.len() && e.edge < polygons[e.polygon].len();
    for id in &identifications {
        for e in [id.a, id.b] {
            if !valid(e) {
                return Err(GeometryError::NonMatching(format!("edge {e:?} does not exist")));
            }
        }
        if id.a == id.b {
            return Err(GeometryError::NonMatching(format!("edge {:?} paired with itself", id.a)));
        }
        let (a0, a1) = polygons[id.a.polygon].edge(id.a.edge);
        let (b0, b1) = polygons[id.b.polygon].edge(id.b.edge);
        let da = a1 - a0;
        let db = b1 - b0;
        let mismatch = |reason: String| GeometryError::PairingMismatch { a: id.a, b: id.b, reason };
        if cross(da, db).abs() > tol_geom * da.norm().max(db.norm()) {
            return Err(mismatch("edges are not parallel".into()));
        }
        if (da.norm() - db.norm()).abs() > tol_geom {
            return Err(mismatch("edge lengths differ".into()));
        }
        if da.dot(&db) >= 0.0 {
            return Err(mismatch("edges must have opposite orientation".into()));
        }
        if (a1 + id.tau - b0).norm() > tol_geom || (a0 + id.tau - b1).norm() > tol_geom {
            return Err(mismatch("translation does not carry edge a onto edge b".into()));
        }
        for (from, to, tau) in [(id.a, id.b, id.tau), (id.b, id.a, -id.tau)] {
            let slot = &mut partners[from.polygon][from.edge];
            if slot.is_some() {
                return Err(GeometryError::NonMatching(format!("edge {from:?} paired twice")));
            }
            *slot = Some((to, tau));
        }
    }
    let partners: Vec<Vec<(EdgeRef, Vec2)>> = partners
        .into_iter()
        .enumerate()
        .map(|(p, row)| {
            row.into_iter()
                .enumerate()
                .map(|(e, s)| s.ok_or_else(|| GeometryError::NonMatching(format!("edge ({p}, {e}) is unpaired"))))
                .collect()
        })
        .collect::<Result<_, _>>()?;

    let total_area = polygons.iter().map(PlanarPolygon::area).sum();
    let mut vertex_class: Vec<Vec<usize>> = polygons.iter().map(|p| vec![usize::MAX; p.len()]).collect();
    let mut cone_points = Vec::new();
    for p0 in 0..polygons.len() {
        for v0 in 0..polygons[p0].len() {
            if vertex_class[p0][v0] != usize::MAX {
                continue;
            }
            let class = cone_points.len();
            let mut members = Vec::new();
            let mut angle = 0.0;
            let (mut p, mut v) = (p0, v0);
            loop {
                if members.len() >= MAX_VERTEX_WALK {
                    return Err(GeometryError::VertexWalkOverflow(MAX_VERTEX_WALK));
                }
                vertex_class[p][v] = class;
                members.push((p, v));
                angle += polygons[p].interior_angle(v);
                // Cross the incoming edge; its partner starts at the same surface point.
                let n = polygons[p].len();
                let (next, _) = partners[p][(v + n - 1) % n];
                p = next.polygon;
                v = next.edge;
                if (p, v) == (p0, v0) {
                    break;
                }
                if vertex_class[p][v] != usize::MAX {
                    return Err(GeometryError::NonMatching(format!(
                        "vertex walk from ({p0}, {v0}) re-entered another class"
                    )));
                }
            }
            let multiple = angle / TAU;
            if multiple < 0.5 || (multiple - multiple.round()).abs() > 1e-6 {
                return Err(GeometryError::InvalidConeAngle { class, angle });
            }
            cone_points.push(ConePoint { representative_vertices: members, total_angle: angle });
        }
    }
    let surface =
        TranslationSurface { polygons, identifications, cone_points, total_area, tol_geom, partners, vertex_class };
    let excess: f64 = surface.cone_points.iter().map(|c| c.total_angle - TAU).sum();
    let chi = surface.euler_characteristic();
    if (excess + TAU * chi as f64).abs() > 1e-6 {
        return Err(GeometryError::NonMatching(format!(
            "Gauss-Bonnet violated: angle excess {excess} vs Euler characteristic {chi}"
        )));
    }
    Ok(surface)
}

/// Total angle of each cone point.
pub fn cone_angles(surface: &TranslationSurface) -> Vec<f64> {
    surface.cone_points.iter().map(|c| c.total_angle).collect()
}

impl TranslationSurface {
    pub fn polygon(&self, i: usize) -> &PlanarPolygon {
        &self.polygons[i]
    }

    /// Partner edge of `(polygon, edge)` and the translation carrying this edge onto it.
    pub fn partner(&self, polygon: usize, edge: usize) -> (EdgeRef, Vec2) {
        self.partners[polygon][edge]
    }

    pub fn vertex_class(&self, polygon: usize, vertex: usize) -> usize {
        self.vertex_class[polygon][vertex]
    }

    pub fn is_singular_vertex(&self, polygon: usize, vertex: usize) -> bool {
        self.cone_points[self.vertex_class[polygon][vertex]].is_singular()
    }

    pub fn has_singularities(&self) -> bool {
        self.cone_points.iter().any(ConePoint::is_singular)
    }

    /// V − E + F after identification.
    pub fn euler_characteristic(&self) -> i64 {
        self.cone_points.len() as i64 - self.identifications.len() as i64 + self.polygons.len() as i64
    }

    pub fn genus(&self) -> i64 {
        (2 - self.euler_characteristic()) / 2
    }

    /// Lowest-index polygon containing the plane point `x`.
    pub fn locate(&self, x: Vec2) -> Option<SurfacePoint> {
        self.polygons
            .iter()
            .position(|p| p.strictly_contains(x) && p.boundary_distance(x) > 0.0)
            .or_else(|| self.polygons.iter().position(|p| p.contains(x, self.tol_geom)))
            .map(|i| SurfacePoint::new(i, x))
    }

    /// Member of vertex class `class` whose angular sector contains direction `d`.
    pub(crate) fn sector_containing(&self, class: usize, d: Vec2) -> (usize, usize) {
        let cone = &self.cone_points[class];
        let mut best = cone.representative_vertices[0];
        let mut best_overshoot = f64::INFINITY;
        for &(p, v) in &cone.representative_vertices {
            let e = self.polygons[p].edge_vector(v);
            let mut ang = cross(e, d).atan2(e.dot(&d));
            if ang < -1e-12 {
                ang += TAU;
            }
            let alpha = self.polygons[p].interior_angle(v);
            let overshoot = (ang - alpha).max(-ang).max(0.0);
            if ang < alpha - 1e-12 && ang >= -1e-12 {
                return (p, v);
            }
            if overshoot < best_overshoot {
                best_overshoot = overshoot;
                best = (p, v);
            }
        }
        best
    }

    /// Square torus of the given side, one polygon with opposite sides paired.
    pub fn square_torus(side: f64) -> Self {
        let s = side;
        let poly = PlanarPolygon::new(
            vec![Vec2::new(0.0, 0.0), Vec2::new(s, 0.0), Vec2::new(s, s), Vec2::new(0.0, s)],
            super::DEFAULT_TOL_GEOM,
        )
        .expect("square is a valid polygon");
        let ids = vec![
            EdgeIdentification { a: EdgeRef::new(0, 0), b: EdgeRef::new(0, 2), tau: Vec2::new(0.0, s) },
            EdgeIdentification { a: EdgeRef::new(0, 1), b: EdgeRef::new(0, 3), tau: Vec2::new(-s, 0.0) },
        ];
        build_surface(vec![poly], ids, super::DEFAULT_TOL_GEOM * s.max(1.0)).expect("square torus is valid")
    }

    /// Three unit squares in an L, opposite sides paired; genus two with one 6π cone point.
    pub fn l_surface() -> Self {
        let pts = [(0., 0.), (1., 0.), (2., 0.), (2., 1.), (1., 1.), (1., 2.), (0., 2.), (0., 1.)];
        let poly = PlanarPolygon::new(pts.iter().map(|&(x, y)| Vec2::new(x, y)).collect(), super::DEFAULT_TOL_GEOM)
            .expect("L polygon is valid");
        let id = |a: usize, b: usize, tx: f64, ty: f64| EdgeIdentification {
            a: EdgeRef::new(0, a),
            b: EdgeRef::new(0, b),
            tau: Vec2::new(tx, ty),
        };
        let ids = vec![id(0, 5, 0.0, 2.0), id(1, 3, 0.0, 1.0), id(2, 7, -2.0, 0.0), id(4, 6, -1.0, 0.0)];
        build_surface(vec![poly], ids, super::DEFAULT_TOL_GEOM).expect("L surface is valid")
    }

    /// Two unit squares side by side with tops and bottoms cross-paired.
    pub fn two_square_torus() -> Self {
        let sq = |x0: f64| {
            PlanarPolygon::new(
                vec![Vec2::new(x0, 0.0), Vec2::new(x0 + 1.0, 0.0), Vec2::new(x0 + 1.0, 1.0), Vec2::new(x0, 1.0)],
                super::DEFAULT_TOL_GEOM,
            )
            .expect("square is valid")
        };
        let id = |pa: usize, ea: usize, pb: usize, eb: usize, tx: f64, ty: f64| EdgeIdentification {
            a: EdgeRef::new(pa, ea),
            b: EdgeRef::new(pb, eb),
            tau: Vec2::new(tx, ty),
        };
        let ids = vec![
            id(0, 1, 1, 3, 0.0, 0.0),
            id(1, 1, 0, 3, -2.0, 0.0),
            id(0, 0, 1, 2, 1.0, 1.0),
            id(1, 0, 0, 2, -1.0, 1.0),
        ];
        build_surface(vec![sq(0.0), sq(1.0)], ids, super::DEFAULT_TOL_GEOM).expect("two-square surface is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn class_angle_sum(surface: &TranslationSurface, class: usize) -> f64 {
        surface.cone_points[class]
            .representative_vertices
            .iter()
            .map(|&(p, v)| surface.polygons[p].interior_angle(v))
            .sum()
    }

    fn unit_square() -> PlanarPolygon {
        PlanarPolygon::new(vec![Vec2::new(0., 0.), Vec2::new(1., 0.), Vec2::new(1., 1.), Vec2::new(0., 1.)], 1e-9)
            .unwrap()
    }

    #[test]
    fn torus_has_one_regular_cone_point() {
        let t = TranslationSurface::square_torus(1.0);
        assert_eq!(cone_angles(&t).len(), 1);
        assert_relative_eq!(cone_angles(&t)[0], TAU, epsilon = 1e-12);
        assert_relative_eq!(t.total_area, 1.0);
        assert_eq!(t.genus(), 1);
        assert!(!t.has_singularities());
    }

    #[test]
    fn left_to_bottom_is_mismatch() {
        let ids = vec![
            EdgeIdentification { a: EdgeRef::new(0, 3), b: EdgeRef::new(0, 0), tau: Vec2::new(0.0, 0.0) },
            EdgeIdentification { a: EdgeRef::new(0, 1), b: EdgeRef::new(0, 2), tau: Vec2::new(0.0, 0.0) },
        ];
        let r = build_surface(vec![unit_square()], ids, 1e-9);
        assert!(matches!(r, Err(GeometryError::PairingMismatch { .. })), "{r:?}");
    }

    #[test]
    fn unpaired_and_double_paired_edges() {
        let one = vec![EdgeIdentification { a: EdgeRef::new(0, 0), b: EdgeRef::new(0, 2), tau: Vec2::new(0.0, 1.0) }];
        assert!(matches!(build_surface(vec![unit_square()], one.clone(), 1e-9), Err(GeometryError::NonMatching(_))));
        let twice = vec![one[0], one[0]];
        assert!(matches!(build_surface(vec![unit_square()], twice, 1e-9), Err(GeometryError::NonMatching(_))));
    }

    #[test]
    fn l_surface_single_six_pi_cone() {
        let l = TranslationSurface::l_surface();
        let angles = cone_angles(&l);
        assert_eq!(angles.len(), 1);
        assert_relative_eq!(angles[0], 3.0 * TAU, epsilon = 1e-12);
        assert_relative_eq!(l.total_area, 3.0);
        assert_eq!(l.genus(), 2);
        assert_eq!(l.cone_points[0].representative_vertices.len(), 8);
        assert_relative_eq!(class_angle_sum(&l, 0), angles[0]);
    }

    #[test]
    fn two_square_torus_all_regular() {
        let s = TranslationSurface::two_square_torus();
        let angles = cone_angles(&s);
        assert_eq!(angles.len(), 2);
        for a in angles {
            assert_relative_eq!(a, TAU, epsilon = 1e-12);
        }
        assert_eq!(s.euler_characteristic(), 0);
    }

    #[test]
    fn identifications_translate_edges() {
        for s in [
            TranslationSurface::square_torus(1.0),
            TranslationSurface::l_surface(),
            TranslationSurface::two_square_torus(),
        ] {
            for id in &s.identifications {
                let (a0, a1) = s.polygons[id.a.polygon].edge(id.a.edge);
                let (b0, b1) = s.polygons[id.b.polygon].edge(id.b.edge);
                assert!((a1 + id.tau - b0).norm() < 1e-12 && (a0 + id.tau - b1).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn locate_prefers_lowest_index() {
        let s = TranslationSurface::two_square_torus();
        assert_eq!(s.locate(Vec2::new(0.5, 0.5)).unwrap().polygon, 0);
        assert_eq!(s.locate(Vec2::new(1.5, 0.5)).unwrap().polygon, 1);
        assert_eq!(s.locate(Vec2::new(1.0, 0.5)).unwrap().polygon, 0);
        assert!(s.locate(Vec2::new(3.0, 0.5)).is_none());
    }
}
