use std::collections::VecDeque;
use std::f64::consts::PI;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::{build_surface, EdgeIdentification, EdgeRef, GeometryError, Mat2, PlanarPolygon, TranslationSurface, Vec2};

/// Default cap on the order of the unfolding group.
pub const DEFAULT_UNFOLD_CAP: usize = 1024;
const CF_DENOMINATOR_CAP: u64 = 64;

/// Planar isometry `x ↦ linear·x + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Isometry {
    pub linear: Mat2,
    pub offset: Vec2,
}

impl Isometry {
    pub fn identity() -> Self {
        Self { linear: Mat2::identity(), offset: Vec2::zeros() }
    }

    pub fn apply(&self, x: Vec2) -> Vec2 {
        self.linear * x + self.offset
    }

    pub fn apply_linear(&self, v: Vec2) -> Vec2 {
        self.linear * v
    }

    pub fn inverse_apply(&self, y: Vec2) -> Vec2 {
        self.linear.transpose() * (y - self.offset)
    }

    pub fn is_reflection(&self) -> bool {
        self.linear.determinant() < 0.0
    }
}

/// Rational polygon `P` unfolded into the translation surface `∪ g·P`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DihedralUnfolding {
    pub base_polygon: PlanarPolygon,
    /// Copy `k` of `P` is `group_elements[k]` applied to `P`; it is polygon `k` of `surface`.
    pub group_elements: Vec<Isometry>,
    pub surface: TranslationSurface,
    pub group_order: usize,
}

impl DihedralUnfolding {
    /// Index in the copy's vertex list of original vertex `i`.
    pub fn copy_vertex_index(&self, copy: usize, i: usize) -> usize {
        let n = self.base_polygon.len();
        if self.group_elements[copy].is_reflection() {
            (n - i) % n
        } else {
            i
        }
    }

    /// Copy-local edge index of original edge `i`.
    pub fn copy_edge_index(&self, copy: usize, i: usize) -> usize {
        copy_edge_index(self.group_elements[copy].is_reflection(), self.base_polygon.len(), i)
    }
}

fn copy_edge_index(reflected: bool, n: usize, i: usize) -> usize {
    if reflected {
        n - 1 - i
    } else {
        i
    }
}

/// Continued-fraction test: `angle = π·p/q` with `q ≤ 64` within `tol`.
pub fn rational_angle(angle: f64, tol: f64) -> Option<(u64, u64)> {
    let x = angle / PI;
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if !(0.0..=1e6).contains(&a) {
            return None;
        }
        let a = a as u64;
        let h2 = a * h1 + h0;
        let k2 = a * k1 + k0;
        if k2 > CF_DENOMINATOR_CAP {
            return None;
        }
        if (PI * (x - h2 as f64 / k2 as f64)).abs() <= tol {
            return Some((h2, k2));
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a as f64;
        if frac.abs() < 1e-15 {
            return None;
        }
        r = 1.0 / frac;
    }
    None
}

fn reflection_along(d: Vec2) -> Mat2 {
    let phi = d.y.atan2(d.x);
    let (s, c) = (2.0 * phi).sin_cos();
    Mat2::new(c, s, s, -c)
}

fn copy_polygon(g: &Isometry, p: &PlanarPolygon, tol: f64) -> Result<PlanarPolygon, GeometryError> {
    let n = p.len();
    let verts: Vec<Vec2> = if g.is_reflection() {
        (0..n).map(|j| g.apply(p.vertex((n - j) % n))).collect()
    } else {
        p.vertices().iter().map(|v| g.apply(*v)).collect()
    };
    PlanarPolygon::new(verts, tol)
}

/// Unfolds `polygon` under the group generated by reflections in its edge directions.
///
/// `angle_denominators` gives `q_i` with `angle_i = π p_i / q_i`; an empty slice
/// requests continued-fraction detection.
pub fn unfold_rational_polygon(
    polygon: &PlanarPolygon,
    angle_denominators: &[u32],
    tol_geom: f64,
) -> Result<DihedralUnfolding, GeometryError> {
    unfold_rational_polygon_with_cap(polygon, angle_denominators, tol_geom, DEFAULT_UNFOLD_CAP)
}

pub fn unfold_rational_polygon_with_cap(
    polygon: &PlanarPolygon,
    angle_denominators: &[u32],
    tol_geom: f64,
    cap: usize,
) -> Result<DihedralUnfolding, GeometryError> {
    let n = polygon.len();
    if !angle_denominators.is_empty() && angle_denominators.len() != n {
        return Err(GeometryError::Format(format!(
            "{} angle denominators for {} vertices",
            angle_denominators.len(),
            n
        )));
    }
    for i in 0..n {
        let angle = polygon.interior_angle(i);
        let ok = if angle_denominators.is_empty() {
            rational_angle(angle, tol_geom).is_some()
        } else {
            let q = angle_denominators[i] as f64;
            q > 0.0 && (angle - PI * (angle / PI * q).round() / q).abs() <= tol_geom
        };
        if !ok {
            return Err(GeometryError::IrrationalAngle { vertex: i, angle });
        }
    }

    let generators: Vec<Mat2> = (0..n).map(|i| reflection_along(polygon.edge_vector(i))).collect();
    let mut elements = vec![Mat2::identity()];
    let find = |els: &[Mat2], m: &Mat2| els.iter().position(|e| (e - m).abs().max() < 1e-9);
    let mut head = 0;
    while head < elements.len() {
        let g = elements[head];
        for r in &generators {
            let h = g * r;
            if find(&elements, &h).is_none() {
                elements.push(h);
                if elements.len() > cap {
                    return Err(GeometryError::UnfoldOverflow(cap));
                }
            }
        }
        head += 1;
    }
    let order = elements.len();
    let neighbor: Vec<Vec<usize>> = elements
        .iter()
        .map(|g| generators.iter().map(|r| find(&elements, &(g * r)).expect("group is closed")).collect())
        .collect();

    // Place copies by reflecting across shared edges; shift any copy that would overlap.
    let mut placed: Vec<Option<Isometry>> = vec![None; order];
    let mut polys: Vec<Option<PlanarPolygon>> = vec![None; order];
    placed[0] = Some(Isometry::identity());
    polys[0] = Some(polygon.clone());
    let mut queue = VecDeque::from([0usize]);
    while let Some(k) = queue.pop_front() {
        let ak = placed[k].expect("queued copies are placed");
        for i in 0..n {
            let j = neighbor[k][i];
            if placed[j].is_some() {
                continue;
            }
            let p0 = ak.apply(polygon.vertex(i));
            let m = ak.linear * generators[i] * ak.linear.transpose();
            let mut aj = Isometry { linear: elements[j], offset: m * (ak.offset - p0) + p0 };
            let mut cand = copy_polygon(&aj, polygon, tol_geom)?;
            if polys.iter().flatten().any(|q| q.overlaps(&cand, tol_geom)) {
                let right = polys.iter().flatten().map(|q| q.bounding_box().1.x).fold(f64::MIN, f64::max);
                let shift = Vec2::new(right + 1.0 - cand.bounding_box().0.x, 0.0);
                aj.offset += shift;
                cand = cand.translated(shift);
            }
            placed[j] = Some(aj);
            polys[j] = Some(cand);
            queue.push_back(j);
        }
    }
    let group_elements: Vec<Isometry> = placed.into_iter().map(|g| g.expect("group acts transitively")).collect();
    let polys: Vec<PlanarPolygon> = polys.into_iter().map(|p| p.expect("all copies placed")).collect();

    let mut identifications = Vec::new();
    for k in 0..order {
        for i in 0..n {
            let j = neighbor[k][i];
            if (j, i) <= (k, i) {
                continue;
            }
            let ek = copy_edge_index(group_elements[k].is_reflection(), n, i);
            let ej = copy_edge_index(group_elements[j].is_reflection(), n, i);
            let (_, k_end) = polys[k].edge(ek);
            let (j_start, _) = polys[j].edge(ej);
            identifications.push(EdgeIdentification {
                a: EdgeRef::new(k, ek),
                b: EdgeRef::new(j, ej),
                tau: j_start - k_end,
            });
        }
    }
    let surface = build_surface(polys, identifications, tol_geom)?;
    Ok(DihedralUnfolding { base_polygon: polygon.clone(), group_elements, surface, group_order: order })
}

/// Returns `g⁻¹x ∈ P` and the index of the lowest copy `g·P` containing `x`.
pub fn fold_point(unfolding: &DihedralUnfolding, x: Vec2) -> Result<(Vec2, usize), GeometryError> {
    let tol = unfolding.surface.tol_geom;
    unfolding
        .surface
        .polygons
        .iter()
        .position(|p| p.contains(x, tol))
        .map(|k| (unfolding.group_elements[k].inverse_apply(x), k))
        .ok_or(GeometryError::PointOutsideSurface { x: x.x, y: x.y })
}

/// Least common multiple of the denominators, as used for the expected group order.
pub fn lcm_of(denominators: &[u32]) -> u64 {
    denominators.iter().fold(1u64, |acc, &q| acc.lcm(&(q as u64)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn poly(pts: &[(f64, f64)]) -> PlanarPolygon {
        PlanarPolygon::new(pts.iter().map(|&(x, y)| Vec2::new(x, y)).collect(), 1e-9).unwrap()
    }

    #[test]
    fn continued_fraction_detection() {
        assert_eq!(rational_angle(PI / 2.0, 1e-9), Some((1, 2)));
        assert_eq!(rational_angle(3.0 * PI / 4.0, 1e-9), Some((3, 4)));
        assert_eq!(rational_angle(2.0 * PI / 7.0, 1e-9), Some((2, 7)));
        assert_eq!(rational_angle(1.0, 1e-9), None);
    }

    #[test]
    fn square_unfolds_to_two_by_two_torus() {
        let sq = poly(&[(0., 0.), (1., 0.), (1., 1.), (0., 1.)]);
        let u = unfold_rational_polygon(&sq, &[2, 2, 2, 2], 1e-9).unwrap();
        assert_eq!(u.group_order, 4);
        assert_eq!(u.group_order as u64, 2 * lcm_of(&[2, 2, 2, 2]));
        assert_relative_eq!(u.surface.total_area, 4.0, max_relative = 1e-12);
        assert_eq!(u.surface.genus(), 1);
        // The copies tile a 2x2 square without gaps.
        let mut lo = Vec2::new(f64::MAX, f64::MAX);
        let mut hi = Vec2::new(f64::MIN, f64::MIN);
        for p in &u.surface.polygons {
            let (a, b) = p.bounding_box();
            lo = lo.inf(&a);
            hi = hi.sup(&b);
        }
        assert!((hi - lo - Vec2::new(2.0, 2.0)).norm() < 1e-12);
        for a in super::super::cone_angles(&u.surface) {
            assert_relative_eq!(a, 2.0 * PI, epsilon = 1e-9);
        }
    }

    #[test]
    fn right_isosceles_triangle_order_eight() {
        let t = poly(&[(0., 0.), (1., 0.), (0., 1.)]);
        let u = unfold_rational_polygon(&t, &[2, 4, 4], 1e-9).unwrap();
        assert_eq!(u.group_order, 8);
        assert_relative_eq!(u.surface.total_area, 8.0 * 0.5, max_relative = 1e-12);
        assert_eq!(u.surface.genus(), 1);
        let auto = unfold_rational_polygon(&t, &[], 1e-9).unwrap();
        assert_eq!(auto.group_order, 8);
    }

    #[test]
    fn irrational_angle_rejected() {
        let t = poly(&[(0., 0.), (1., 0.), (0.3, 0.7)]);
        assert!(matches!(unfold_rational_polygon(&t, &[], 1e-9), Err(GeometryError::IrrationalAngle { .. })));
        let sq = poly(&[(0., 0.), (1., 0.), (1., 1.), (0., 1.)]);
        assert!(matches!(
            unfold_rational_polygon(&sq, &[3, 2, 2, 2], 1e-9),
            Err(GeometryError::IrrationalAngle { .. })
        ));
    }

    #[test]
    fn overflow_cap() {
        let t = poly(&[(0., 0.), (1., 0.), (0., 1.)]);
        assert!(matches!(
            unfold_rational_polygon_with_cap(&t, &[2, 4, 4], 1e-9, 4),
            Err(GeometryError::UnfoldOverflow(4))
        ));
    }

    #[test]
    fn fold_identity_and_reflection() {
        let sq = poly(&[(0., 0.), (1., 0.), (1., 1.), (0., 1.)]);
        let u = unfold_rational_polygon(&sq, &[2, 2, 2, 2], 1e-9).unwrap();
        let (y, g) = fold_point(&u, Vec2::new(0.3, 0.6)).unwrap();
        assert_eq!(g, 0);
        assert!((y - Vec2::new(0.3, 0.6)).norm() < 1e-15);
        let (y, g) = fold_point(&u, Vec2::new(1.3, 0.6)).unwrap();
        assert!(u.group_elements[g].is_reflection());
        assert!((y - Vec2::new(0.7, 0.6)).norm() < 1e-12);
        assert!(fold_point(&u, Vec2::new(2.5, 0.5)).is_err());
    }

    #[test]
    fn fold_inverts_every_copy() {
        let t = poly(&[(0., 0.), (1., 0.), (0., 1.)]);
        let u = unfold_rational_polygon(&t, &[2, 4, 4], 1e-9).unwrap();
        let y = Vec2::new(0.2, 0.3);
        for (k, g) in u.group_elements.iter().enumerate() {
            let (back, kk) = fold_point(&u, g.apply(y)).unwrap();
            assert_eq!(kk, k);
            assert!((back - y).norm() < 1e-12);
        }
    }
}
