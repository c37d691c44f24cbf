//! Capsules, balls and halfspace polytopes, with the exact distance,
//! intersection and containment queries the reachability code is built on.
//!
//! Polytopes precompute their feasible edges and vertices once, so point and
//! segment distances reduce to a closest-feature enumeration over facets,
//! edges and vertices. That enumeration is exact for convex polytopes,
//! bounded or not.

use nalgebra::{Isometry3, Matrix3, Point3, Vector3};
use thiserror::Error;

/// Distance at or below which two sets count as intersecting (meters).
pub const GEOM_EPS: f64 = 1e-9;

const NORMAL_TOL: f64 = 1e-9;
const FEASIBILITY_TOL: f64 = 1e-9;
const DEGENERATE_SQ: f64 = 1e-24;
const PARALLEL_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("polytope normal {index} has norm {norm}, expected 1")]
    NonUnitNormal { index: usize, norm: f64 },
    #[error("polytope has {normals} normals but {offsets} offsets")]
    CountMismatch { normals: usize, offsets: usize },
    #[error("polytope needs at least one halfspace")]
    NoHalfspaces,
    #[error("non-finite value in geometric input")]
    NonFinite,
    #[error("box has min {min:?} above max {max:?}")]
    InvertedBox { min: [f64; 3], max: [f64; 3] },
}

/// Segment `p1`–`p2` swept by a ball of `radius`. `p1 == p2` is a ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capsule {
    pub p1: Point3<f64>,
    pub p2: Point3<f64>,
    pub radius: f64,
}

/// Ball with center and radius; convertible to a degenerate capsule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: Point3<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point3<f64>, radius: f64) -> Self {
        assert!(radius >= 0.0, "ball radius must be non-negative");
        Self { center, radius }
    }

    pub fn to_capsule(self) -> Capsule {
        Capsule::new(self.center, self.center, self.radius)
    }
}

impl Capsule {
    pub fn new(p1: Point3<f64>, p2: Point3<f64>, radius: f64) -> Self {
        assert!(radius >= 0.0, "capsule radius must be non-negative");
        Self { p1, p2, radius }
    }

    pub fn ball(center: Point3<f64>, radius: f64) -> Self {
        Self::new(center, center, radius)
    }

    pub fn is_finite(&self) -> bool {
        self.p1.coords.iter().chain(self.p2.coords.iter()).all(|v| v.is_finite())
            && self.radius.is_finite()
    }

    pub fn axis(&self) -> Vector3<f64> {
        self.p2 - self.p1
    }

    pub fn segment_length(&self) -> f64 {
        self.axis().norm()
    }

    pub fn point_at(&self, lambda: f64) -> Point3<f64> {
        self.p1 + self.axis() * lambda
    }

    pub fn inflated(&self, extra: f64) -> Self {
        Self::new(self.p1, self.p2, self.radius + extra)
    }

    pub fn translated(&self, t: &Vector3<f64>) -> Self {
        Self::new(self.p1 + t, self.p2 + t, self.radius)
    }

    pub fn transformed(&self, iso: &Isometry3<f64>) -> Self {
        Self::new(iso * self.p1, iso * self.p2, self.radius)
    }

    /// Support function `max_{p in C} n·p` for a unit `n`.
    pub fn support(&self, n: &Vector3<f64>) -> f64 {
        n.dot(&self.p1.coords).max(n.dot(&self.p2.coords)) + self.radius * n.norm()
    }

    /// Distance from `p` to the segment axis.
    pub fn axis_distance(&self, p: &Point3<f64>) -> f64 {
        point_segment_distance(p, &self.p1, &self.p2)
    }

    /// Distance from `p` to the capsule, zero inside.
    pub fn distance_to_point(&self, p: &Point3<f64>) -> f64 {
        (self.axis_distance(p) - self.radius).max(0.0)
    }

    pub fn contains_point(&self, p: &Point3<f64>) -> bool {
        self.axis_distance(p) <= self.radius + GEOM_EPS
    }

    /// True when `other` lies inside `self` up to `GEOM_EPS`.
    ///
    /// Distance to a segment is convex along another segment, so checking the
    /// two axis endpoints of `other` is exact.
    pub fn contains_capsule(&self, other: &Capsule) -> bool {
        let reach = self.radius - other.radius + GEOM_EPS;
        reach >= 0.0 && self.axis_distance(&other.p1) <= reach && self.axis_distance(&other.p2) <= reach
    }

    /// A capsule enclosing both `a` and `b`, built on the midpoints of
    /// corresponding endpoints.
    pub fn enclosing(a: &Capsule, b: &Capsule) -> Capsule {
        let m1 = nalgebra::center(&a.p1, &b.p1);
        let m2 = nalgebra::center(&a.p2, &b.p2);
        let spread = (a.p1 - b.p1).norm().max((a.p2 - b.p2).norm()) * 0.5;
        Capsule::new(m1, m2, a.radius.max(b.radius) + spread)
    }

    fn order_key(&self) -> [f64; 7] {
        [
            self.p1.x, self.p1.y, self.p1.z, self.p2.x, self.p2.y, self.p2.z, self.radius,
        ]
    }
}

/// Oriented box: center, orthonormal axes and half extents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox {
    pub center: Point3<f64>,
    pub axes: [Vector3<f64>; 3],
    pub half_extents: [f64; 3],
}

impl OrientedBox {
    /// Tightest box aligned with the capsule axis.
    pub fn around_capsule(c: &Capsule) -> Self {
        let axis = c.axis();
        let len = axis.norm();
        let (u, v, w) = if len > 1e-12 {
            let u = axis / len;
            let (v, w) = orthonormal_complement(&u);
            (u, v, w)
        } else {
            (Vector3::x(), Vector3::y(), Vector3::z())
        };
        Self {
            center: nalgebra::center(&c.p1, &c.p2),
            axes: [u, v, w],
            half_extents: [0.5 * len + c.radius, c.radius, c.radius],
        }
    }

    pub fn to_polytope(&self) -> Polytope {
        let mut normals = Vec::with_capacity(6);
        let mut offsets = Vec::with_capacity(6);
        for (axis, half) in self.axes.iter().zip(self.half_extents) {
            let c = axis.dot(&self.center.coords);
            normals.push(*axis);
            offsets.push(c + half);
            normals.push(-axis);
            offsets.push(-c + half);
        }
        Polytope::new(normals, offsets).expect("box axes are unit vectors")
    }
}

fn orthonormal_complement(u: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let helper = if u.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let v = u.cross(&helper).normalize();
    let w = u.cross(&v);
    (v, w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Edge {
    origin: Point3<f64>,
    dir: Vector3<f64>,
    lo: f64,
    hi: f64,
}

/// Convex set `{p : normals[h]·p ≤ offsets[h] for all h}` with unit normals.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    normals: Vec<Vector3<f64>>,
    offsets: Vec<f64>,
    edges: Vec<Edge>,
    vertices: Vec<Point3<f64>>,
}

impl Polytope {
    pub fn new(normals: Vec<Vector3<f64>>, offsets: Vec<f64>) -> Result<Self, GeometryError> {
        if normals.len() != offsets.len() {
            return Err(GeometryError::CountMismatch { normals: normals.len(), offsets: offsets.len() });
        }
        if normals.is_empty() {
            return Err(GeometryError::NoHalfspaces);
        }
        for (index, n) in normals.iter().enumerate() {
            if !n.iter().all(|v| v.is_finite()) || !offsets[index].is_finite() {
                return Err(GeometryError::NonFinite);
            }
            let norm = n.norm();
            if (norm - 1.0).abs() > NORMAL_TOL {
                return Err(GeometryError::NonUnitNormal { index, norm });
            }
        }
        let mut poly = Self { normals, offsets, edges: Vec::new(), vertices: Vec::new() };
        poly.edges = poly.enumerate_edges();
        poly.vertices = poly.enumerate_vertices();
        Ok(poly)
    }

    pub fn aabb(min: [f64; 3], max: [f64; 3]) -> Result<Self, GeometryError> {
        if (0..3).any(|k| min[k] > max[k]) {
            return Err(GeometryError::InvertedBox { min, max });
        }
        let mut normals = Vec::with_capacity(6);
        let mut offsets = Vec::with_capacity(6);
        for k in 0..3 {
            let mut e = Vector3::zeros();
            e[k] = 1.0;
            normals.push(e);
            offsets.push(max[k]);
            normals.push(-e);
            offsets.push(-min[k]);
        }
        Self::new(normals, offsets)
    }

    pub fn halfspace(normal: Vector3<f64>, offset: f64) -> Result<Self, GeometryError> {
        Self::new(vec![normal], vec![offset])
    }

    pub fn normals(&self) -> &[Vector3<f64>] {
        &self.normals
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.normals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }

    /// Feasible vertices found by intersecting triples of boundary planes.
    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    pub fn contains(&self, p: &Point3<f64>) -> bool {
        self.violation(p) <= 0.0
    }

    fn violation(&self, p: &Point3<f64>) -> f64 {
        self.normals
            .iter()
            .zip(&self.offsets)
            .map(|(n, d)| n.dot(&p.coords) - d)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn feasible(&self, p: &Point3<f64>) -> bool {
        self.violation(p) <= FEASIBILITY_TOL
    }

    fn enumerate_edges(&self) -> Vec<Edge> {
        let h = self.normals.len();
        let mut edges = Vec::new();
        for a in 0..h {
            for b in (a + 1)..h {
                let (na, nb) = (self.normals[a], self.normals[b]);
                let cross = na.cross(&nb);
                let cross_sq = cross.norm_squared();
                if cross_sq < PARALLEL_TOL {
                    continue;
                }
                let (da, db) = (self.offsets[a], self.offsets[b]);
                let nab = na.dot(&nb);
                let origin = Point3::from(
                    (na * (da - db * nab) + nb * (db - da * nab)) / cross_sq,
                );
                let dir = cross / cross_sq.sqrt();
                let mut lo = f64::NEG_INFINITY;
                let mut hi = f64::INFINITY;
                let mut empty = false;
                for m in 0..h {
                    if m == a || m == b {
                        continue;
                    }
                    let rate = self.normals[m].dot(&dir);
                    let slack = self.offsets[m] - self.normals[m].dot(&origin.coords);
                    if rate.abs() < PARALLEL_TOL {
                        if slack < -FEASIBILITY_TOL {
                            empty = true;
                            break;
                        }
                    } else if rate > 0.0 {
                        hi = hi.min(slack / rate);
                    } else {
                        lo = lo.max(slack / rate);
                    }
                }
                if !empty && lo <= hi {
                    edges.push(Edge { origin, dir, lo, hi });
                }
            }
        }
        edges
    }

    fn enumerate_vertices(&self) -> Vec<Point3<f64>> {
        let h = self.normals.len();
        let mut vertices = Vec::new();
        for a in 0..h {
            for b in (a + 1)..h {
                for c in (b + 1)..h {
                    let m = Matrix3::from_rows(&[
                        self.normals[a].transpose(),
                        self.normals[b].transpose(),
                        self.normals[c].transpose(),
                    ]);
                    if m.determinant().abs() < 1e-9 {
                        continue;
                    }
                    let rhs = Vector3::new(self.offsets[a], self.offsets[b], self.offsets[c]);
                    if let Some(x) = m.lu().solve(&rhs) {
                        let p = Point3::from(x);
                        if self.feasible(&p) {
                            vertices.push(p);
                        }
                    }
                }
            }
        }
        vertices
    }

    /// Euclidean distance from `p` to the polytope, zero inside.
    pub fn point_distance(&self, p: &Point3<f64>) -> f64 {
        if self.contains(p) {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for (n, d) in self.normals.iter().zip(&self.offsets) {
            let gap = n.dot(&p.coords) - d;
            if gap > 0.0 && gap < best && self.feasible(&(p - n * gap)) {
                best = gap;
            }
        }
        for e in &self.edges {
            let t = (p - e.origin).dot(&e.dir).clamp(e.lo, e.hi);
            best = best.min((p - (e.origin + e.dir * t)).norm());
        }
        for v in &self.vertices {
            best = best.min((p - v).norm());
        }
        best
    }

    /// Negative inside (depth to the nearest boundary plane), positive outside.
    pub fn signed_distance(&self, p: &Point3<f64>) -> f64 {
        if self.contains(p) {
            -self
                .normals
                .iter()
                .zip(&self.offsets)
                .map(|(n, d)| d - n.dot(&p.coords))
                .fold(f64::INFINITY, f64::min)
        } else {
            self.point_distance(p)
        }
    }

    fn segment_hits(&self, a: &Point3<f64>, b: &Point3<f64>) -> bool {
        let dir = b - a;
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for (n, d) in self.normals.iter().zip(&self.offsets) {
            let slack = d - n.dot(&a.coords);
            let rate = n.dot(&dir);
            if rate.abs() < PARALLEL_TOL {
                if slack < 0.0 {
                    return false;
                }
            } else if rate > 0.0 {
                hi = hi.min(slack / rate);
            } else {
                lo = lo.max(slack / rate);
            }
            if lo > hi {
                return false;
            }
        }
        true
    }

    /// Distance between the segment `a`–`b` and the polytope.
    pub fn segment_distance(&self, a: &Point3<f64>, b: &Point3<f64>) -> f64 {
        if self.segment_hits(a, b) {
            return 0.0;
        }
        let dir = b - a;
        let mut best = self.point_distance(a).min(self.point_distance(b));
        for e in &self.edges {
            let (s, t) = closest_params(a, &dir, &e.origin, &e.dir, e.lo, e.hi);
            best = best.min(((a + dir * s) - (e.origin + e.dir * t)).norm());
        }
        for v in &self.vertices {
            best = best.min(point_segment_distance(v, a, b));
        }
        best
    }
}

/// Parameters `(s, t)` of the closest points between `p + s·d1`, `s ∈ [0, 1]`,
/// and `q + t·d2`, `t ∈ [t_lo, t_hi]` (bounds may be infinite).
fn closest_params(
    p: &Point3<f64>,
    d1: &Vector3<f64>,
    q: &Point3<f64>,
    d2: &Vector3<f64>,
    t_lo: f64,
    t_hi: f64,
) -> (f64, f64) {
    let r = p - q;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);
    if a <= DEGENERATE_SQ && e <= DEGENERATE_SQ {
        return (0.0, 0.0_f64.clamp(t_lo, t_hi));
    }
    if a <= DEGENERATE_SQ {
        return (0.0, (f / e).clamp(t_lo, t_hi));
    }
    let c = d1.dot(&r);
    if e <= DEGENERATE_SQ {
        let t = 0.0_f64.clamp(t_lo, t_hi);
        return ((-c / a).clamp(0.0, 1.0), t);
    }
    let b = d1.dot(d2);
    let denom = a * e - b * b;
    let mut s = if denom > 1e-14 * a * e { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
    let mut t = (b * s + f) / e;
    if t < t_lo {
        t = t_lo;
        s = ((b * t - c) / a).clamp(0.0, 1.0);
    } else if t > t_hi {
        t = t_hi;
        s = ((b * t - c) / a).clamp(0.0, 1.0);
    }
    (s, t)
}

pub fn point_segment_distance(p: &Point3<f64>, a: &Point3<f64>, b: &Point3<f64>) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_squared();
    let t = if len_sq <= DEGENERATE_SQ { 0.0 } else { ((p - a).dot(&ab) / len_sq).clamp(0.0, 1.0) };
    (p - (a + ab * t)).norm()
}

/// Distance between segments `a1`–`a2` and `b1`–`b2`, with closest points.
pub fn segment_segment_closest(
    a1: &Point3<f64>,
    a2: &Point3<f64>,
    b1: &Point3<f64>,
    b2: &Point3<f64>,
) -> (f64, Point3<f64>, Point3<f64>) {
    let (da, db) = (a2 - a1, b2 - b1);
    let (s, t) = closest_params(a1, &da, b1, &db, 0.0, 1.0);
    let pa = a1 + da * s;
    let pb = b1 + db * t;
    ((pa - pb).norm(), pa, pb)
}

/// Surface distance between two capsules, clamped to zero on overlap.
///
/// Arguments are put in a canonical order first, so the result is
/// bit-identical under swapping.
pub fn capsule_capsule_distance(a: &Capsule, b: &Capsule) -> f64 {
    let (first, second) = if a.order_key().iter().zip(b.order_key()).map(|(x, y)| x.total_cmp(&y)).find(|o| o.is_ne())
        == Some(std::cmp::Ordering::Greater)
    {
        (b, a)
    } else {
        (a, b)
    };
    let (axis, _, _) = segment_segment_closest(&first.p1, &first.p2, &second.p1, &second.p2);
    (axis - first.radius - second.radius).max(0.0)
}

/// Surface distance from a capsule to a polytope, zero when they meet.
pub fn capsule_polytope_distance(c: &Capsule, h: &Polytope) -> f64 {
    (h.segment_distance(&c.p1, &c.p2) - c.radius).max(0.0)
}

pub fn signed_distance_point(p: &Point3<f64>, h: &Polytope) -> f64 {
    h.signed_distance(p)
}

pub fn capsules_intersect(a: &Capsule, b: &Capsule) -> bool {
    capsule_capsule_distance(a, b) <= GEOM_EPS
}

pub fn capsule_intersects_polytope(c: &Capsule, h: &Polytope) -> bool {
    capsule_polytope_distance(c, h) <= GEOM_EPS
}

/// Indices of the halfspaces some capsule point lies strictly outside of.
pub fn active_halfspaces(c: &Capsule, h: &Polytope) -> Vec<usize> {
    h.normals
        .iter()
        .zip(&h.offsets)
        .enumerate()
        .filter(|(_, (n, d))| c.support(n) > **d)
        .map(|(k, _)| k)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(x: f64, y: f64, z: f64) -> Point3<f64> {
        Point3::new(x, y, z)
    }

    fn unit_cube() -> Polytope {
        Polytope::aabb([0.0; 3], [1.0; 3]).unwrap()
    }

    #[test]
    fn parallel_capsules_gap() {
        let a = Capsule::new(p(0.0, 0.0, 0.0), p(1.0, 0.0, 0.0), 0.1);
        let b = Capsule::new(p(0.0, 0.0, 1.0), p(1.0, 0.0, 1.0), 0.2);
        assert_relative_eq!(capsule_capsule_distance(&a, &b), 0.7, epsilon = 1e-15);
    }

    #[test]
    fn identical_balls_and_crossing_segments_touch() {
        let ball = Capsule::ball(p(0.0, 0.0, 0.0), 0.5);
        assert_eq!(capsule_capsule_distance(&ball, &ball), 0.0);
        let a = Capsule::new(p(0.0, 0.0, 0.0), p(2.0, 0.0, 0.0), 0.1);
        let b = Capsule::new(p(1.0, -1.0, 0.0), p(1.0, 1.0, 0.0), 0.1);
        assert_eq!(capsule_capsule_distance(&a, &b), 0.0);
    }

    #[test]
    fn capsule_above_cube() {
        let c = Capsule::new(p(0.0, 0.0, 2.0), p(1.0, 0.0, 2.0), 0.5);
        assert_relative_eq!(capsule_polytope_distance(&c, &unit_cube()), 0.5, epsilon = 1e-12);
        let inside = Capsule::new(p(0.4, 0.5, 0.5), p(0.6, 0.5, 0.5), 0.1);
        assert_eq!(capsule_polytope_distance(&inside, &unit_cube()), 0.0);
    }

    #[test]
    fn signed_distance_examples() {
        let cube = unit_cube();
        assert_relative_eq!(cube.signed_distance(&p(0.5, 0.5, 0.5)), -0.5, epsilon = 1e-15);
        assert_relative_eq!(cube.signed_distance(&p(2.0, 2.0, 2.0)), 3f64.sqrt(), epsilon = 1e-12);
        let below = Polytope::halfspace(Vector3::z(), 1.0).unwrap();
        assert_relative_eq!(below.signed_distance(&p(0.0, 0.0, 2.0)), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn intersection_predicate_threshold() {
        let a = Capsule::ball(p(0.0, 0.0, 0.0), 0.5);
        let touching = Capsule::ball(p(1.0, 0.0, 0.0), 0.5);
        assert!(capsules_intersect(&a, &touching));
        let apart = Capsule::ball(p(1.0 + 2.0 * GEOM_EPS, 0.0, 0.0), 0.5);
        assert!(!capsules_intersect(&a, &apart));
    }

    #[test]
    fn active_sets_for_simple_placements() {
        let cube = unit_cube();
        let inside = Capsule::new(p(0.4, 0.5, 0.5), p(0.6, 0.5, 0.5), 0.1);
        assert!(active_halfspaces(&inside, &cube).is_empty());
        let above = Capsule::new(p(0.3, 0.5, 1.5), p(0.7, 0.5, 1.5), 0.2);
        let active = active_halfspaces(&above, &cube);
        assert_eq!(active.len(), 1);
        assert_eq!(cube.normals()[active[0]], Vector3::z());
    }

    #[test]
    fn rejects_bad_normals() {
        let err = Polytope::new(vec![Vector3::new(0.0, 0.0, 2.0)], vec![1.0]).unwrap_err();
        assert!(matches!(err, GeometryError::NonUnitNormal { index: 0, .. }));
        assert!(Polytope::new(vec![Vector3::z()], vec![]).is_err());
    }

    #[test]
    fn cube_has_eight_vertices_and_twelve_edges() {
        let cube = unit_cube();
        assert_eq!(cube.vertices().len(), 8);
        assert_eq!(cube.edges.len(), 12);
    }

    #[test]
    fn enclosing_capsule_contains_both() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let mut rp = || p(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let a = Capsule::new(rp(), rp(), 0.1);
            let b = Capsule::new(rp(), rp(), 0.2);
            let hull = Capsule::enclosing(&a, &b);
            assert!(hull.contains_capsule(&a) && hull.contains_capsule(&b));
        }
    }

    #[test]
    fn oriented_box_contains_capsule_surface() {
        let c = Capsule::new(p(0.1, -0.2, 0.3), p(0.5, 0.4, -0.1), 0.07);
        let poly = OrientedBox::around_capsule(&c).to_polytope();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let dir = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)).normalize();
            let q = c.point_at(rng.gen_range(0.0..1.0)) + dir * c.radius;
            assert!(poly.violation(&q) <= 1e-12);
        }
    }

    /// Dykstra alternating projections onto the halfspaces.
    fn dykstra_point_distance(poly: &Polytope, q: &Point3<f64>) -> f64 {
        let h = poly.len();
        let mut x = q.coords;
        let mut incr = vec![Vector3::zeros(); h];
        for _ in 0..4000 {
            for k in 0..h {
                let y = x + incr[k];
                let n = poly.normals()[k];
                let gap = n.dot(&y) - poly.offsets()[k];
                let proj = if gap > 0.0 { y - n * gap } else { y };
                incr[k] = y - proj;
                x = proj;
            }
        }
        (q.coords - x).norm()
    }

    #[test]
    fn point_distance_matches_alternating_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let mut normals = Vec::new();
            let mut offsets = Vec::new();
            for k in 0..3 {
                let mut e = Vector3::zeros();
                e[k] = 1.0;
                normals.push(e);
                offsets.push(rng.gen_range(0.3..1.0));
                normals.push(-e);
                offsets.push(rng.gen_range(0.3..1.0));
            }
            for _ in 0..4 {
                let n = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)).normalize();
                normals.push(n);
                offsets.push(rng.gen_range(0.4..1.0));
            }
            let poly = Polytope::new(normals, offsets).unwrap();
            let q = p(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let exact = poly.point_distance(&q);
            let oracle = dykstra_point_distance(&poly, &q);
            assert!((exact - oracle).abs() < 1e-7, "exact {exact} oracle {oracle}");
        }
    }

    fn arb_point() -> impl Strategy<Value = Point3<f64>> {
        (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y, z)| p(x, y, z))
    }

    fn arb_capsule() -> impl Strategy<Value = Capsule> {
        (arb_point(), arb_point(), 0.0..1.0f64).prop_map(|(a, b, r)| Capsule::new(a, b, r))
    }

    proptest! {
        #[test]
        fn distance_is_exactly_symmetric(a in arb_capsule(), b in arb_capsule()) {
            prop_assert_eq!(capsule_capsule_distance(&a, &b).to_bits(), capsule_capsule_distance(&b, &a).to_bits());
        }

        #[test]
        fn distance_is_translation_invariant(a in arb_capsule(), b in arb_capsule(), t in arb_point()) {
            let shifted = capsule_capsule_distance(&a.translated(&t.coords), &b.translated(&t.coords));
            prop_assert!((shifted - capsule_capsule_distance(&a, &b)).abs() <= 1e-12);
        }

        #[test]
        fn signed_distance_sign_matches_membership(q in arb_point()) {
            let cube = Polytope::aabb([-1.0, -0.5, 0.0], [1.0, 0.5, 2.0]).unwrap();
            let sd = cube.signed_distance(&q);
            prop_assert_eq!(sd <= 0.0, cube.contains(&q));
        }

        #[test]
        fn intersection_predicate_follows_distance(c in arb_capsule()) {
            let cube = unit_cube();
            prop_assert_eq!(capsule_intersects_polytope(&c, &cube), capsule_polytope_distance(&c, &cube) <= GEOM_EPS);
        }

        #[test]
        fn active_set_certificates(c in arb_capsule()) {
            let cube = unit_cube();
            let active = active_halfspaces(&c, &cube);
            for (k, (n, d)) in cube.normals().iter().zip(cube.offsets()).enumerate() {
                // Certificate: the support point witnesses the violation exactly.
                let tip = if n.dot(&c.p1.coords) >= n.dot(&c.p2.coords) { c.p1 } else { c.p2 } + n * c.radius;
                prop_assert_eq!(active.contains(&k), n.dot(&tip.coords) > *d);
            }
        }
    }
}
