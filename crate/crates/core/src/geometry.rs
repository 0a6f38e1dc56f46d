//! Planar primitives: points, directed edges, counterclockwise polygons,
//! angle arithmetic modulo 2π and ray casting.
//!
//! All angles are radians measured from the +x reference direction and are
//! normalized to `[0, 2π)` with [`modone`].

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when deciding whether a point lies on the boundary.
const BOUNDARY_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector pointing in `direction`.
    pub fn unit(direction: f64) -> Self {
        let (s, c) = direction.sin_cos();
        Self { x: c, y: s }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn scale(self, k: f64) -> Self {
        Self::new(self.x * k, self.y * k)
    }

    /// Rotate counterclockwise about the origin.
    pub fn rotate(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Self::new(v[0], v[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        self.scale(k)
    }
}

/// Normalize an angle to `[0, 2π)`.
pub fn modone(t: f64) -> f64 {
    let r = t.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Membership in the half-open interval `[t1, t2)` taken modulo 2π.
///
/// Requires `t1 < t2 <= t1 + 2π`; the interval may wrap past 2π.
pub fn mod_interval_contains(t: f64, t1: f64, t2: f64) -> bool {
    modone(t - t1) < t2 - t1
}

/// Inner angle formed by an edge of direction `xi_j` followed by an edge of
/// direction `xi_j1`, for a counterclockwise boundary.
pub fn inner_angle(xi_j: f64, xi_j1: f64) -> Result<f64> {
    let g = modone(PI - xi_j1 + xi_j);
    if g < BOUNDARY_EPS || (g - PI).abs() < BOUNDARY_EPS || TAU - g < BOUNDARY_EPS {
        return Err(Error::DegenerateVertex(g));
    }
    Ok(g)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectedEdge {
    pub tail: Point,
    pub head: Point,
    /// Euclidean length.
    pub lambda: f64,
    /// Direction of `head - tail` in `[0, 2π)`.
    pub xi: f64,
}

impl DirectedEdge {
    pub fn new(tail: Point, head: Point) -> Self {
        let d = head - tail;
        Self {
            tail,
            head,
            lambda: d.norm(),
            xi: modone(d.y.atan2(d.x)),
        }
    }

    pub fn vector(&self) -> Point {
        self.head - self.tail
    }

    pub fn point_at(&self, a: f64) -> Point {
        self.tail + self.vector() * a
    }

    /// Intersection of the ray `origin + s * dir` with this edge: returns
    /// `(s, a)` where `a` is the edge parameter. `None` if parallel.
    pub fn ray_parameters(&self, origin: Point, dir: Point) -> Option<(f64, f64)> {
        let e = self.vector();
        let denom = dir.cross(e);
        if denom.abs() < 1e-15 * self.lambda {
            return None;
        }
        let w = self.tail - origin;
        Some((w.cross(e) / denom, w.cross(dir) / denom))
    }
}

/// A simple counterclockwise polygon. Construct with
/// [`PolygonTarget::from_vertices`], which validates the invariants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolygonSpec", into = "PolygonSpec")]
pub struct PolygonTarget {
    vertices: Vec<Point>,
    edges: Vec<DirectedEdge>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct PolygonSpec {
    vertices: Vec<Point>,
}

impl TryFrom<PolygonSpec> for PolygonTarget {
    type Error = Error;
    fn try_from(s: PolygonSpec) -> Result<Self> {
        PolygonTarget::from_vertices(&s.vertices)
    }
}

impl From<PolygonTarget> for PolygonSpec {
    fn from(p: PolygonTarget) -> Self {
        PolygonSpec { vertices: p.vertices }
    }
}

impl PolygonTarget {
    pub fn from_vertices(vertices: &[Point]) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::TooFewVertices(n));
        }
        let area = signed_area(vertices);
        if area <= 0.0 {
            return Err(Error::NotCounterClockwise(area));
        }
        let edges: Vec<DirectedEdge> = (0..n)
            .map(|j| DirectedEdge::new(vertices[j], vertices[(j + 1) % n]))
            .collect();
        for j in 0..n {
            inner_angle(edges[j].xi, edges[(j + 1) % n].xi)?;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if !adjacent && segments_intersect(&edges[i], &edges[j]) {
                    return Err(Error::SelfIntersecting(i, j));
                }
            }
        }
        Ok(Self {
            vertices: vertices.to_vec(),
            edges,
        })
    }

    /// Polygon built by walking `(length, inner angle)` pairs from the origin
    /// with the first edge along +x. The angle at position `j` sits between
    /// edge `j` and edge `j + 1`. The walk must close.
    pub fn from_turtle(steps: &[(f64, f64)]) -> Result<Self> {
        let mut p = Point::default();
        let mut xi = 0.0_f64;
        let mut pts = Vec::with_capacity(steps.len());
        for &(len, gamma) in steps {
            pts.push(p);
            p = p + Point::unit(xi) * len;
            xi += PI - gamma;
        }
        if p.norm() > 1e-6 * steps.iter().map(|s| s.0).sum::<f64>() {
            return Err(Error::InvalidScenario(format!(
                "turtle walk does not close (gap {:.3e})",
                p.norm()
            )));
        }
        Self::from_vertices(&pts)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn edges(&self) -> &[DirectedEdge] {
        &self.edges
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Inner angle at the head of edge `j`.
    pub fn inner_angle_at(&self, j: usize) -> f64 {
        let n = self.edges.len();
        modone(PI - self.edges[(j + 1) % n].xi + self.edges[j].xi)
    }

    pub fn inner_angles(&self) -> Vec<f64> {
        (0..self.n_edges()).map(|j| self.inner_angle_at(j)).collect()
    }

    pub fn perimeter(&self) -> f64 {
        self.edges.iter().map(|e| e.lambda).sum()
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn centroid(&self) -> Point {
        let a = self.area();
        let n = self.vertices.len();
        let (mut cx, mut cy) = (0.0, 0.0);
        for j in 0..n {
            let p = self.vertices[j];
            let q = self.vertices[(j + 1) % n];
            let c = p.cross(q);
            cx += (p.x + q.x) * c;
            cy += (p.y + q.y) * c;
        }
        Point::new(cx / (6.0 * a), cy / (6.0 * a))
    }

    /// Largest distance from the origin to a vertex.
    pub fn max_radius(&self) -> f64 {
        self.vertices.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    pub fn transformed(&self, scale: f64, rotation: f64, offset: Point) -> Self {
        let pts: Vec<Point> = self
            .vertices
            .iter()
            .map(|p| p.scale(scale).rotate(rotation) + offset)
            .collect();
        Self::from_vertices(&pts).expect("similarity transform preserves validity")
    }

    /// Translate so the area centroid sits at the origin.
    pub fn centered(&self) -> Self {
        let c = self.centroid();
        self.transformed(1.0, 0.0, Point::new(-c.x, -c.y))
    }

    /// Closed-set membership: points on the boundary count as inside.
    pub fn contains(&self, p: Point) -> bool {
        let scale = 1.0 + p.norm();
        for e in &self.edges {
            if point_on_segment(p, e, BOUNDARY_EPS * scale) {
                return true;
            }
        }
        let mut inside = false;
        for e in &self.edges {
            let (a, b) = (e.tail, e.head);
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if x > p.x {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    (0..n).map(|j| v[j].cross(v[(j + 1) % n])).sum::<f64>() * 0.5
}

fn point_on_segment(p: Point, e: &DirectedEdge, eps: f64) -> bool {
    let d = e.vector();
    let w = p - e.tail;
    if (d.cross(w)).abs() > eps * e.lambda {
        return false;
    }
    let t = w.dot(d) / (e.lambda * e.lambda);
    (-eps..=1.0 + eps).contains(&t)
}

/// Closed-segment intersection test (touching counts).
pub fn segments_intersect(e: &DirectedEdge, f: &DirectedEdge) -> bool {
    let o = |a: Point, b: Point, c: Point| (b - a).cross(c - a);
    let (p1, p2, p3, p4) = (e.tail, e.head, f.tail, f.head);
    let d1 = o(p3, p4, p1);
    let d2 = o(p3, p4, p2);
    let d3 = o(p1, p2, p3);
    let d4 = o(p1, p2, p4);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let eps = 1e-12;
    (d1.abs() < eps && point_on_segment(p1, f, eps))
        || (d2.abs() < eps && point_on_segment(p2, f, eps))
        || (d3.abs() < eps && point_on_segment(p3, e, eps))
        || (d4.abs() < eps && point_on_segment(p4, e, eps))
}

/// Result of casting a ray against a polygon.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayHit {
    pub distance: f64,
    /// Index of the edge hit; `None` when the origin lies in the polygon.
    pub edge: Option<usize>,
}

/// Smallest `s >= 0` with `origin + s * (cos dir, sin dir)` in the polygon,
/// together with the edge that realizes it.
pub fn ray_cast_hit(origin: Point, direction: f64, polygon: &PolygonTarget) -> Option<RayHit> {
    if polygon.contains(origin) {
        return Some(RayHit {
            distance: 0.0,
            edge: None,
        });
    }
    let dir = Point::unit(direction);
    let mut best: Option<RayHit> = None;
    for (j, e) in polygon.edges().iter().enumerate() {
        let Some((s, a)) = e.ray_parameters(origin, dir) else {
            continue;
        };
        if s < 0.0 || !(-1e-12..=1.0 + 1e-12).contains(&a) {
            continue;
        }
        if best.is_none_or(|b| s < b.distance) {
            best = Some(RayHit {
                distance: s,
                edge: Some(j),
            });
        }
    }
    best
}

/// Distance from `origin` to the polygon along `direction`; `Some(0.0)` when
/// the origin is inside or on the boundary, `None` when the ray misses.
/// The caller applies any range cutoff.
pub fn ray_cast(origin: Point, direction: f64, polygon: &PolygonTarget) -> Option<f64> {
    ray_cast_hit(origin, direction, polygon).map(|h| h.distance)
}

/// Whether a sensor at `sensor` with beam `beam_direction` sees a point of
/// `edge` at a distance in `(0, r_max]` with nothing of the polygon in
/// between.
///
/// Built from the parallelogram spanned by the edge and a side of length
/// `r_max` in the beam direction, plus an explicit segment-occlusion test.
/// Independent of [`ray_cast`], which makes it usable as a cross-check.
pub fn detection_region_contains(
    sensor: Point,
    beam_direction: f64,
    r_max: f64,
    edge: &DirectedEdge,
    polygon: &PolygonTarget,
) -> bool {
    // beam must strike the outer (right-hand) side of the edge
    if (beam_direction - edge.xi).sin() <= 0.0 {
        return false;
    }
    let b = Point::unit(beam_direction);
    let e = edge.vector();
    // sensor = tail + a e - s b
    let w = sensor - edge.tail;
    let denom = b.cross(e);
    let a = b.cross(w) / denom;
    let s = -w.cross(e) / denom;
    if !(0.0..=1.0).contains(&a) || s <= 0.0 || s > r_max {
        return false;
    }
    if polygon.contains(sensor) {
        return false;
    }
    // an occluder must cross the sight line strictly before the hit point
    polygon
        .edges()
        .iter()
        .filter(|f| *f != edge)
        .all(|f| match f.ray_parameters(sensor, b) {
            Some((t, u)) => !((0.0..=1.0).contains(&u) && (0.0..s * (1.0 - 1e-12)).contains(&t)),
            None => true,
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> PolygonTarget {
        PolygonTarget::from_vertices(&[
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn modone_examples() {
        assert_eq!(modone(0.0), 0.0);
        assert!((modone(-PI / 2.0) - 1.5 * PI).abs() < 1e-15);
        assert!((modone(4.5 * PI) - 0.5 * PI).abs() < 1e-12);
        assert_eq!(modone(-1e-300), 0.0);
    }

    #[test]
    fn mod_interval_examples() {
        assert!(mod_interval_contains(0.1, 0.0, PI));
        assert!(mod_interval_contains(0.1, 1.5 * PI, 2.5 * PI));
        assert!(!mod_interval_contains(PI, 0.0, PI));
    }

    #[test]
    fn inner_angle_examples() {
        assert!((inner_angle(0.0, PI / 2.0).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((inner_angle(0.0, PI / 4.0).unwrap() - 0.75 * PI).abs() < 1e-15);
        assert!((inner_angle(0.0, 1.5 * PI).unwrap() - 1.5 * PI).abs() < 1e-15);
        assert!(matches!(inner_angle(0.3, 0.3), Err(Error::DegenerateVertex(_))));
    }

    #[test]
    fn ray_cast_examples() {
        let sq = unit_square();
        assert_eq!(ray_cast(Point::new(-1.0, 0.5), 0.0, &sq), Some(1.0));
        for k in 0..8 {
            assert_eq!(ray_cast(Point::new(0.5, 0.5), k as f64 * 0.8, &sq), Some(0.0));
        }
        assert_eq!(ray_cast(Point::new(2.0, 2.0), 0.0, &sq), None);
        // boundary counts as inside
        assert_eq!(ray_cast(Point::new(1.0, 0.5), 0.0, &sq), Some(0.0));
    }

    #[test]
    fn rejects_bad_polygons() {
        let cw = [Point::new(0.0, 0.0), Point::new(0.0, 1.0), Point::new(1.0, 1.0)];
        assert!(matches!(
            PolygonTarget::from_vertices(&cw),
            Err(Error::NotCounterClockwise(_))
        ));
        let straight = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(1.0, 1.0),
        ];
        assert!(matches!(
            PolygonTarget::from_vertices(&straight),
            Err(Error::DegenerateVertex(_))
        ));
        let bowtie = [
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(0.0, 2.0),
            Point::new(2.0, 2.0),
            Point::new(1.0, 3.0),
        ];
        assert!(PolygonTarget::from_vertices(&bowtie).is_err());
    }

    #[test]
    fn exterior_angles_close() {
        let l_shape = PolygonTarget::from_vertices(&[
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 2.0),
            Point::new(0.0, 2.0),
        ])
        .unwrap();
        let turn: f64 = l_shape.inner_angles().iter().map(|g| PI - g).sum();
        assert!((turn - TAU).abs() < 1e-9);
        assert!((l_shape.inner_angle_at(2) - 1.5 * PI).abs() < 1e-12);
    }

    #[test]
    fn detection_region_examples() {
        let tri =
            PolygonTarget::from_vertices(&[Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.5, 1.0)]).unwrap();
        let base = tri.edges()[0];
        let up = PI / 2.0;
        assert!(detection_region_contains(Point::new(0.5, -0.5), up, 1.0, &base, &tri));
        assert_eq!(ray_cast(Point::new(0.5, -0.5), up, &tri), Some(0.5));
        assert!(!detection_region_contains(Point::new(0.5, -2.0), up, 1.0, &base, &tri));
        assert!(!detection_region_contains(Point::new(2.0, -0.5), up, 1.0, &base, &tri));
    }

    #[test]
    fn turtle_builds_square() {
        let sq = PolygonTarget::from_turtle(&[(1.0, PI / 2.0); 4]).unwrap();
        assert!((sq.area() - 1.0).abs() < 1e-12);
        assert!(PolygonTarget::from_turtle(&[(1.0, PI / 2.0); 3]).is_err());
    }
}
