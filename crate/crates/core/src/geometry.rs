//! Planar geometry primitives: vectors, rigid poses, and polygons.
//!
//! Footprints and shadow regions are convex in practice, but the polygon
//! routines that do not need convexity (area, centroid, containment) work on
//! any simple polygon.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(angle: f64) -> Self {
        Self::new(angle.cos(), angle.sin())
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        if n == 0.0 {
            self
        } else {
            self * (1.0 / n)
        }
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Counter-clockwise perpendicular.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Smallest signed difference `a - b` between two angles.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    wrap_angle(a - b)
}

/// A rigid transform in SE(2).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2 {
    pub const IDENTITY: Pose2 = Pose2 {
        x: 0.0,
        y: 0.0,
        theta: 0.0,
    };

    pub const fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta }
    }

    pub fn from_parts(position: Vec2, theta: f64) -> Self {
        Self::new(position.x, position.y, theta)
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn heading(&self) -> Vec2 {
        Vec2::from_angle(self.theta)
    }

    /// `self * other`: express `other` (given in this frame) in the parent frame.
    pub fn compose(&self, other: &Pose2) -> Pose2 {
        let p = self.transform_point(other.position());
        Pose2::new(p.x, p.y, wrap_angle(self.theta + other.theta))
    }

    pub fn inverse(&self) -> Pose2 {
        let p = (-self.position()).rotated(-self.theta);
        Pose2::new(p.x, p.y, wrap_angle(-self.theta))
    }

    pub fn transform_point(&self, p: Vec2) -> Vec2 {
        self.position() + p.rotated(self.theta)
    }

    pub fn distance(&self, other: &Pose2) -> f64 {
        self.position().distance(other.position())
    }
}

/// An axis-aligned rectangle, used for regions and workspace bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec2,
    pub max: Vec2,
}

impl Aabb {
    pub fn new(min: Vec2, max: Vec2) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn overlaps(&self, other: &Aabb) -> bool {
        self.min.x <= other.max.x
            && other.min.x <= self.max.x
            && self.min.y <= other.max.y
            && other.min.y <= self.max.y
    }

    pub fn inflated(&self, by: f64) -> Aabb {
        Aabb::new(
            self.min - Vec2::new(by, by),
            self.max + Vec2::new(by, by),
        )
    }

    pub fn center(&self) -> Vec2 {
        (self.min + self.max) * 0.5
    }

    pub fn to_polygon(&self) -> Polygon {
        Polygon::new(vec![
            self.min,
            Vec2::new(self.max.x, self.min.y),
            self.max,
            Vec2::new(self.min.x, self.max.y),
        ])
    }

    pub fn of_points<'a>(points: impl IntoIterator<Item = &'a Vec2>) -> Option<Aabb> {
        let mut iter = points.into_iter();
        let first = *iter.next()?;
        let mut b = Aabb::new(first, first);
        for p in iter {
            b.min.x = b.min.x.min(p.x);
            b.min.y = b.min.y.min(p.y);
            b.max.x = b.max.x.max(p.x);
            b.max.y = b.max.y.max(p.y);
        }
        Some(b)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("polygon area {area:e} is below the degeneracy threshold")]
    DegeneratePolygon { area: f64 },
    #[error("shrink ratio {0} is outside [0, 1]")]
    RatioOutOfRange(f64),
}

/// Area below which a polygon is treated as degenerate (m^2).
pub const DEGENERATE_AREA: f64 = 1e-12;

/// A simple polygon with counter-clockwise vertex order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    pub vertices: Vec<Vec2>,
}

impl Polygon {
    /// Builds a polygon, reversing the vertex order if it was given clockwise.
    pub fn new(mut vertices: Vec<Vec2>) -> Self {
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        Self { vertices }
    }

    /// Oriented rectangle footprint.
    pub fn rectangle(pose: &Pose2, half_extents: Vec2) -> Self {
        let (hx, hy) = (half_extents.x, half_extents.y);
        let corners = [
            Vec2::new(-hx, -hy),
            Vec2::new(hx, -hy),
            Vec2::new(hx, hy),
            Vec2::new(-hx, hy),
        ];
        Self {
            vertices: corners.iter().map(|c| pose.transform_point(*c)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices).abs()
    }

    /// Area-weighted centroid. Falls back to the vertex mean for degenerate input.
    pub fn centroid(&self) -> Vec2 {
        let a = signed_area(&self.vertices);
        if a.abs() < DEGENERATE_AREA {
            let n = self.vertices.len().max(1) as f64;
            let sum = self.vertices.iter().fold(Vec2::ZERO, |acc, v| acc + *v);
            return sum * (1.0 / n);
        }
        let mut c = Vec2::ZERO;
        for (p, q) in self.edges() {
            let w = p.cross(q);
            c = c + (p + q) * w;
        }
        c * (1.0 / (6.0 * a))
    }

    pub fn bounds(&self) -> Aabb {
        Aabb::of_points(&self.vertices).unwrap_or(Aabb::new(Vec2::ZERO, Vec2::ZERO))
    }

    /// Scales every vertex about the area-weighted centroid.
    pub fn scaled_about_centroid(&self, ratio: f64) -> Result<Polygon, GeometryError> {
        if !(0.0..=1.0).contains(&ratio) {
            return Err(GeometryError::RatioOutOfRange(ratio));
        }
        let area = self.area();
        if area < DEGENERATE_AREA {
            return Err(GeometryError::DegeneratePolygon { area });
        }
        let c = self.centroid();
        Ok(Polygon {
            vertices: self
                .vertices
                .iter()
                .map(|v| c + (*v - c) * ratio)
                .collect(),
        })
    }

    /// Crossing-number containment; boundary points count as inside.
    pub fn contains(&self, p: Vec2) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return false;
        }
        let mut inside = false;
        for (a, b) in self.edges() {
            if point_segment_distance(p, a, b) < 1e-12 {
                return true;
            }
            if (a.y > p.y) != (b.y > p.y) {
                let t = (p.y - a.y) / (b.y - a.y);
                if p.x < a.x + t * (b.x - a.x) {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Separating-axis test for convex polygons; touching counts as intersecting.
    pub fn intersects(&self, other: &Polygon) -> bool {
        if self.vertices.len() < 3 || other.vertices.len() < 3 {
            return false;
        }
        if !self.bounds().overlaps(&other.bounds()) {
            return false;
        }
        !(has_separating_axis(self, other) || has_separating_axis(other, self))
    }

    /// Minimum distance between a segment and this polygon (zero on overlap).
    pub fn distance_to_segment(&self, a: Vec2, b: Vec2) -> f64 {
        if self.contains(a) || self.contains(b) {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for (p, q) in self.edges() {
            best = best.min(segment_segment_distance(a, b, p, q));
            if best == 0.0 {
                break;
            }
        }
        best
    }

    /// Minimum distance between two convex polygons (zero on overlap).
    pub fn distance_to_polygon(&self, other: &Polygon) -> f64 {
        if self.intersects(other) {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for (a, b) in self.edges() {
            best = best.min(other.distance_to_segment(a, b));
        }
        best
    }

    /// Sutherland-Hodgman clip of this polygon against a convex clip polygon.
    pub fn clip_convex(&self, clip: &Polygon) -> Polygon {
        let mut output = self.vertices.clone();
        for (ca, cb) in clip.edges() {
            if output.is_empty() {
                break;
            }
            let input = std::mem::take(&mut output);
            let inside = |p: Vec2| (cb - ca).cross(p - ca) >= 0.0;
            let n = input.len();
            for i in 0..n {
                let cur = input[i];
                let prev = input[(i + n - 1) % n];
                match (inside(prev), inside(cur)) {
                    (true, true) => output.push(cur),
                    (true, false) => output.push(line_intersection(prev, cur, ca, cb)),
                    (false, true) => {
                        output.push(line_intersection(prev, cur, ca, cb));
                        output.push(cur);
                    }
                    (false, false) => {}
                }
            }
        }
        dedup_vertices(&mut output);
        Polygon { vertices: output }
    }

    /// True iff no two non-adjacent edges intersect.
    pub fn is_simple(&self) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return false;
        }
        let edges: Vec<_> = self.edges().collect();
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                let (a, b) = edges[i];
                let (c, d) = edges[j];
                if segments_intersect(a, b, c, d) {
                    return false;
                }
            }
        }
        true
    }
}

fn signed_area(vertices: &[Vec2]) -> f64 {
    let n = vertices.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        s += vertices[i].cross(vertices[(i + 1) % n]);
    }
    0.5 * s
}

fn has_separating_axis(a: &Polygon, b: &Polygon) -> bool {
    for (p, q) in a.edges() {
        let axis = (q - p).perp();
        if axis.norm_squared() == 0.0 {
            continue;
        }
        let (amin, amax) = project(&a.vertices, axis);
        let (bmin, bmax) = project(&b.vertices, axis);
        if amax < bmin || bmax < amin {
            return true;
        }
    }
    false
}

fn project(vertices: &[Vec2], axis: Vec2) -> (f64, f64) {
    vertices
        .iter()
        .map(|v| v.dot(axis))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| {
            (lo.min(d), hi.max(d))
        })
}

fn line_intersection(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> Vec2 {
    let r = p2 - p1;
    let s = q2 - q1;
    let denom = r.cross(s);
    if denom.abs() < 1e-18 {
        return p2;
    }
    let t = (q1 - p1).cross(s) / denom;
    p1 + r * t
}

fn dedup_vertices(vertices: &mut Vec<Vec2>) {
    vertices.dedup_by(|a, b| a.distance(*b) < 1e-12);
    while vertices.len() > 1 && vertices[0].distance(*vertices.last().unwrap()) < 1e-12 {
        vertices.pop();
    }
}

/// Convex hull by monotone chain, counter-clockwise, collinear points dropped.
pub fn convex_hull(points: &[Vec2]) -> Polygon {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| a.distance(*b) < 1e-12);
    if pts.len() < 3 {
        return Polygon { vertices: pts };
    }
    let mut hull: Vec<Vec2> = Vec::with_capacity(pts.len() * 2);
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Vec2>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 {
                let a = hull[hull.len() - 2];
                let b = hull[hull.len() - 1];
                if (b - a).cross(p - a) <= 1e-15 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        hull.pop();
    }
    Polygon { vertices: hull }
}

pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

pub fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let eps = 1e-15;
    (d1.abs() <= eps && point_segment_distance(a, c, d) <= eps)
        || (d2.abs() <= eps && point_segment_distance(b, c, d) <= eps)
        || (d3.abs() <= eps && point_segment_distance(c, a, b) <= eps)
        || (d4.abs() <= eps && point_segment_distance(d, a, b) <= eps)
}

pub fn segment_segment_distance(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

/// A thick segment, used for arm links.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Capsule {
    pub a: Vec2,
    pub b: Vec2,
    pub radius: f64,
}

impl Capsule {
    pub fn bounds(&self) -> Aabb {
        Aabb::of_points(&[self.a, self.b])
            .unwrap()
            .inflated(self.radius)
    }

    /// Clearance to a polygon; negative or zero means contact.
    pub fn clearance(&self, poly: &Polygon) -> f64 {
        poly.distance_to_segment(self.a, self.b) - self.radius
    }
}
