//! 2D vector and rotation algebra plus the convex polygon and circle shapes
//! used by every other module.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest vertex count a polygon may carry.
pub const MAX_POLYGON_VERTICES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f32,
    pub y: f32,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };
    pub const X: Vec2 = Vec2 { x: 1.0, y: 0.0 };
    pub const Y: Vec2 = Vec2 { x: 0.0, y: 1.0 };

    #[inline]
    pub const fn new(x: f32, y: f32) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dot(self, other: Vec2) -> f32 {
        self.x * other.x + self.y * other.y
    }

    #[inline]
    pub fn length_squared(self) -> f32 {
        self.dot(self)
    }

    #[inline]
    pub fn length(self) -> f32 {
        self.length_squared().sqrt()
    }

    /// Unit vector in the same direction, or `None` for (near) zero vectors.
    #[inline]
    pub fn try_normalize(self) -> Option<Vec2> {
        let len = self.length();
        if len > f32::EPSILON {
            Some(self * (1.0 / len))
        } else {
            None
        }
    }

    /// Counter-clockwise perpendicular, `(-y, x)`.
    #[inline]
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    #[inline]
    pub fn rotate(self, angle: f32) -> Vec2 {
        let (s, c) = angle.sin_cos();
        self.rotate_sc(s, c)
    }

    #[inline]
    pub fn rotate_sc(self, sin: f32, cos: f32) -> Vec2 {
        Vec2::new(cos * self.x - sin * self.y, sin * self.x + cos * self.y)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f32> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, rhs: f32) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Mul<Vec2> for f32 {
    type Output = Vec2;
    #[inline]
    fn mul(self, rhs: Vec2) -> Vec2 {
        rhs * self
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl SubAssign for Vec2 {
    #[inline]
    fn sub_assign(&mut self, rhs: Vec2) {
        self.x -= rhs.x;
        self.y -= rhs.y;
    }
}

/// Scalar-vector cross product `s × v = (-s·v.y, s·v.x)`.
#[inline]
pub fn cross_sv(s: f32, v: Vec2) -> Vec2 {
    Vec2::new(-s * v.y, s * v.x)
}

/// Vector-vector cross product (the z component of the 3D cross product).
#[inline]
pub fn cross_vv(a: Vec2, b: Vec2) -> f32 {
    a.x * b.y - a.y * b.x
}

/// Maps a body-local point into world space.
#[inline]
pub fn transform_point(p_local: Vec2, body_position: Vec2, body_rotation: f32) -> Vec2 {
    body_position + p_local.rotate(body_rotation)
}

/// Inverse of [`transform_point`].
#[inline]
pub fn inverse_transform_point(p_world: Vec2, body_position: Vec2, body_rotation: f32) -> Vec2 {
    (p_world - body_position).rotate(-body_rotation)
}

/// Up to two points, the result of clipping a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClippedSegment {
    points: [Vec2; 2],
    len: usize,
}

impl ClippedSegment {
    pub fn as_slice(&self) -> &[Vec2] {
        &self.points[..self.len]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// Keeps the part of `seg` where `plane_normal · p - plane_offset <= 0`.
///
/// Endpoints lying exactly on the plane are retained. A segment that lies
/// entirely on the positive side yields an empty result.
pub fn clip_segment_to_halfplane(
    seg: [Vec2; 2],
    plane_normal: Vec2,
    plane_offset: f32,
) -> ClippedSegment {
    let d0 = plane_normal.dot(seg[0]) - plane_offset;
    let d1 = plane_normal.dot(seg[1]) - plane_offset;
    let mut out = ClippedSegment { points: [Vec2::ZERO; 2], len: 0 };
    let mut push = |p: Vec2| {
        out.points[out.len] = p;
        out.len += 1;
    };
    if d0 <= 0.0 {
        push(seg[0]);
    }
    if d1 <= 0.0 {
        push(seg[1]);
    }
    // Exactly one endpoint strictly outside: add the crossing point.
    if (d0 < 0.0 && d1 > 0.0) || (d0 > 0.0 && d1 < 0.0) {
        let t = d0 / (d0 - d1);
        push(seg[0] + (seg[1] - seg[0]) * t);
    }
    out
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("polygon needs 3 or 4 vertices, got {0}")]
    VertexCount(usize),
    #[error("polygon vertex is not finite")]
    NonFinite,
    #[error("polygon has (near) zero area")]
    Degenerate,
    #[error("polygon is not convex")]
    Concave,
    #[error("circle radius must be finite and positive, got {0}")]
    Radius(f32),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleShape {
    pub radius: f32,
}

impl CircleShape {
    pub fn new(radius: f32) -> Result<Self, GeometryError> {
        if radius.is_finite() && radius > 0.0 {
            Ok(Self { radius })
        } else {
            Err(GeometryError::Radius(radius))
        }
    }

    /// `(mass, rotational inertia)` about the centre for the given density.
    pub fn mass_properties(&self, density: f32) -> (f32, f32) {
        let mass = density * std::f32::consts::PI * self.radius * self.radius;
        (mass, 0.5 * mass * self.radius * self.radius)
    }
}

/// A convex polygon in body-local coordinates, stored counter-clockwise and
/// centred on its centroid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolygonShape {
    pub vertices: [Vec2; MAX_POLYGON_VERTICES],
    pub vertex_count: u8,
}

impl PolygonShape {
    /// Builds a polygon from arbitrary-winding convex input.
    ///
    /// Returns the shape, recentred on its area centroid, together with the
    /// centroid expressed in the input frame so callers can place the body.
    pub fn new(points: &[Vec2]) -> Result<(Self, Vec2), GeometryError> {
        let n = points.len();
        if !(3..=MAX_POLYGON_VERTICES).contains(&n) {
            return Err(GeometryError::VertexCount(n));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let mut verts = [Vec2::ZERO; MAX_POLYGON_VERTICES];
        verts[..n].copy_from_slice(points);
        let area = signed_area(&verts[..n]);
        if area.abs() < 1e-6 {
            return Err(GeometryError::Degenerate);
        }
        if area < 0.0 {
            verts[..n].reverse();
        }
        for i in 0..n {
            let e0 = verts[(i + 1) % n] - verts[i];
            let e1 = verts[(i + 2) % n] - verts[(i + 1) % n];
            if cross_vv(e0, e1) < 0.0 {
                return Err(GeometryError::Concave);
            }
        }
        let centroid = polygon_centroid(&verts[..n]);
        for v in &mut verts[..n] {
            *v -= centroid;
        }
        Ok((Self { vertices: verts, vertex_count: n as u8 }, centroid))
    }

    /// Axis-aligned rectangle centred on the origin.
    pub fn rectangle(half_width: f32, half_height: f32) -> Self {
        let (w, h) = (half_width, half_height);
        Self {
            vertices: [Vec2::new(-w, -h), Vec2::new(w, -h), Vec2::new(w, h), Vec2::new(-w, h)],
            vertex_count: 4,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.vertex_count as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.vertex_count == 0
    }

    #[inline]
    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices[..self.len()]
    }

    /// Outward unit normal of edge `i` (from vertex `i` to `i + 1`).
    #[inline]
    pub fn edge_normal(&self, i: usize) -> Vec2 {
        let n = self.len();
        let e = self.vertices[(i + 1) % n] - self.vertices[i];
        let len = e.length();
        Vec2::new(e.y / len, -e.x / len)
    }

    pub fn area(&self) -> f32 {
        signed_area(self.vertices())
    }

    pub fn is_convex_ccw(&self) -> bool {
        let v = self.vertices();
        let n = v.len();
        n >= 3
            && signed_area(v) > 0.0
            && (0..n).all(|i| cross_vv(v[(i + 1) % n] - v[i], v[(i + 2) % n] - v[(i + 1) % n]) >= 0.0)
    }

    /// Largest vertex distance from the local origin.
    pub fn bounding_radius(&self) -> f32 {
        self.vertices().iter().map(|v| v.length()).fold(0.0, f32::max)
    }

    /// `(mass, rotational inertia)` about the local origin for the given density.
    pub fn mass_properties(&self, density: f32) -> (f32, f32) {
        // Triangle fan about the origin; exact for polygons centred on their centroid.
        let v = self.vertices();
        let n = v.len();
        let mut area = 0.0f32;
        let mut inertia = 0.0f32;
        for i in 0..n {
            let e1 = v[i];
            let e2 = v[(i + 1) % n];
            let d = cross_vv(e1, e2);
            area += 0.5 * d;
            let intx2 = e1.x * e1.x + e2.x * e1.x + e2.x * e2.x;
            let inty2 = e1.y * e1.y + e2.y * e1.y + e2.y * e2.y;
            inertia += (0.25 / 3.0) * d * (intx2 + inty2);
        }
        (density * area, density * inertia)
    }

    pub fn is_triangle(&self) -> bool {
        self.vertex_count == 3
    }
}

fn signed_area(v: &[Vec2]) -> f32 {
    let n = v.len();
    0.5 * (0..n).map(|i| cross_vv(v[i], v[(i + 1) % n])).sum::<f32>()
}

fn polygon_centroid(v: &[Vec2]) -> Vec2 {
    // Relative to the first vertex for better conditioning.
    let origin = v[0];
    let n = v.len();
    let mut c = Vec2::ZERO;
    let mut area = 0.0;
    for i in 1..n - 1 {
        let e1 = v[i] - origin;
        let e2 = v[i + 1] - origin;
        let a = 0.5 * cross_vv(e1, e2);
        area += a;
        c += (e1 + e2) * (a / 3.0);
    }
    origin + c * (1.0 / area)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Circle(CircleShape),
    Polygon(PolygonShape),
}

impl Shape {
    pub fn is_circle(&self) -> bool {
        matches!(self, Shape::Circle(_))
    }

    pub fn bounding_radius(&self) -> f32 {
        match self {
            Shape::Circle(c) => c.radius,
            Shape::Polygon(p) => p.bounding_radius(),
        }
    }

    pub fn mass_properties(&self, density: f32) -> (f32, f32) {
        match self {
            Shape::Circle(c) => c.mass_properties(density),
            Shape::Polygon(p) => p.mass_properties(density),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f32::consts::{FRAC_PI_2, PI};

    fn close(a: Vec2, b: Vec2, tol: f32) -> bool {
        (a - b).length() < tol
    }

    #[test]
    fn cross_products() {
        assert_eq!(cross_vv(Vec2::X, Vec2::Y), 1.0);
        assert_eq!(cross_sv(1.0, Vec2::X), Vec2::new(0.0, 1.0));
        let v = Vec2::new(0.3, -7.25);
        assert_eq!(cross_vv(v, v), 0.0);
    }

    #[test]
    fn transform_examples() {
        assert_eq!(transform_point(Vec2::X, Vec2::ZERO, 0.0), Vec2::X);
        assert!(close(transform_point(Vec2::X, Vec2::ZERO, FRAC_PI_2), Vec2::Y, 1e-6));
        // R(pi)(1,1) = (-1,-1); + (2,3) = (1,2)
        assert!(close(
            transform_point(Vec2::new(1.0, 1.0), Vec2::new(2.0, 3.0), PI),
            Vec2::new(1.0, 2.0),
            1e-6
        ));
    }

    #[test]
    fn clip_examples() {
        let seg = [Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0)];
        let c = clip_segment_to_halfplane(seg, Vec2::X, 0.0);
        assert_eq!(c.as_slice(), &[Vec2::new(-1.0, 0.0), Vec2::new(0.0, 0.0)]);

        let inside = [Vec2::new(-2.0, 1.0), Vec2::new(-1.0, -1.0)];
        assert_eq!(clip_segment_to_halfplane(inside, Vec2::X, 0.0).as_slice(), &inside);

        let outside = [Vec2::new(2.0, 1.0), Vec2::new(1.0, -1.0)];
        assert!(clip_segment_to_halfplane(outside, Vec2::X, 0.0).is_empty());

        // Endpoint on the plane is kept.
        let touching = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)];
        assert_eq!(clip_segment_to_halfplane(touching, Vec2::X, 0.0).as_slice(), &[Vec2::ZERO]);
    }

    #[test]
    fn polygon_winding_and_convexity() {
        let cw = [Vec2::new(0.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(1.0, 1.0), Vec2::new(1.0, 0.0)];
        let (poly, centroid) = PolygonShape::new(&cw).unwrap();
        assert!(poly.is_convex_ccw());
        assert!(close(centroid, Vec2::new(0.5, 0.5), 1e-6));
        assert!((poly.area() - 1.0).abs() < 1e-6);

        let dart = [Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0), Vec2::new(0.5, 0.5), Vec2::new(0.0, 2.0)];
        assert_eq!(PolygonShape::new(&dart), Err(GeometryError::Concave));
        let line = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0)];
        assert_eq!(PolygonShape::new(&line), Err(GeometryError::Degenerate));
        assert_eq!(PolygonShape::new(&line[..2]), Err(GeometryError::VertexCount(2)));
    }

    #[test]
    fn mass_properties_match_closed_forms() {
        let rect = PolygonShape::rectangle(0.5, 0.25);
        let (m, i) = rect.mass_properties(2.0);
        // m = rho w h, I = m (w^2 + h^2) / 12
        assert!((m - 1.0).abs() < 1e-6);
        assert!((i - 1.0 * (1.0 + 0.25) / 12.0).abs() < 1e-6);

        let (m, i) = CircleShape::new(0.5).unwrap().mass_properties(1.0);
        assert!((m - PI * 0.25).abs() < 1e-6);
        assert!((i - 0.5 * m * 0.25).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn transform_round_trip(px in -10.0f32..10.0, py in -10.0f32..10.0,
                                tx in -10.0f32..10.0, ty in -10.0f32..10.0,
                                angle in -10.0f32..10.0) {
            let p = Vec2::new(px, py);
            let t = Vec2::new(tx, ty);
            let back = inverse_transform_point(transform_point(p, t, angle), t, angle);
            // 1e-9 is below f32 resolution at these magnitudes; compare in ulps of the inputs.
            prop_assert!((back - p).length() <= 8.0 * f32::EPSILON * (p.length() + t.length() + 1.0));
        }

        #[test]
        fn clip_output_lies_on_segment(ax in -5.0f32..5.0, ay in -5.0f32..5.0,
                                       bx in -5.0f32..5.0, by in -5.0f32..5.0,
                                       angle in 0.0f32..std::f32::consts::TAU, offset in -3.0f32..3.0) {
            let seg = [Vec2::new(ax, ay), Vec2::new(bx, by)];
            let normal = Vec2::X.rotate(angle);
            let out = clip_segment_to_halfplane(seg, normal, offset);
            let dir = seg[1] - seg[0];
            if let Some(d) = dir.try_normalize() {
                for p in out.as_slice() {
                    let dist = cross_vv(d, *p - seg[0]).abs();
                    prop_assert!(dist < 1e-5);
                    prop_assert!(normal.dot(*p) - offset <= 1e-5);
                }
            }
        }

        #[test]
        fn random_rectangles_and_triangles_are_convex(w in 0.1f32..0.6, h in 0.1f32..0.6,
                                                     ax in -1.0f32..1.0, ay in 0.1f32..1.0,
                                                     bx in -1.0f32..1.0) {
            prop_assert!(PolygonShape::rectangle(w, h).is_convex_ccw());
            let tri = [Vec2::new(-w, 0.0), Vec2::new(bx.abs() + 0.1, -h), Vec2::new(ax, ay)];
            if let Ok((poly, _)) = PolygonShape::new(&tri) {
                prop_assert!(poly.is_convex_ccw());
            }
        }
    }
}
