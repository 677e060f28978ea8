//! Narrow-phase manifold generation for each shape pairing.
//!
//! Normals always point from body `a` towards body `b`.

use super::{CollisionManifold, RigidBody};
use crate::geometry::{clip_segment_to_halfplane, Shape, Vec2, MAX_POLYGON_VERTICES};

/// Separation ties closer than this prefer body `a`, then the lower face index.
const SAT_TIE_EPSILON: f32 = 1e-6;
const COINCIDENT_EPSILON: f32 = 1e-6;

/// World-space vertices and outward normals of a polygon body.
#[derive(Debug, Clone, Copy)]
pub(crate) struct WorldPolygon {
    verts: [Vec2; MAX_POLYGON_VERTICES],
    normals: [Vec2; MAX_POLYGON_VERTICES],
    len: usize,
}

impl WorldPolygon {
    pub(crate) fn from_body(body: &RigidBody) -> Self {
        let Shape::Polygon(poly) = &body.shape else {
            panic!("WorldPolygon::from_body called on a circle");
        };
        let (s, c) = body.rotation.sin_cos();
        let len = poly.len();
        let mut verts = [Vec2::ZERO; MAX_POLYGON_VERTICES];
        let mut normals = [Vec2::ZERO; MAX_POLYGON_VERTICES];
        for (i, (v, n)) in verts.iter_mut().zip(&mut normals).take(len).enumerate() {
            *v = body.position + poly.vertices[i].rotate_sc(s, c);
            *n = poly.edge_normal(i).rotate_sc(s, c);
        }
        Self { verts, normals, len }
    }

    #[inline]
    fn vertex(&self, i: usize) -> Vec2 {
        self.verts[i % self.len]
    }
}

/// Circle `a` against circle `b`.
pub fn manifold_circle_circle(a: &RigidBody, b: &RigidBody) -> CollisionManifold {
    let (Shape::Circle(ca), Shape::Circle(cb)) = (&a.shape, &b.shape) else {
        panic!("manifold_circle_circle requires two circles");
    };
    circle_circle(a.position, ca.radius, b.position, cb.radius)
}

pub(crate) fn circle_circle(pa: Vec2, ra: f32, pb: Vec2, rb: f32) -> CollisionManifold {
    let d = pb - pa;
    let dist = d.length();
    let normal = if dist < COINCIDENT_EPSILON { Vec2::X } else { d * (1.0 / dist) };
    CollisionManifold::contact(pa + normal * ra, normal, ra + rb - dist)
}

/// Polygon `poly` (body a) against circle `circ` (body b).
pub fn manifold_polygon_circle(poly: &RigidBody, circ: &RigidBody) -> CollisionManifold {
    let Shape::Circle(c) = &circ.shape else {
        panic!("manifold_polygon_circle requires a circle as the second body");
    };
    polygon_circle(&WorldPolygon::from_body(poly), circ.position, c.radius)
}

pub(crate) fn polygon_circle(poly: &WorldPolygon, center: Vec2, radius: f32) -> CollisionManifold {
    let mut inside = true;
    let mut best_face = 0;
    let mut best_face_sep = f32::NEG_INFINITY;
    let mut closest = poly.verts[0];
    let mut closest_d2 = f32::INFINITY;

    for i in 0..poly.len {
        let v0 = poly.verts[i];
        let v1 = poly.vertex(i + 1);
        let sep = poly.normals[i].dot(center - v0);
        if sep > 0.0 {
            inside = false;
        }
        if sep > best_face_sep {
            best_face_sep = sep;
            best_face = i;
        }
        // Clamp the centre between the corner perpendiculars, then project.
        let edge = v1 - v0;
        let t = ((center - v0).dot(edge) / edge.length_squared()).clamp(0.0, 1.0);
        let p = v0 + edge * t;
        let d2 = (center - p).length_squared();
        if d2 < closest_d2 {
            closest_d2 = d2;
            closest = p;
        }
    }

    if inside {
        // Push out through the face of minimum exit distance.
        let normal = poly.normals[best_face];
        let depth = -best_face_sep;
        return CollisionManifold::contact(center + normal * depth, normal, radius + depth);
    }
    let offset = center - closest;
    let dist = closest_d2.sqrt();
    let normal = if dist < COINCIDENT_EPSILON {
        poly.normals[best_face]
    } else {
        offset * (1.0 / dist)
    };
    CollisionManifold::contact(closest, normal, radius - dist)
}

/// Polygon `a` against polygon `b`; up to two contact points.
pub fn manifold_polygon_polygon(a: &RigidBody, b: &RigidBody) -> [CollisionManifold; 2] {
    polygon_polygon(&WorldPolygon::from_body(a), &WorldPolygon::from_body(b))
}

/// Largest separation of `other` from any face of `reference`, and that face.
fn max_separation(reference: &WorldPolygon, other: &WorldPolygon) -> (f32, usize) {
    let mut best = f32::NEG_INFINITY;
    let mut best_face = 0;
    for i in 0..reference.len {
        let n = reference.normals[i];
        let v = reference.verts[i];
        let sep = other.verts[..other.len]
            .iter()
            .map(|&w| n.dot(w - v))
            .fold(f32::INFINITY, f32::min);
        if sep > best + SAT_TIE_EPSILON || best == f32::NEG_INFINITY {
            best = sep;
            best_face = i;
        }
    }
    (best, best_face)
}

pub(crate) fn polygon_polygon(a: &WorldPolygon, b: &WorldPolygon) -> [CollisionManifold; 2] {
    let none = [CollisionManifold::default(); 2];
    let (sep_a, face_a) = max_separation(a, b);
    if sep_a > 0.0 {
        return none;
    }
    let (sep_b, face_b) = max_separation(b, a);
    if sep_b > 0.0 {
        return none;
    }

    let (reference, incident, ref_face, flip) = if sep_b > sep_a + SAT_TIE_EPSILON {
        (b, a, face_b, true)
    } else {
        (a, b, face_a, false)
    };
    let ref_normal = reference.normals[ref_face];

    // Incident face: the most anti-parallel face on the other polygon.
    let inc_face = (0..incident.len)
        .map(|i| (i, incident.normals[i].dot(ref_normal)))
        .fold((0, f32::INFINITY), |best, (i, d)| if d < best.1 { (i, d) } else { best })
        .0;
    let seg = [incident.verts[inc_face], incident.vertex(inc_face + 1)];

    let r1 = reference.verts[ref_face];
    let r2 = reference.vertex(ref_face + 1);
    let tangent = (r2 - r1) * (1.0 / (r2 - r1).length());

    let clipped = clip_segment_to_halfplane(seg, -tangent, -tangent.dot(r1));
    let mut points = [Vec2::ZERO; 2];
    let mut count = 0;
    if clipped.len() == 2 {
        let s = [clipped.as_slice()[0], clipped.as_slice()[1]];
        let clipped = clip_segment_to_halfplane(s, tangent, tangent.dot(r2));
        for &p in clipped.as_slice() {
            points[count] = p;
            count += 1;
        }
    } else {
        for &p in clipped.as_slice() {
            if tangent.dot(p) <= tangent.dot(r2) {
                points[count] = p;
                count += 1;
            }
        }
    }

    let normal = if flip { -ref_normal } else { ref_normal };
    let mut out = none;
    let mut any = false;
    for (slot, &p) in out.iter_mut().zip(&points[..count]) {
        let sep = ref_normal.dot(p - r1);
        if sep < 0.0 {
            *slot = CollisionManifold::contact(p, normal, -sep);
            any = true;
        }
    }

    if !any && sep_a.max(sep_b) < 0.0 {
        // Overlapping, but no clipped incident point lies below the reference
        // face. Fall back to the deepest incident vertex.
        let deepest = incident.verts[..incident.len]
            .iter()
            .map(|&v| (v, ref_normal.dot(v - r1)))
            .fold((incident.verts[0], f32::INFINITY), |best, c| if c.1 < best.1 { c } else { best })
            .0;
        out[0] = CollisionManifold::contact(deepest, normal, -sep_a.max(sep_b));
    }
    out
}
