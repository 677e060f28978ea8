//! Brute-force convex overlap oracle in f64, independent of the engine's SAT.

use impulse2d::engine::RigidBody;
use impulse2d::geometry::{PolygonShape, Vec2};
use rand::Rng;

pub type P = (f64, f64);

fn cross(o: P, a: P, b: P) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

pub fn area(poly: &[P]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        a.0 * b.1 - b.0 * a.1
    }).sum::<f64>() * 0.5
}

/// Sutherland-Hodgman clip of `subject` by the CCW convex polygon `clip`.
pub fn intersection(subject: &[P], clip: &[P]) -> Vec<P> {
    let mut out = subject.to_vec();
    for i in 0..clip.len() {
        let (e0, e1) = (clip[i], clip[(i + 1) % clip.len()]);
        let input = std::mem::take(&mut out);
        for k in 0..input.len() {
            let cur = input[k];
            let prev = input[(k + input.len() - 1) % input.len()];
            let (dc, dp) = (cross(e0, e1, cur), cross(e0, e1, prev));
            if dc >= 0.0 {
                if dp < 0.0 {
                    out.push(lerp(prev, cur, dp / (dp - dc)));
                }
                out.push(cur);
            } else if dp >= 0.0 {
                out.push(lerp(prev, cur, dp / (dp - dc)));
            }
        }
        if out.is_empty() {
            break;
        }
    }
    out
}

fn lerp(a: P, b: P, t: f64) -> P {
    (a.0 + (b.0 - a.0) * t, a.1 + (b.1 - a.1) * t)
}

/// Smallest projection overlap over every edge normal; negative when separated.
pub fn sat_depth(a: &[P], b: &[P]) -> f64 {
    let mut depth = f64::INFINITY;
    for poly in [a, b] {
        for i in 0..poly.len() {
            let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
            let len = ((q.0 - p.0).powi(2) + (q.1 - p.1).powi(2)).sqrt();
            let n = ((q.1 - p.1) / len, -(q.0 - p.0) / len);
            let proj = |s: &[P]| {
                s.iter().map(|v| v.0 * n.0 + v.1 * n.1).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
            };
            let (alo, ahi) = proj(a);
            let (blo, bhi) = proj(b);
            depth = depth.min(ahi.min(bhi) - alo.max(blo));
        }
    }
    depth
}

pub fn world_vertices(body: &RigidBody) -> Vec<P> {
    let impulse2d::geometry::Shape::Polygon(poly) = &body.shape else { unreachable!() };
    poly.vertices()
        .iter()
        .map(|&v| {
            let w = body.world_point(v);
            (w.x as f64, w.y as f64)
        })
        .collect()
}

/// Convex quad inscribed in a randomly stretched and rotated ellipse.
pub fn random_quad(rng: &mut impl Rng, centre: Vec2) -> RigidBody {
    loop {
        let mut angles: Vec<f32> = (0..4).map(|_| rng.random_range(0.0..std::f32::consts::TAU)).collect();
        angles.sort_by(f32::total_cmp);
        let gaps_ok = (0..4).all(|i| {
            let next = if i == 3 { angles[0] + std::f32::consts::TAU } else { angles[i + 1] };
            next - angles[i] > 0.3
        });
        if !gaps_ok {
            continue;
        }
        let (sx, sy) = (rng.random_range(0.2..1.0f32), rng.random_range(0.2..1.0f32));
        let pts: Vec<Vec2> = angles.iter().map(|&t| Vec2::new(sx * t.cos(), sy * t.sin())).collect();
        let Ok((shape, _)) = PolygonShape::new(&pts) else { continue };
        let rot = rng.random_range(-3.2..3.2f32);
        return RigidBody::polygon(shape, centre, 1.0).with_rotation(rot);
    }
}
