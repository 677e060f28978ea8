use super::EnvState;
use crate::engine::{RigidBody, Role, ARENA_SIZE};
use crate::geometry::{cross_vv, Shape, Vec2, MAX_POLYGON_VERTICES};

pub const RASTER_SIZE: usize = 125;
/// World units shown beyond each side of the arena so the walls appear as a band.
const MARGIN: f32 = 0.25;
const BACKGROUND: [u8; 3] = [235, 235, 235];
const NEUTRAL: [u8; 3] = [150, 150, 150];
const GREEN: [u8; 3] = [40, 190, 70];
const BLUE: [u8; 3] = [40, 100, 230];
const RED: [u8; 3] = [225, 50, 50];
const JOINT: [u8; 3] = [250, 210, 40];
const THRUSTER: [u8; 3] = [255, 130, 0];
const FIXATED_SHADE: f32 = 0.5;

/// Row-major RGB image, row 0 at the top of the arena.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    pub pixels: Vec<u8>,
}

impl Raster {
    pub fn shape(&self) -> [usize; 3] {
        [RASTER_SIZE, RASTER_SIZE, 3]
    }

    pub fn pixel(&self, row: usize, col: usize) -> [u8; 3] {
        let i = 3 * (row * RASTER_SIZE + col);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    fn put(&mut self, row: usize, col: usize, c: [u8; 3]) {
        let i = 3 * (row * RASTER_SIZE + col);
        self.pixels[i..i + 3].copy_from_slice(&c);
    }
}

fn scale() -> f32 {
    (ARENA_SIZE + 2.0 * MARGIN) / RASTER_SIZE as f32
}

fn pixel_centre(row: usize, col: usize) -> Vec2 {
    let s = scale();
    Vec2::new(-MARGIN + (col as f32 + 0.5) * s, ARENA_SIZE + MARGIN - (row as f32 + 0.5) * s)
}

/// Inclusive pixel bounds covering the world box `[lo, hi]`.
fn pixel_bounds(lo: Vec2, hi: Vec2) -> Option<(usize, usize, usize, usize)> {
    let s = scale();
    let to_col = |x: f32| ((x + MARGIN) / s).floor();
    let to_row = |y: f32| ((ARENA_SIZE + MARGIN - y) / s).floor();
    let max = (RASTER_SIZE - 1) as f32;
    let (c0, c1) = (to_col(lo.x).max(0.0), to_col(hi.x).min(max));
    let (r0, r1) = (to_row(hi.y).max(0.0), to_row(lo.y).min(max));
    (c0 <= c1 && r0 <= r1).then_some((r0 as usize, r1 as usize, c0 as usize, c1 as usize))
}

fn body_colour(b: &RigidBody) -> [u8; 3] {
    let base = match b.role {
        Role::None => NEUTRAL,
        Role::Green => GREEN,
        Role::Blue => BLUE,
        Role::Red => RED,
    };
    if b.fixated {
        base.map(|c| (c as f32 * FIXATED_SHADE) as u8)
    } else {
        base
    }
}

fn fill_body(r: &mut Raster, b: &RigidBody) {
    let colour = body_colour(b);
    let reach = b.shape.bounding_radius();
    let Some((r0, r1, c0, c1)) = pixel_bounds(b.position - Vec2::new(reach, reach), b.position + Vec2::new(reach, reach))
    else {
        return;
    };
    match &b.shape {
        Shape::Circle(c) => {
            let rr = c.radius * c.radius;
            for row in r0..=r1 {
                for col in c0..=c1 {
                    if (pixel_centre(row, col) - b.position).length_squared() <= rr {
                        r.put(row, col, colour);
                    }
                }
            }
        }
        Shape::Polygon(poly) => {
            let mut w = [Vec2::ZERO; MAX_POLYGON_VERTICES];
            let n = poly.len();
            for (dst, &v) in w.iter_mut().zip(poly.vertices()) {
                *dst = b.world_point(v);
            }
            for row in r0..=r1 {
                for col in c0..=c1 {
                    let p = pixel_centre(row, col);
                    let inside = (0..n).all(|i| cross_vv(w[(i + 1) % n] - w[i], p - w[i]) >= 0.0);
                    if inside {
                        r.put(row, col, colour);
                    }
                }
            }
        }
    }
}

fn marker(r: &mut Raster, at: Vec2, colour: [u8; 3]) {
    let half = 1.5 * scale();
    if let Some((r0, r1, c0, c1)) = pixel_bounds(at - Vec2::new(half, half), at + Vec2::new(half, half)) {
        for row in r0..=r1 {
            for col in c0..=c1 {
                r.put(row, col, colour);
            }
        }
    }
}

/// Rasterises the arena and walls to 125×125 RGB.
pub fn render_pixels(state: &EnvState) -> Raster {
    let mut r = Raster { pixels: BACKGROUND.repeat(RASTER_SIZE * RASTER_SIZE) };
    let sim = &state.sim;
    for b in sim.bodies.iter().filter(|b| b.active) {
        fill_body(&mut r, b);
    }
    for j in sim.joints.iter().filter(|j| j.active) {
        marker(&mut r, sim.bodies[j.body_a].world_point(j.anchor_a), JOINT);
    }
    for t in sim.thrusters.iter().filter(|t| t.active) {
        marker(&mut r, sim.bodies[t.body].world_point(t.anchor), THRUSTER);
    }
    r
}
