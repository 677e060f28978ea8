#![allow(dead_code)]

use impulse2d::engine::{Joint, RigidBody, SimState, StaticSimParams, Thruster};
use impulse2d::geometry::{PolygonShape, Vec2};
use rand::Rng;

pub const MEDIUM: StaticSimParams =
    StaticSimParams { num_polygons: 10, num_circles: 3, num_joints: 2, num_thrusters: 2 };

pub fn random_body(rng: &mut impl Rng, circle: bool, lo: f32, hi: f32, speed: f32) -> RigidBody {
    let pos = Vec2::new(rng.random_range(lo..hi), rng.random_range(lo..hi));
    let body = if circle {
        RigidBody::circle(rng.random_range(0.1..0.35), pos, rng.random_range(0.5..2.0))
    } else {
        let shape = PolygonShape::rectangle(rng.random_range(0.1..0.35), rng.random_range(0.1..0.35));
        RigidBody::polygon(shape, pos, rng.random_range(0.5..2.0))
    };
    body.with_rotation(rng.random_range(-3.0..3.0))
        .with_velocity(
            Vec2::new(rng.random_range(-speed..speed), rng.random_range(-speed..speed)),
            rng.random_range(-1.0..1.0),
        )
        .with_material(rng.random_range(0.0..1.0), rng.random_range(0.0..0.8))
}

/// Free bodies in the middle of the arena, optionally one revolute joint.
pub fn random_scene(rng: &mut impl Rng, lo: f32, hi: f32, speed: f32, joint: bool) -> SimState {
    let mut s = SimState::new(MEDIUM);
    for _ in 0..rng.random_range(2..=6) {
        s.add_body(random_body(rng, false, lo, hi, speed)).unwrap();
    }
    for _ in 0..rng.random_range(0..=3) {
        s.add_body(random_body(rng, true, lo, hi, speed)).unwrap();
    }
    if joint {
        s.add_joint(Joint::revolute(4, 5, Vec2::new(0.1, 0.0), Vec2::new(-0.1, 0.0))).unwrap();
    }
    s
}

pub fn with_thruster(mut s: SimState, body: usize) -> SimState {
    s.add_thruster(Thruster::new(body, Vec2::new(0.05, 0.0), 0.3, 2.0)).unwrap();
    s
}
