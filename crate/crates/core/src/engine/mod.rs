//! Fixed-capacity rigid-body simulation.
//!
//! A [`SimState`] holds preallocated arenas of bodies (polygons first, then
//! circles), joints and thrusters. Unused slots are simply inactive, so every
//! scene of a given size class is advanced by exactly the same code path.

mod collision;
mod hash;
mod solver;
mod step;

pub use collision::{manifold_circle_circle, manifold_polygon_circle, manifold_polygon_polygon};
pub use solver::{
    apply_impulse, apply_motor, apply_thruster, resolve_collision, resolve_fixed_rotation,
    resolve_joint_limit, resolve_revolute_position,
};
pub use step::step;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{transform_point, CircleShape, PolygonShape, Shape, Vec2};

/// Side length of the square free space enclosed by the four walls.
pub const ARENA_SIZE: f32 = 5.0;
/// Thickness of each boundary wall.
pub const WALL_THICKNESS: f32 = 1.0;
/// Every scene reserves the first polygon slots for the boundary walls.
pub const NUM_WALLS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    #[default]
    None,
    Green,
    Blue,
    Red,
}

impl Role {
    pub const ALL: [Role; 4] = [Role::None, Role::Green, Role::Blue, Role::Red];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidBody {
    pub active: bool,
    pub shape: Shape,
    pub position: Vec2,
    pub rotation: f32,
    pub velocity: Vec2,
    pub angular_velocity: f32,
    pub inverse_mass: f32,
    pub inverse_inertia: f32,
    pub density: f32,
    pub friction: f32,
    pub restitution: f32,
    pub role: Role,
    pub fixated: bool,
}

impl RigidBody {
    /// Active, free body at rest with mass derived from `density`.
    pub fn new(shape: Shape, position: Vec2, density: f32) -> Self {
        let mut body = Self {
            active: true,
            shape,
            position,
            rotation: 0.0,
            velocity: Vec2::ZERO,
            angular_velocity: 0.0,
            inverse_mass: 0.0,
            inverse_inertia: 0.0,
            density,
            friction: 0.5,
            restitution: 0.0,
            role: Role::None,
            fixated: false,
        };
        body.recompute_mass();
        body
    }

    pub fn circle(radius: f32, position: Vec2, density: f32) -> Self {
        Self::new(Shape::Circle(CircleShape { radius }), position, density)
    }

    pub fn polygon(shape: PolygonShape, position: Vec2, density: f32) -> Self {
        Self::new(Shape::Polygon(shape), position, density)
    }

    /// Placeholder occupying an unused slot.
    pub fn inactive(circle: bool) -> Self {
        let shape = if circle {
            Shape::Circle(CircleShape { radius: 0.1 })
        } else {
            Shape::Polygon(PolygonShape::rectangle(0.1, 0.1))
        };
        Self {
            active: false,
            shape,
            position: Vec2::ZERO,
            rotation: 0.0,
            velocity: Vec2::ZERO,
            angular_velocity: 0.0,
            inverse_mass: 0.0,
            inverse_inertia: 0.0,
            density: 1.0,
            friction: 0.0,
            restitution: 0.0,
            role: Role::None,
            fixated: false,
        }
    }

    pub fn with_rotation(mut self, rotation: f32) -> Self {
        self.rotation = rotation;
        self
    }

    pub fn with_velocity(mut self, velocity: Vec2, angular_velocity: f32) -> Self {
        self.velocity = velocity;
        self.angular_velocity = angular_velocity;
        self
    }

    pub fn with_material(mut self, friction: f32, restitution: f32) -> Self {
        self.friction = friction;
        self.restitution = restitution;
        self
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    pub fn with_fixated(mut self, fixated: bool) -> Self {
        self.set_fixated(fixated);
        self
    }

    pub fn set_fixated(&mut self, fixated: bool) {
        self.fixated = fixated;
        if fixated {
            self.velocity = Vec2::ZERO;
            self.angular_velocity = 0.0;
        }
        self.recompute_mass();
    }

    /// Recomputes inverse mass and inertia from shape and density.
    pub fn recompute_mass(&mut self) {
        if self.fixated {
            self.inverse_mass = 0.0;
            self.inverse_inertia = 0.0;
        } else {
            let (mass, inertia) = self.shape.mass_properties(self.density);
            self.inverse_mass = 1.0 / mass;
            self.inverse_inertia = 1.0 / inertia;
        }
    }

    pub fn is_circle(&self) -> bool {
        self.shape.is_circle()
    }

    pub fn world_point(&self, local: Vec2) -> Vec2 {
        transform_point(local, self.position, self.rotation)
    }

    /// Velocity of the material point at world position `point`.
    #[inline]
    pub fn point_velocity(&self, point: Vec2) -> Vec2 {
        let r = point - self.position;
        self.velocity + crate::geometry::cross_sv(self.angular_velocity, r)
    }

    pub fn mass(&self) -> f32 {
        if self.inverse_mass > 0.0 {
            1.0 / self.inverse_mass
        } else {
            f32::INFINITY
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Joint {
    pub active: bool,
    pub body_a: usize,
    pub body_b: usize,
    pub anchor_a: Vec2,
    pub anchor_b: Vec2,
    pub is_fixed: bool,
    pub fixed_rotation: f32,
    pub motor_on: bool,
    pub motor_power: f32,
    pub motor_speed: f32,
    pub motor_always_on: bool,
    pub has_limits: bool,
    pub limit_min: f32,
    pub limit_max: f32,
    pub accumulated_impulse: Vec2,
    pub accumulated_rotational_impulse: f32,
    pub binding: u8,
}

impl Default for Joint {
    fn default() -> Self {
        Self {
            active: false,
            body_a: 0,
            body_b: 0,
            anchor_a: Vec2::ZERO,
            anchor_b: Vec2::ZERO,
            is_fixed: false,
            fixed_rotation: 0.0,
            motor_on: false,
            motor_power: 0.0,
            motor_speed: 0.0,
            motor_always_on: false,
            has_limits: false,
            limit_min: 0.0,
            limit_max: 0.0,
            accumulated_impulse: Vec2::ZERO,
            accumulated_rotational_impulse: 0.0,
            binding: 0,
        }
    }
}

impl Joint {
    /// Active revolute joint with no motor and no limits.
    pub fn revolute(body_a: usize, body_b: usize, anchor_a: Vec2, anchor_b: Vec2) -> Self {
        Self { active: true, body_a, body_b, anchor_a, anchor_b, ..Self::default() }
    }

    pub fn with_motor(mut self, power: f32, speed: f32) -> Self {
        self.motor_on = true;
        self.motor_power = power;
        self.motor_speed = speed;
        self
    }

    pub fn with_limits(mut self, min: f32, max: f32) -> Self {
        self.has_limits = true;
        self.limit_min = min;
        self.limit_max = max;
        self
    }

    pub fn fixed(mut self, fixed_rotation: f32) -> Self {
        self.is_fixed = true;
        self.fixed_rotation = fixed_rotation;
        self
    }

    pub fn connects(&self, a: usize, b: usize) -> bool {
        (self.body_a == a && self.body_b == b) || (self.body_a == b && self.body_b == a)
    }

    pub fn is_controllable(&self) -> bool {
        self.active && self.motor_on && !self.is_fixed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Thruster {
    pub active: bool,
    pub body: usize,
    pub anchor: Vec2,
    pub rotation: f32,
    pub power: f32,
    pub binding: u8,
}

impl Thruster {
    pub fn new(body: usize, anchor: Vec2, rotation: f32, power: f32) -> Self {
        Self { active: true, body, anchor, rotation, power, binding: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CollisionManifold {
    pub active: bool,
    pub position: Vec2,
    pub normal: Vec2,
    pub penetration: f32,
    pub body_a: usize,
    pub body_b: usize,
    pub restitution_velocity_target: f32,
    pub accumulated_normal_impulse: f32,
    pub accumulated_tangent_impulse: f32,
}

impl CollisionManifold {
    pub(crate) fn contact(position: Vec2, normal: Vec2, penetration: f32) -> Self {
        Self {
            active: penetration > 0.0,
            position,
            normal,
            penetration,
            ..Self::default()
        }
    }

    pub fn tangent(&self) -> Vec2 {
        self.normal.perp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub dt: f32,
    pub gravity: Vec2,
    pub num_solver_steps: usize,
    /// Velocity bias per unit penetration or joint separation (1/s).
    pub velocity_bias_alpha: f32,
    /// Fraction of penetration or separation removed by direct displacement.
    pub positional_beta: f32,
    /// Angular velocity correction per radian of joint angle error (1/s).
    pub rotational_gamma: f32,
    pub motor_rho: f32,
    pub warm_starting: bool,
    pub solver_batch_size: usize,
    /// Approach speed below which restitution is ignored.
    pub restitution_threshold: f32,
    /// Penetration tolerated before velocity bias and positional correction act.
    pub penetration_slop: f32,
}

impl Default for SimParams {
    fn default() -> Self {
        let dt = 1.0 / 60.0;
        Self {
            dt,
            gravity: Vec2::new(0.0, -9.8),
            num_solver_steps: 10,
            velocity_bias_alpha: 0.2 / dt,
            positional_beta: 0.2,
            rotational_gamma: 1.0 / dt,
            motor_rho: 0.3,
            warm_starting: true,
            solver_batch_size: 16,
            restitution_threshold: 0.5,
            penetration_slop: 0.002,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<(), SimError> {
        let ok = self.dt > 0.0
            && self.dt.is_finite()
            && self.gravity.is_finite()
            && self.num_solver_steps >= 1
            && self.solver_batch_size >= 1
            && (0.0..=1.0).contains(&self.positional_beta)
            && self.velocity_bias_alpha >= 0.0
            && self.rotational_gamma >= 0.0
            && self.motor_rho.is_finite()
            && self.penetration_slop >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(SimError::InvalidParams)
        }
    }
}

/// Arena capacities. Polygon counts include the four walls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StaticSimParams {
    pub num_polygons: usize,
    pub num_circles: usize,
    pub num_joints: usize,
    pub num_thrusters: usize,
}

impl StaticSimParams {
    pub fn num_bodies(&self) -> usize {
        self.num_polygons + self.num_circles
    }

    /// Number of manifold slots: two per polygon pair, one per other pair.
    pub fn num_manifold_slots(&self) -> usize {
        let p = self.num_polygons;
        let c = self.num_circles;
        p * p.saturating_sub(1) + p * c + c * c.saturating_sub(1) / 2
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("simulation diverged: non-finite value in body {body}")]
    Diverged { body: usize },
    #[error("invalid simulation parameters")]
    InvalidParams,
    #[error("no free {0} slot")]
    CapacityExceeded(&'static str),
    #[error("action vector has length {got}, expected {expected}")]
    ActionLength { expected: usize, got: usize },
}

/// The complete dynamical state of one scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub capacities: StaticSimParams,
    pub bodies: Vec<RigidBody>,
    pub joints: Vec<Joint>,
    pub thrusters: Vec<Thruster>,
    /// Warm-start cache, one entry per pair slot in [`SimState::pair_slots`] order.
    pub manifolds: Vec<CollisionManifold>,
}

/// One body pair and where its manifolds live in the cache.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairSlot {
    pub a: usize,
    pub b: usize,
    pub first: usize,
    pub count: usize,
}

impl SimState {
    /// Empty scene: the four fixated walls and nothing else.
    pub fn new(capacities: StaticSimParams) -> Self {
        assert!(capacities.num_polygons >= NUM_WALLS, "capacity must include the walls");
        let mut bodies: Vec<RigidBody> = (0..capacities.num_bodies())
            .map(|i| RigidBody::inactive(i >= capacities.num_polygons))
            .collect();
        for (slot, wall) in bodies.iter_mut().zip(walls()) {
            *slot = wall;
        }
        Self {
            capacities,
            bodies,
            joints: vec![Joint::default(); capacities.num_joints],
            thrusters: vec![Thruster::default(); capacities.num_thrusters],
            manifolds: vec![CollisionManifold::default(); capacities.num_manifold_slots()],
        }
    }

    pub fn is_polygon_slot(&self, index: usize) -> bool {
        index < self.capacities.num_polygons
    }

    pub fn is_wall(&self, index: usize) -> bool {
        index < NUM_WALLS
    }

    /// Iterates pairs `a < b` in cache order.
    pub fn pair_slots(&self) -> impl Iterator<Item = PairSlot> + '_ {
        let n = self.bodies.len();
        let np = self.capacities.num_polygons;
        let mut first = 0;
        (0..n).flat_map(move |a| (a + 1..n).map(move |b| (a, b))).map(move |(a, b)| {
            let count = if b < np { 2 } else { 1 };
            let slot = PairSlot { a, b, first, count };
            first += count;
            slot
        })
    }

    /// Places `body` in the first free slot of its shape class.
    pub fn add_body(&mut self, body: RigidBody) -> Result<usize, SimError> {
        let range = if body.is_circle() {
            self.capacities.num_polygons..self.capacities.num_bodies()
        } else {
            NUM_WALLS..self.capacities.num_polygons
        };
        let kind = if body.is_circle() { "circle" } else { "polygon" };
        let index = range
            .into_iter()
            .find(|&i| !self.bodies[i].active)
            .ok_or(SimError::CapacityExceeded(kind))?;
        self.bodies[index] = body;
        Ok(index)
    }

    pub fn add_joint(&mut self, joint: Joint) -> Result<usize, SimError> {
        let index = self
            .joints
            .iter()
            .position(|j| !j.active)
            .ok_or(SimError::CapacityExceeded("joint"))?;
        self.joints[index] = Joint { active: true, ..joint };
        Ok(index)
    }

    pub fn add_thruster(&mut self, thruster: Thruster) -> Result<usize, SimError> {
        let index = self
            .thrusters
            .iter()
            .position(|t| !t.active)
            .ok_or(SimError::CapacityExceeded("thruster"))?;
        self.thrusters[index] = Thruster { active: true, ..thruster };
        Ok(index)
    }

    /// Deactivates a body together with every joint and thruster attached to it.
    pub fn remove_body(&mut self, index: usize) {
        let circle = self.bodies[index].is_circle();
        self.bodies[index] = RigidBody::inactive(circle);
        for j in &mut self.joints {
            if j.active && (j.body_a == index || j.body_b == index) {
                *j = Joint::default();
            }
        }
        for t in &mut self.thrusters {
            if t.active && t.body == index {
                *t = Thruster::default();
            }
        }
        self.clear_contacts();
    }

    /// Zeroes the warm-start cache and joint accumulators.
    pub fn clear_contacts(&mut self) {
        self.manifolds.fill(CollisionManifold::default());
        for j in &mut self.joints {
            j.accumulated_impulse = Vec2::ZERO;
            j.accumulated_rotational_impulse = 0.0;
        }
    }

    /// True when an active joint links `a` and `b`.
    pub fn jointed(&self, a: usize, b: usize) -> bool {
        self.joints.iter().any(|j| j.active && j.connects(a, b))
    }

    pub fn active_manifolds(&self) -> impl Iterator<Item = &CollisionManifold> {
        self.manifolds.iter().filter(|m| m.active)
    }

    pub fn has_contact_between(&self, a: usize, b: usize) -> bool {
        self.active_manifolds()
            .any(|m| (m.body_a == a && m.body_b == b) || (m.body_a == b && m.body_b == a))
    }

    pub fn total_momentum(&self) -> Vec2 {
        self.bodies
            .iter()
            .filter(|b| b.active && b.inverse_mass > 0.0)
            .fold(Vec2::ZERO, |acc, b| acc + b.velocity * b.mass())
    }

    pub fn kinetic_energy(&self) -> f32 {
        self.bodies
            .iter()
            .filter(|b| b.active && b.inverse_mass > 0.0)
            .map(|b| {
                let lin = 0.5 * b.mass() * b.velocity.length_squared();
                let ang = 0.5 * b.angular_velocity * b.angular_velocity / b.inverse_inertia;
                lin + ang
            })
            .sum()
    }
}

/// Floor, ceiling, left and right walls around `[0, ARENA_SIZE]²`.
pub fn walls() -> [RigidBody; NUM_WALLS] {
    let half_long = 0.5 * ARENA_SIZE + WALL_THICKNESS;
    let half_thick = 0.5 * WALL_THICKNESS;
    let mid = 0.5 * ARENA_SIZE;
    let horizontal = PolygonShape::rectangle(half_long, half_thick);
    let vertical = PolygonShape::rectangle(half_thick, half_long);
    let wall = |shape, x, y| {
        RigidBody::polygon(shape, Vec2::new(x, y), 1.0)
            .with_material(0.5, 0.0)
            .with_fixated(true)
    };
    [
        wall(horizontal, mid, -half_thick),
        wall(horizontal, mid, ARENA_SIZE + half_thick),
        wall(vertical, -half_thick, mid),
        wall(vertical, ARENA_SIZE + half_thick, mid),
    ]
}
