//! Levels: validation, procedural generation, mutation and the file format.

mod format;
mod generate;
mod mutate;

pub use format::{deserialize, serialize, FORMAT_TAG, FORMAT_VERSION};
pub use generate::{generate, generate_with, limit_motor_power, noop_filter, GenConfig, GenError, NoopResult};
pub use mutate::{mutate, mutate_with, remove_shape, MutateError, Mutation, MutationKind};

use thiserror::Error;

use crate::engine::{
    manifold_circle_circle, manifold_polygon_circle, manifold_polygon_polygon, walls,
    CollisionManifold, RigidBody, Role, SimState, NUM_WALLS,
};
use crate::env::{SizeClass, JOINT_COLOURS};
use crate::geometry::Shape;

/// Largest initial overlap tolerated between bodies that may collide.
pub const MAX_INITIAL_PENETRATION: f32 = 1e-3;

/// A named initial scene.
#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub name: String,
    pub size_class: SizeClass,
    pub state: SimState,
}

impl Level {
    /// Wraps `state`, clearing any warm-start data it carries.
    pub fn new(name: impl Into<String>, size_class: SizeClass, mut state: SimState) -> Self {
        state.clear_contacts();
        Self { name: name.into(), size_class, state }
    }

    /// Walls-only scene of the given class.
    pub fn empty(name: impl Into<String>, size_class: SizeClass) -> Self {
        Self::new(name, size_class, SimState::new(size_class.static_params()))
    }

    /// Digest of the active entities.
    pub fn hash(&self) -> u64 {
        self.state.entity_hash()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LevelError {
    #[error("exactly one green shape required, found {0}")]
    GreenCount(usize),
    #[error("exactly one blue shape required, found {0}")]
    BlueCount(usize),
    #[error("level is not controllable: needs a powered motor joint or a thruster")]
    NotControllable,
    #[error("bodies {a} and {b} overlap by {depth}")]
    Penetration { a: usize, b: usize, depth: f32 },
    #[error("green and blue shapes touch in the initial state")]
    GoalTouching,
    #[error("capacities do not match size class {0}")]
    Capacity(SizeClass),
    #[error("boundary walls are missing or modified")]
    Walls,
    #[error("{what} {index} references an invalid or inactive body")]
    Reference { what: &'static str, index: usize },
    #[error("joint {0} connects a body to itself")]
    SelfJoint(usize),
    #[error("joint {0} has limit_min > limit_max")]
    LimitOrder(usize),
    #[error("joint {0} colour binding out of range")]
    Binding(usize),
    #[error("{what} {index} has a non-finite value")]
    NonFinite { what: &'static str, index: usize },
    #[error("body {index} has invalid {field}")]
    Material { index: usize, field: &'static str },
    #[error("body {0}: fixated must coincide with zero inverse mass, inertia and velocity")]
    Fixation(usize),
    #[error("body {0} mass does not match its shape and density")]
    Mass(usize),
    #[error("body {0} has an invalid shape")]
    Shape(usize),
    #[error("body {index} sits in a {expected} slot")]
    SlotKind { index: usize, expected: &'static str },
    #[error("{0}")]
    Format(String),
}

impl LevelError {
    /// Short stable identifier of the violated invariant.
    pub fn code(&self) -> &'static str {
        match self {
            LevelError::GreenCount(_) => "exactly_one_green",
            LevelError::BlueCount(_) => "exactly_one_blue",
            LevelError::NotControllable => "controllable",
            LevelError::Penetration { .. } => "no_initial_penetration",
            LevelError::GoalTouching => "goal_not_touching",
            LevelError::Capacity(_) => "capacity",
            LevelError::Walls => "walls",
            LevelError::Reference { .. } => "reference",
            LevelError::SelfJoint(_) => "self_joint",
            LevelError::LimitOrder(_) => "limit_order",
            LevelError::Binding(_) => "binding",
            LevelError::NonFinite { .. } => "finite",
            LevelError::Material { .. } => "material",
            LevelError::Fixation(_) => "fixation",
            LevelError::Mass(_) => "mass",
            LevelError::Shape(_) => "shape",
            LevelError::SlotKind { .. } => "slot_kind",
            LevelError::Format(_) => "format",
        }
    }
}

/// Narrow-phase manifolds between two bodies given in slot order.
pub(crate) fn pair_manifolds(a: &RigidBody, b: &RigidBody) -> [CollisionManifold; 2] {
    let none = CollisionManifold::default();
    match (&a.shape, &b.shape) {
        (Shape::Polygon(_), Shape::Polygon(_)) => manifold_polygon_polygon(a, b),
        (Shape::Polygon(_), Shape::Circle(_)) => [manifold_polygon_circle(a, b), none],
        (Shape::Circle(_), Shape::Polygon(_)) => [manifold_polygon_circle(b, a), none],
        (Shape::Circle(_), Shape::Circle(_)) => [manifold_circle_circle(a, b), none],
    }
}

/// Deepest active penetration between two bodies, 0 when apart.
pub(crate) fn overlap(a: &RigidBody, b: &RigidBody) -> f32 {
    let reach = a.shape.bounding_radius() + b.shape.bounding_radius();
    if (a.position - b.position).length_squared() >= reach * reach {
        return 0.0;
    }
    pair_manifolds(a, b).iter().filter(|m| m.active).map(|m| m.penetration).fold(0.0, f32::max)
}

fn check_body(i: usize, b: &RigidBody, polygon_slot: bool) -> Result<(), LevelError> {
    let finite = b.position.is_finite()
        && b.velocity.is_finite()
        && b.rotation.is_finite()
        && b.angular_velocity.is_finite()
        && b.density.is_finite()
        && b.friction.is_finite()
        && b.restitution.is_finite();
    if !finite {
        return Err(LevelError::NonFinite { what: "body", index: i });
    }
    if b.is_circle() == polygon_slot {
        let expected = if polygon_slot { "polygon" } else { "circle" };
        return Err(LevelError::SlotKind { index: i, expected });
    }
    let shape_ok = match &b.shape {
        Shape::Circle(c) => c.radius.is_finite() && c.radius > 0.0,
        Shape::Polygon(p) => {
            (3..=4).contains(&p.len())
                && p.vertices().iter().all(|v| v.is_finite())
                && p.is_convex_ccw()
                && p.area() > 1e-6
        }
    };
    if !shape_ok {
        return Err(LevelError::Shape(i));
    }
    if !(b.density > 0.0) {
        return Err(LevelError::Material { index: i, field: "density" });
    }
    if !(b.friction >= 0.0) {
        return Err(LevelError::Material { index: i, field: "friction" });
    }
    if !(0.0..=1.0).contains(&b.restitution) {
        return Err(LevelError::Material { index: i, field: "restitution" });
    }
    let zero_inverse = b.inverse_mass == 0.0 && b.inverse_inertia == 0.0;
    if b.fixated != zero_inverse
        || (b.fixated && (b.velocity != crate::geometry::Vec2::ZERO || b.angular_velocity != 0.0))
    {
        return Err(LevelError::Fixation(i));
    }
    if !b.fixated {
        let mut expect = *b;
        expect.recompute_mass();
        let close = |x: f32, y: f32| (x - y).abs() <= 1e-5 * y.abs();
        if !close(b.inverse_mass, expect.inverse_mass) || !close(b.inverse_inertia, expect.inverse_inertia) {
            return Err(LevelError::Mass(i));
        }
    }
    Ok(())
}

/// Checks every level invariant except the no-op filter.
pub fn validate(level: &Level) -> Result<(), LevelError> {
    let s = &level.state;
    if s.capacities != level.size_class.static_params()
        || s.bodies.len() != s.capacities.num_bodies()
        || s.joints.len() != s.capacities.num_joints
        || s.thrusters.len() != s.capacities.num_thrusters
        || s.manifolds.len() != s.capacities.num_manifold_slots()
    {
        return Err(LevelError::Capacity(level.size_class));
    }
    if s.bodies[..NUM_WALLS] != walls() {
        return Err(LevelError::Walls);
    }

    let (mut green, mut blue) = (0, 0);
    for (i, b) in s.bodies.iter().enumerate().skip(NUM_WALLS).filter(|(_, b)| b.active) {
        check_body(i, b, s.is_polygon_slot(i))?;
        green += (b.role == Role::Green) as usize;
        blue += (b.role == Role::Blue) as usize;
    }
    if green != 1 {
        return Err(LevelError::GreenCount(green));
    }
    if blue != 1 {
        return Err(LevelError::BlueCount(blue));
    }

    let live = |i: usize| i < s.bodies.len() && s.bodies[i].active;
    for (i, j) in s.joints.iter().enumerate().filter(|(_, j)| j.active) {
        if !live(j.body_a) || !live(j.body_b) {
            return Err(LevelError::Reference { what: "joint", index: i });
        }
        if j.body_a == j.body_b {
            return Err(LevelError::SelfJoint(i));
        }
        let finite = [j.fixed_rotation, j.motor_power, j.motor_speed, j.limit_min, j.limit_max]
            .iter()
            .all(|x| x.is_finite())
            && j.anchor_a.is_finite()
            && j.anchor_b.is_finite();
        if !finite {
            return Err(LevelError::NonFinite { what: "joint", index: i });
        }
        if j.motor_power < 0.0 {
            return Err(LevelError::NonFinite { what: "joint", index: i });
        }
        if j.has_limits && !j.is_fixed && j.limit_min > j.limit_max {
            return Err(LevelError::LimitOrder(i));
        }
        if j.binding as usize >= JOINT_COLOURS {
            return Err(LevelError::Binding(i));
        }
    }
    for (i, t) in s.thrusters.iter().enumerate().filter(|(_, t)| t.active) {
        if !live(t.body) {
            return Err(LevelError::Reference { what: "thruster", index: i });
        }
        if !(t.anchor.is_finite() && t.rotation.is_finite() && t.power.is_finite() && t.power >= 0.0) {
            return Err(LevelError::NonFinite { what: "thruster", index: i });
        }
    }

    let controllable = s.joints.iter().any(|j| j.is_controllable() && j.motor_power > 0.0)
        || s.thrusters.iter().any(|t| t.active && t.power > 0.0);
    if !controllable {
        return Err(LevelError::NotControllable);
    }

    for slot in s.pair_slots() {
        let (a, b) = (&s.bodies[slot.a], &s.bodies[slot.b]);
        if !a.active || !b.active || (a.fixated && b.fixated) || s.jointed(slot.a, slot.b) {
            continue;
        }
        let depth = overlap(a, b);
        let goal = (a.role == Role::Green && b.role == Role::Blue) || (a.role == Role::Blue && b.role == Role::Green);
        if goal && depth > 0.0 {
            return Err(LevelError::GoalTouching);
        }
        if depth > MAX_INITIAL_PENETRATION {
            return Err(LevelError::Penetration { a: slot.a, b: slot.b, depth });
        }
    }
    Ok(())
}
