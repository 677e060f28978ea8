//! JSON level documents.
//!
//! Walls are implied and never written. Every other active entity is listed
//! with its arena slot. Floats are written as the shortest decimal that
//! parses back to the same 32-bit value.

use serde::{Deserialize, Serialize};

use super::{validate, Level, LevelError};
use crate::engine::{Joint, RigidBody, Role, SimState, Thruster, NUM_WALLS};
use crate::env::SizeClass;
use crate::geometry::{CircleShape, PolygonShape, Shape, Vec2, MAX_POLYGON_VERTICES};

pub const FORMAT_TAG: &str = "impulse2d-level";
pub const FORMAT_VERSION: u32 = 1;

type V2 = [f32; 2];

fn v(p: Vec2) -> V2 {
    [p.x, p.y]
}

fn p(v: V2) -> Vec2 {
    Vec2::new(v[0], v[1])
}

fn is_zero(x: &f32) -> bool {
    *x == 0.0
}

fn is_origin(x: &V2) -> bool {
    *x == [0.0, 0.0]
}

fn is_false(x: &bool) -> bool {
    !*x
}

fn is_none_role(r: &Role) -> bool {
    *r == Role::None
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    format: String,
    version: u32,
    name: String,
    size_class: SizeClass,
    bodies: Vec<BodyDoc>,
    #[serde(default)]
    joints: Vec<JointDoc>,
    #[serde(default)]
    thrusters: Vec<ThrusterDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ShapeDoc {
    Circle { radius: f32 },
    /// Counter-clockwise, centred on the centroid.
    Polygon { vertices: Vec<V2> },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BodyDoc {
    slot: usize,
    shape: ShapeDoc,
    position: V2,
    #[serde(default, skip_serializing_if = "is_zero")]
    rotation: f32,
    #[serde(default, skip_serializing_if = "is_origin")]
    velocity: V2,
    #[serde(default, skip_serializing_if = "is_zero")]
    angular_velocity: f32,
    /// Derived from shape and density when omitted.
    #[serde(default)]
    inverse_mass: Option<f32>,
    #[serde(default)]
    inverse_inertia: Option<f32>,
    density: f32,
    friction: f32,
    restitution: f32,
    #[serde(default, skip_serializing_if = "is_none_role")]
    role: Role,
    #[serde(default, skip_serializing_if = "is_false")]
    fixated: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointDoc {
    slot: usize,
    body_a: usize,
    body_b: usize,
    anchor_a: V2,
    anchor_b: V2,
    #[serde(default, skip_serializing_if = "is_false")]
    is_fixed: bool,
    #[serde(default, skip_serializing_if = "is_zero")]
    fixed_rotation: f32,
    #[serde(default, skip_serializing_if = "is_false")]
    motor_on: bool,
    #[serde(default, skip_serializing_if = "is_zero")]
    motor_power: f32,
    #[serde(default, skip_serializing_if = "is_zero")]
    motor_speed: f32,
    #[serde(default, skip_serializing_if = "is_false")]
    motor_always_on: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    has_limits: bool,
    #[serde(default, skip_serializing_if = "is_zero")]
    limit_min: f32,
    #[serde(default, skip_serializing_if = "is_zero")]
    limit_max: f32,
    #[serde(default)]
    binding: u8,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ThrusterDoc {
    slot: usize,
    body: usize,
    anchor: V2,
    rotation: f32,
    power: f32,
    #[serde(default)]
    binding: u8,
}

fn body_doc(slot: usize, b: &RigidBody) -> BodyDoc {
    let shape = match &b.shape {
        Shape::Circle(c) => ShapeDoc::Circle { radius: c.radius },
        Shape::Polygon(poly) => ShapeDoc::Polygon { vertices: poly.vertices().iter().map(|&x| v(x)).collect() },
    };
    BodyDoc {
        slot,
        shape,
        position: v(b.position),
        rotation: b.rotation,
        velocity: v(b.velocity),
        angular_velocity: b.angular_velocity,
        inverse_mass: Some(b.inverse_mass),
        inverse_inertia: Some(b.inverse_inertia),
        density: b.density,
        friction: b.friction,
        restitution: b.restitution,
        role: b.role,
        fixated: b.fixated,
    }
}

pub fn serialize(level: &Level) -> String {
    let s = &level.state;
    let doc = Document {
        format: FORMAT_TAG.into(),
        version: FORMAT_VERSION,
        name: level.name.clone(),
        size_class: level.size_class,
        bodies: s
            .bodies
            .iter()
            .enumerate()
            .skip(NUM_WALLS)
            .filter(|(_, b)| b.active)
            .map(|(i, b)| body_doc(i, b))
            .collect(),
        joints: s
            .joints
            .iter()
            .enumerate()
            .filter(|(_, j)| j.active)
            .map(|(slot, j)| JointDoc {
                slot,
                body_a: j.body_a,
                body_b: j.body_b,
                anchor_a: v(j.anchor_a),
                anchor_b: v(j.anchor_b),
                is_fixed: j.is_fixed,
                fixed_rotation: j.fixed_rotation,
                motor_on: j.motor_on,
                motor_power: j.motor_power,
                motor_speed: j.motor_speed,
                motor_always_on: j.motor_always_on,
                has_limits: j.has_limits,
                limit_min: j.limit_min,
                limit_max: j.limit_max,
                binding: j.binding,
            })
            .collect(),
        thrusters: s
            .thrusters
            .iter()
            .enumerate()
            .filter(|(_, t)| t.active)
            .map(|(slot, t)| ThrusterDoc {
                slot,
                body: t.body,
                anchor: v(t.anchor),
                rotation: t.rotation,
                power: t.power,
                binding: t.binding,
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("level documents always serialize");
    out.push('\n');
    out
}

fn build_body(d: &BodyDoc) -> Result<RigidBody, LevelError> {
    let shape = match &d.shape {
        ShapeDoc::Circle { radius } => Shape::Circle(CircleShape { radius: *radius }),
        ShapeDoc::Polygon { vertices } => {
            if !(3..=MAX_POLYGON_VERTICES).contains(&vertices.len()) {
                return Err(LevelError::Shape(d.slot));
            }
            let mut poly = PolygonShape { vertices: [Vec2::ZERO; MAX_POLYGON_VERTICES], vertex_count: vertices.len() as u8 };
            for (dst, &src) in poly.vertices.iter_mut().zip(vertices) {
                *dst = p(src);
            }
            Shape::Polygon(poly)
        }
    };
    let mut b = RigidBody::new(shape, p(d.position), d.density)
        .with_rotation(d.rotation)
        .with_velocity(p(d.velocity), d.angular_velocity)
        .with_material(d.friction, d.restitution)
        .with_role(d.role);
    b.fixated = d.fixated;
    b.recompute_mass();
    if let Some(m) = d.inverse_mass {
        b.inverse_mass = m;
    }
    if let Some(i) = d.inverse_inertia {
        b.inverse_inertia = i;
    }
    Ok(b)
}

fn slot_error(what: &str, slot: usize) -> LevelError {
    LevelError::Format(format!("{what} slot {slot} is out of range or used twice"))
}

/// Parses and validates a level document.
///
/// Errors name the JSON path of schema violations or the violated invariant.
pub fn deserialize(bytes: &[u8]) -> Result<Level, LevelError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let doc: Document = serde_path_to_error::deserialize(de)
        .map_err(|e| LevelError::Format(format!("at {}: {}", e.path(), e.inner())))?;
    if doc.format != FORMAT_TAG || doc.version != FORMAT_VERSION {
        return Err(LevelError::Format(format!(
            "unsupported format {:?} version {} (expected {FORMAT_TAG:?} version {FORMAT_VERSION})",
            doc.format, doc.version
        )));
    }
    let mut state = SimState::new(doc.size_class.static_params());
    for d in &doc.bodies {
        if d.slot < NUM_WALLS || d.slot >= state.bodies.len() || state.bodies[d.slot].active {
            return Err(slot_error("body", d.slot));
        }
        state.bodies[d.slot] = build_body(d)?;
    }
    for d in &doc.joints {
        if d.slot >= state.joints.len() || state.joints[d.slot].active {
            return Err(slot_error("joint", d.slot));
        }
        state.joints[d.slot] = Joint {
            active: true,
            body_a: d.body_a,
            body_b: d.body_b,
            anchor_a: p(d.anchor_a),
            anchor_b: p(d.anchor_b),
            is_fixed: d.is_fixed,
            fixed_rotation: d.fixed_rotation,
            motor_on: d.motor_on,
            motor_power: d.motor_power,
            motor_speed: d.motor_speed,
            motor_always_on: d.motor_always_on,
            has_limits: d.has_limits,
            limit_min: d.limit_min,
            limit_max: d.limit_max,
            accumulated_impulse: Vec2::ZERO,
            accumulated_rotational_impulse: 0.0,
            binding: d.binding,
        };
    }
    for d in &doc.thrusters {
        if d.slot >= state.thrusters.len() || state.thrusters[d.slot].active {
            return Err(slot_error("thruster", d.slot));
        }
        state.thrusters[d.slot] = Thruster {
            active: true,
            body: d.body,
            anchor: p(d.anchor),
            rotation: d.rotation,
            power: d.power,
            binding: d.binding,
        };
    }
    let level = Level::new(doc.name, doc.size_class, state);
    validate(&level)?;
    Ok(level)
}
