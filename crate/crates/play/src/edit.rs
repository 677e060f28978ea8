use impulse2d::engine::{Joint, RigidBody, SimState, Thruster};
use impulse2d::geometry::{CircleShape, PolygonShape, Shape, Vec2};
use impulse2d::levelgen::{validate, Level, LevelError};
use serde_json::Value;
use thiserror::Error;

use crate::protocol::{vec2, BodySpec, Edit, EntityKind, EntityRef, EntitySpec, Point};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EditError {
    /// The edited level breaks a level invariant.
    #[error("{0}")]
    Invariant(LevelError),
    #[error("no free {0} slot")]
    Capacity(&'static str),
    #[error("no active {kind:?} at index {index}")]
    Target { kind: EntityKind, index: usize },
    #[error("boundary walls cannot be edited")]
    Wall,
    #[error("{kind:?} has no field {field:?}")]
    UnknownField { kind: EntityKind, field: String },
    #[error("bad value for {field}: {detail}")]
    BadValue { field: String, detail: String },
    #[error("invalid shape: {0}")]
    Shape(String),
}

impl EditError {
    pub fn code(&self) -> &'static str {
        match self {
            EditError::Invariant(e) => e.code(),
            EditError::Capacity(_) => "capacity",
            EditError::Target { .. } => "unknown_target",
            EditError::Wall => "walls",
            EditError::UnknownField { .. } => "unknown_field",
            EditError::BadValue { .. } => "bad_value",
            EditError::Shape(_) => "shape",
        }
    }
}

/// Applies one edit to a copy of `level` and validates the result. The
/// level is untouched on error.
pub fn apply_edit(level: &Level, edit: &Edit) -> Result<Level, EditError> {
    let mut next = level.clone();
    let s = &mut next.state;
    match edit {
        Edit::AddEntity { entity } => add_entity(s, entity)?,
        Edit::DeleteEntity { target } => {
            check_target(s, *target)?;
            match target.kind {
                EntityKind::Body => s.remove_body(target.index),
                EntityKind::Joint => s.joints[target.index] = Joint::default(),
                EntityKind::Thruster => s.thrusters[target.index] = Thruster::default(),
            }
        }
        Edit::SetField { target, field, value } => {
            check_target(s, *target)?;
            set_field(s, *target, field, value)?;
        }
        Edit::SetRole { body, role } => {
            let target = EntityRef { kind: EntityKind::Body, index: *body };
            check_target(s, target)?;
            s.bodies[*body].role = *role;
        }
        Edit::Move { body, position, rotation } => {
            check_target(s, EntityRef { kind: EntityKind::Body, index: *body })?;
            let b = &mut s.bodies[*body];
            b.position = finite_point("position", *position)?;
            if let Some(r) = rotation {
                b.rotation = finite("rotation", *r)?;
            }
        }
    }
    next.state.clear_contacts();
    validate(&next).map_err(EditError::Invariant)?;
    Ok(next)
}

fn check_target(s: &SimState, target: EntityRef) -> Result<(), EditError> {
    let missing = EditError::Target { kind: target.kind, index: target.index };
    let active = match target.kind {
        EntityKind::Body => {
            if s.is_wall(target.index) {
                return Err(EditError::Wall);
            }
            s.bodies.get(target.index).map(|b| b.active)
        }
        EntityKind::Joint => s.joints.get(target.index).map(|j| j.active),
        EntityKind::Thruster => s.thrusters.get(target.index).map(|t| t.active),
    };
    if active == Some(true) {
        Ok(())
    } else {
        Err(missing)
    }
}

fn finite(field: &str, v: f32) -> Result<f32, EditError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EditError::BadValue { field: field.into(), detail: "not finite".into() })
    }
}

fn finite_point(field: &str, p: Point) -> Result<Vec2, EditError> {
    finite(field, p[0])?;
    finite(field, p[1])?;
    Ok(vec2(p))
}

fn make_body(shape: Shape, spec: &BodySpec, offset: Vec2) -> Result<RigidBody, EditError> {
    let position = finite_point("position", spec.position)? + offset.rotate(spec.rotation);
    let mut body = RigidBody::new(shape, position, spec.density)
        .with_rotation(finite("rotation", spec.rotation)?)
        .with_material(spec.friction, spec.restitution)
        .with_role(spec.role);
    body.set_fixated(spec.fixated);
    Ok(body)
}

fn add_entity(s: &mut SimState, entity: &EntitySpec) -> Result<(), EditError> {
    match entity {
        EntitySpec::Circle { radius, body } => {
            let shape = CircleShape::new(*radius).map_err(|e| EditError::Shape(e.to_string()))?;
            let body = make_body(Shape::Circle(shape), body, Vec2::ZERO)?;
            s.add_body(body).map_err(|_| EditError::Capacity("circle"))?;
        }
        EntitySpec::Polygon { vertices, body } => {
            let points: Vec<Vec2> = vertices.iter().map(|&p| vec2(p)).collect();
            let (shape, centroid) = PolygonShape::new(&points).map_err(|e| EditError::Shape(e.to_string()))?;
            let body = make_body(Shape::Polygon(shape), body, centroid)?;
            s.add_body(body).map_err(|_| EditError::Capacity("polygon"))?;
        }
        EntitySpec::Joint { body_a, body_b, anchor_a, anchor_b, motor, motor_power, motor_speed, fixed, binding } => {
            for &b in [body_a, body_b] {
                check_target(s, EntityRef { kind: EntityKind::Body, index: b }).or_else(|e| match e {
                    EditError::Wall => Ok(()),
                    e => Err(e),
                })?;
            }
            let mut joint = Joint::revolute(*body_a, *body_b, vec2(*anchor_a), vec2(*anchor_b));
            if *motor {
                joint = joint.with_motor(*motor_power, *motor_speed);
            }
            if *fixed {
                let a = &s.bodies[*body_a];
                let b = &s.bodies[*body_b];
                joint = joint.fixed(b.rotation - a.rotation);
            }
            joint.binding = *binding;
            s.add_joint(joint).map_err(|_| EditError::Capacity("joint"))?;
        }
        EntitySpec::Thruster { body, anchor, rotation, power, binding } => {
            check_target(s, EntityRef { kind: EntityKind::Body, index: *body })?;
            let mut thruster = Thruster::new(*body, vec2(*anchor), *rotation, *power);
            thruster.binding = *binding;
            s.add_thruster(thruster).map_err(|_| EditError::Capacity("thruster"))?;
        }
    }
    Ok(())
}

fn number(field: &str, value: &Value) -> Result<f32, EditError> {
    let v = value
        .as_f64()
        .ok_or_else(|| EditError::BadValue { field: field.into(), detail: format!("expected a number, got {value}") })?;
    finite(field, v as f32)
}

fn flag(field: &str, value: &Value) -> Result<bool, EditError> {
    value
        .as_bool()
        .ok_or_else(|| EditError::BadValue { field: field.into(), detail: format!("expected a boolean, got {value}") })
}

fn pair(field: &str, value: &Value) -> Result<Vec2, EditError> {
    let p: Point = serde_json::from_value(value.clone())
        .map_err(|_| EditError::BadValue { field: field.into(), detail: format!("expected [x, y], got {value}") })?;
    finite_point(field, p)
}

fn small_int(field: &str, value: &Value) -> Result<u8, EditError> {
    value
        .as_u64()
        .and_then(|v| u8::try_from(v).ok())
        .ok_or_else(|| EditError::BadValue { field: field.into(), detail: format!("expected a small integer, got {value}") })
}

fn set_field(s: &mut SimState, target: EntityRef, field: &str, value: &Value) -> Result<(), EditError> {
    let unknown = || EditError::UnknownField { kind: target.kind, field: field.into() };
    match target.kind {
        EntityKind::Body => {
            let b = &mut s.bodies[target.index];
            match field {
                "friction" => b.friction = number(field, value)?,
                "restitution" => b.restitution = number(field, value)?,
                "density" => {
                    b.density = number(field, value)?;
                    b.recompute_mass();
                }
                "fixated" => b.set_fixated(flag(field, value)?),
                "rotation" => b.rotation = number(field, value)?,
                "velocity" => b.velocity = pair(field, value)?,
                "angular_velocity" => b.angular_velocity = number(field, value)?,
                "radius" => match &mut b.shape {
                    Shape::Circle(c) => {
                        *c = CircleShape::new(number(field, value)?).map_err(|e| EditError::Shape(e.to_string()))?;
                        b.recompute_mass();
                    }
                    Shape::Polygon(_) => return Err(unknown()),
                },
                _ => return Err(unknown()),
            }
        }
        EntityKind::Joint => {
            let j = &mut s.joints[target.index];
            match field {
                "motor_on" => j.motor_on = flag(field, value)?,
                "motor_power" => j.motor_power = number(field, value)?,
                "motor_speed" => j.motor_speed = number(field, value)?,
                "motor_always_on" => j.motor_always_on = flag(field, value)?,
                "is_fixed" => j.is_fixed = flag(field, value)?,
                "has_limits" => j.has_limits = flag(field, value)?,
                "limit_min" => j.limit_min = number(field, value)?,
                "limit_max" => j.limit_max = number(field, value)?,
                "anchor_a" => j.anchor_a = pair(field, value)?,
                "anchor_b" => j.anchor_b = pair(field, value)?,
                "binding" => j.binding = small_int(field, value)?,
                _ => return Err(unknown()),
            }
        }
        EntityKind::Thruster => {
            let t = &mut s.thrusters[target.index];
            match field {
                "power" => t.power = number(field, value)?,
                "rotation" => t.rotation = number(field, value)?,
                "anchor" => t.anchor = pair(field, value)?,
                "binding" => t.binding = small_int(field, value)?,
                _ => return Err(unknown()),
            }
        }
    }
    Ok(())
}
