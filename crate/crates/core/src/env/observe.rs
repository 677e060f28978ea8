use serde::{Deserialize, Serialize};

use super::EnvState;
use crate::engine::{Joint, RigidBody, Thruster};
use crate::geometry::{Shape, Vec2, MAX_POLYGON_VERTICES};

/// Feature width of one shape row.
pub const SHAPE_FEATURES: usize = 29;
/// Number of joint colour classes in the one-hot encoding.
pub const JOINT_COLOURS: usize = 4;
pub const JOINT_FEATURES: usize = 11 + JOINT_COLOURS;
pub const THRUSTER_FEATURES: usize = 6;

/// Padded entity sets with activity masks.
///
/// Shape rows follow arena order, joint rows come in (from, to) pairs with
/// the second row swapping the roles of the two bodies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityObservation {
    pub shapes: Vec<[f32; SHAPE_FEATURES]>,
    pub shape_mask: Vec<bool>,
    pub joints: Vec<JointRow>,
    pub joint_mask: Vec<bool>,
    pub thrusters: Vec<[f32; THRUSTER_FEATURES]>,
    /// Body index of the shape carrying each thruster.
    pub thruster_bodies: Vec<usize>,
    pub thruster_mask: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointRow {
    pub features: [f32; JOINT_FEATURES],
    pub from: usize,
    pub to: usize,
}

impl EntityObservation {
    pub fn active_shapes(&self) -> impl Iterator<Item = &[f32; SHAPE_FEATURES]> {
        self.shapes.iter().zip(&self.shape_mask).filter(|(_, &m)| m).map(|(r, _)| r)
    }

    pub fn active_joints(&self) -> impl Iterator<Item = &JointRow> {
        self.joints.iter().zip(&self.joint_mask).filter(|(_, &m)| m).map(|(r, _)| r)
    }

    pub fn active_thrusters(&self) -> impl Iterator<Item = &[f32; THRUSTER_FEATURES]> {
        self.thrusters.iter().zip(&self.thruster_mask).filter(|(_, &m)| m).map(|(r, _)| r)
    }
}

pub(crate) fn shape_row(b: &RigidBody) -> [f32; SHAPE_FEATURES] {
    let mut row = [0.0; SHAPE_FEATURES];
    if !b.active {
        return row;
    }
    let (s, c) = b.rotation.sin_cos();
    row[0] = b.position.x;
    row[1] = b.position.y;
    row[2] = b.velocity.x;
    row[3] = b.velocity.y;
    row[4] = b.inverse_mass;
    row[5] = b.inverse_inertia;
    row[6] = b.density;
    row[7] = (b.angular_velocity / 10.0).tanh();
    row[8 + b.role.index()] = 1.0;
    row[12] = s;
    row[13] = c;
    row[14] = b.friction;
    row[15] = b.restitution;
    match &b.shape {
        Shape::Circle(circle) => {
            row[16] = 1.0;
            row[18] = circle.radius;
        }
        Shape::Polygon(poly) => {
            row[17] = 1.0;
            for (i, v) in poly.vertices().iter().enumerate() {
                row[19 + 2 * i] = v.x;
                row[20 + 2 * i] = v.y;
            }
            let tri = if poly.is_triangle() { 27 } else { 28 };
            row[tri] = 1.0;
        }
    }
    debug_assert_eq!(19 + 2 * MAX_POLYGON_VERTICES, 27);
    row
}

fn joint_row(j: &Joint, bodies: &[RigidBody], from: usize) -> [f32; JOINT_FEATURES] {
    let mut row = [0.0; JOINT_FEATURES];
    if !j.active {
        return row;
    }
    let (a, b) = (&bodies[j.body_a], &bodies[j.body_b]);
    let ra = j.anchor_a.rotate(a.rotation);
    let rb = j.anchor_b.rotate(b.rotation);
    let (r_from, r_to, rel) = if from == j.body_a {
        (ra, rb, a.rotation - b.rotation)
    } else {
        (rb, ra, b.rotation - a.rotation)
    };
    row[0] = 1.0;
    row[1] = j.is_fixed as u8 as f32;
    row[2] = r_from.x;
    row[3] = r_from.y;
    row[4] = r_to.x;
    row[5] = r_to.y;
    if j.motor_on {
        row[6] = j.motor_power;
        row[7] = j.motor_speed;
    }
    row[8] = j.motor_always_on as u8 as f32;
    row[9 + (j.binding as usize).min(JOINT_COLOURS - 1)] = 1.0;
    let (s, c) = rel.sin_cos();
    row[9 + JOINT_COLOURS] = s;
    row[10 + JOINT_COLOURS] = c;
    row
}

fn thruster_row(t: &Thruster, bodies: &[RigidBody]) -> [f32; THRUSTER_FEATURES] {
    let mut row = [0.0; THRUSTER_FEATURES];
    if !t.active {
        return row;
    }
    let body = &bodies[t.body];
    let r: Vec2 = t.anchor.rotate(body.rotation);
    let (s, c) = (body.rotation + t.rotation).sin_cos();
    row[0] = 1.0;
    row[1] = r.x;
    row[2] = r.y;
    row[3] = t.power;
    row[4] = s;
    row[5] = c;
    row
}

pub fn observe_entity(state: &EnvState) -> EntityObservation {
    let sim = &state.sim;
    let mut joints = Vec::with_capacity(2 * sim.joints.len());
    let mut joint_mask = Vec::with_capacity(2 * sim.joints.len());
    for j in &sim.joints {
        for (from, to) in [(j.body_a, j.body_b), (j.body_b, j.body_a)] {
            joints.push(JointRow { features: joint_row(j, &sim.bodies, from), from, to });
            joint_mask.push(j.active);
        }
    }
    EntityObservation {
        shapes: sim.bodies.iter().map(shape_row).collect(),
        shape_mask: sim.bodies.iter().map(|b| b.active).collect(),
        joints,
        joint_mask,
        thrusters: sim.thrusters.iter().map(|t| thruster_row(t, &sim.bodies)).collect(),
        thruster_bodies: sim.thrusters.iter().map(|t| t.body).collect(),
        thruster_mask: sim.thrusters.iter().map(|t| t.active).collect(),
    }
}

/// Shape rows, then one row per joint in (a, b) orientation, then thruster
/// rows, all in arena order with inactive entities zeroed.
pub fn observe_flat(state: &EnvState) -> Vec<f32> {
    let sim = &state.sim;
    let len = sim.bodies.len() * SHAPE_FEATURES
        + sim.joints.len() * JOINT_FEATURES
        + sim.thrusters.len() * THRUSTER_FEATURES;
    let mut out = Vec::with_capacity(len);
    for b in &sim.bodies {
        out.extend_from_slice(&shape_row(b));
    }
    for j in &sim.joints {
        out.extend_from_slice(&joint_row(j, &sim.bodies, j.body_a));
    }
    for t in &sim.thrusters {
        out.extend_from_slice(&thruster_row(t, &sim.bodies));
    }
    debug_assert_eq!(out.len(), len);
    out
}

pub fn flat_len(caps: &crate::engine::StaticSimParams) -> usize {
    caps.num_bodies() * SHAPE_FEATURES
        + caps.num_joints * JOINT_FEATURES
        + caps.num_thrusters * THRUSTER_FEATURES
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Role;
    use crate::geometry::PolygonShape;
    use std::f32::consts::FRAC_PI_2;

    #[test]
    fn shape_row_layout() {
        let b = RigidBody::circle(0.3, Vec2::new(1.0, 2.0), 1.0)
            .with_rotation(FRAC_PI_2)
            .with_role(Role::Blue);
        let row = shape_row(&b);
        assert_eq!(row[7], 0.0);
        assert!((row[12] - 1.0).abs() < 1e-6 && row[13].abs() < 1e-6);
        assert_eq!(&row[8..12], &[0.0, 0.0, 1.0, 0.0]);
        assert_eq!((row[16], row[17], row[18]), (1.0, 0.0, 0.3));
        assert!(row[19..].iter().all(|&x| x == 0.0));

        let spin = b.with_velocity(Vec2::ZERO, 10.0);
        assert!((shape_row(&spin)[7] - 1.0f32.tanh()).abs() < 1e-6);
    }

    #[test]
    fn polygon_rows_carry_vertices_and_kind() {
        let tri = PolygonShape::new(&[Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)]).unwrap().0;
        let row = shape_row(&RigidBody::polygon(tri, Vec2::new(2.0, 2.0), 1.0));
        assert_eq!((row[27], row[28]), (1.0, 0.0));
        assert_eq!((row[25], row[26]), (0.0, 0.0));
        let rect = shape_row(&RigidBody::polygon(PolygonShape::rectangle(0.5, 0.25), Vec2::ZERO, 1.0));
        assert_eq!((rect[27], rect[28]), (0.0, 1.0));
        assert!(rect[19..27].iter().all(|x| x.abs() == 0.5 || x.abs() == 0.25));
    }

    #[test]
    fn inactive_rows_are_zero() {
        assert!(shape_row(&RigidBody::inactive(false)).iter().all(|&x| x == 0.0));
    }
}
