//! Impulse-level constraint resolution: contacts, joints, motors, thrusters.

use super::{CollisionManifold, Joint, RigidBody, SimParams, Thruster};
use crate::geometry::{cross_vv, Vec2};

/// Applies `impulse` at world point `contact_point`.
#[inline]
pub fn apply_impulse(body: &mut RigidBody, contact_point: Vec2, impulse: Vec2) {
    debug_assert!(body.active, "impulse applied to an inactive body");
    body.velocity += impulse * body.inverse_mass;
    body.angular_velocity += cross_vv(contact_point - body.position, impulse) * body.inverse_inertia;
}

/// Mutable references to two distinct bodies.
#[inline]
pub(crate) fn pair_mut(bodies: &mut [RigidBody], a: usize, b: usize) -> (&mut RigidBody, &mut RigidBody) {
    assert_ne!(a, b, "constraint between a body and itself");
    if a < b {
        let (lo, hi) = bodies.split_at_mut(b);
        (&mut lo[a], &mut hi[0])
    } else {
        let (lo, hi) = bodies.split_at_mut(a);
        (&mut hi[0], &mut lo[b])
    }
}

/// Equal-and-opposite impulse: `-impulse` on `a`, `+impulse` on `b`.
#[inline]
fn apply_pair(a: &mut RigidBody, b: &mut RigidBody, point_a: Vec2, point_b: Vec2, impulse: Vec2) {
    apply_impulse(a, point_a, -impulse);
    apply_impulse(b, point_b, impulse);
}

#[inline]
fn effective_mass(a: &RigidBody, b: &RigidBody, ra: Vec2, rb: Vec2, dir: Vec2) -> f32 {
    let rna = cross_vv(ra, dir);
    let rnb = cross_vv(rb, dir);
    a.inverse_mass + b.inverse_mass + a.inverse_inertia * rna * rna + b.inverse_inertia * rnb * rnb
}

/// Combined friction coefficient.
#[inline]
pub(crate) fn mix_friction(a: &RigidBody, b: &RigidBody) -> f32 {
    (a.friction * a.friction + b.friction * b.friction).sqrt()
}

/// Combined restitution coefficient.
#[inline]
pub(crate) fn mix_restitution(a: &RigidBody, b: &RigidBody) -> f32 {
    a.restitution.min(b.restitution)
}

pub(crate) fn can_respond(a: &RigidBody, b: &RigidBody) -> bool {
    a.inverse_mass + b.inverse_mass + a.inverse_inertia + b.inverse_inertia > 0.0
}

/// Sets the bounce target from the pre-solve approach speed.
pub(crate) fn init_restitution_target(a: &RigidBody, b: &RigidBody, m: &mut CollisionManifold, params: &SimParams) {
    let vn = (b.point_velocity(m.position) - a.point_velocity(m.position)).dot(m.normal);
    m.restitution_velocity_target = if vn < -params.restitution_threshold {
        -mix_restitution(a, b) * vn
    } else {
        0.0
    };
}

/// Computes the incremental contact impulse (applied `+` to `b`) and updates
/// the manifold accumulators. Velocities are read, never written.
pub(crate) fn contact_impulse(
    a: &RigidBody,
    b: &RigidBody,
    m: &mut CollisionManifold,
    params: &SimParams,
) -> Vec2 {
    let ra = m.position - a.position;
    let rb = m.position - b.position;
    let vrel = b.point_velocity(m.position) - a.point_velocity(m.position);
    let n = m.normal;
    let t = m.tangent();

    let k_n = effective_mass(a, b, ra, rb, n);
    if k_n <= 0.0 {
        return Vec2::ZERO;
    }
    let excess = (m.penetration - params.penetration_slop).max(0.0);
    let target = m.restitution_velocity_target + params.velocity_bias_alpha * excess;
    let lambda_n = -(vrel.dot(n) - target) / k_n;
    let old_n = m.accumulated_normal_impulse;
    m.accumulated_normal_impulse = (old_n + lambda_n).max(0.0);
    let d_n = m.accumulated_normal_impulse - old_n;

    let k_t = effective_mass(a, b, ra, rb, t);
    let lambda_t = -vrel.dot(t) / k_t;
    let max_friction = mix_friction(a, b) * m.accumulated_normal_impulse;
    let old_t = m.accumulated_tangent_impulse;
    m.accumulated_tangent_impulse = (old_t + lambda_t).clamp(-max_friction, max_friction);
    let d_t = m.accumulated_tangent_impulse - old_t;

    n * d_n + t * d_t
}

/// Solves one contact against the current velocities of its two bodies.
pub fn resolve_collision(bodies: &mut [RigidBody], m: &mut CollisionManifold, params: &SimParams) {
    if !m.active {
        return;
    }
    let (a, b) = pair_mut(bodies, m.body_a, m.body_b);
    if !can_respond(a, b) {
        return;
    }
    let impulse = contact_impulse(a, b, m, params);
    apply_pair(a, b, m.position, m.position, impulse);
}

pub(crate) fn warm_start_collision(bodies: &mut [RigidBody], m: &CollisionManifold) {
    let (a, b) = pair_mut(bodies, m.body_a, m.body_b);
    let impulse = m.normal * m.accumulated_normal_impulse + m.tangent() * m.accumulated_tangent_impulse;
    apply_pair(a, b, m.position, m.position, impulse);
}

/// Moves both bodies apart along the normal, in proportion to inverse mass.
pub(crate) fn correct_collision_position(bodies: &mut [RigidBody], m: &CollisionManifold, weight: f32, params: &SimParams) {
    let (a, b) = pair_mut(bodies, m.body_a, m.body_b);
    let inv_sum = a.inverse_mass + b.inverse_mass;
    if inv_sum <= 0.0 {
        return;
    }
    let excess = (m.penetration - params.penetration_slop).max(0.0);
    let shift = m.normal * (params.positional_beta * excess * weight / inv_sum);
    a.position -= shift * a.inverse_mass;
    b.position += shift * b.inverse_mass;
}

fn joint_arms(a: &RigidBody, b: &RigidBody, joint: &Joint) -> (Vec2, Vec2) {
    (joint.anchor_a.rotate(a.rotation), joint.anchor_b.rotate(b.rotation))
}

/// Revolute point constraint: drives the relative velocity of the two anchor
/// points to `-alpha * separation`.
pub fn resolve_revolute_position(bodies: &mut [RigidBody], joint: &mut Joint, params: &SimParams) {
    if !joint.active {
        return;
    }
    let (a, b) = pair_mut(bodies, joint.body_a, joint.body_b);
    let (ra, rb) = joint_arms(a, b, joint);
    let pa = a.position + ra;
    let pb = b.position + rb;
    let separation = pb - pa;
    let cdot = b.point_velocity(pb) - a.point_velocity(pa);

    let im = a.inverse_mass + b.inverse_mass;
    let (ia, ib) = (a.inverse_inertia, b.inverse_inertia);
    let k11 = im + ia * ra.y * ra.y + ib * rb.y * rb.y;
    let k12 = -ia * ra.x * ra.y - ib * rb.x * rb.y;
    let k22 = im + ia * ra.x * ra.x + ib * rb.x * rb.x;
    let det = k11 * k22 - k12 * k12;
    if det.abs() <= f32::EPSILON * (k11 * k22).abs().max(f32::MIN_POSITIVE) {
        return;
    }
    let rhs = -(cdot + separation * params.velocity_bias_alpha);
    let inv_det = 1.0 / det;
    let impulse = Vec2::new(
        inv_det * (k22 * rhs.x - k12 * rhs.y),
        inv_det * (k11 * rhs.y - k12 * rhs.x),
    );
    joint.accumulated_impulse += impulse;
    apply_pair(a, b, pa, pb, impulse);
}

/// Angular impulse `j` reduces `omega_a - omega_b`.
#[inline]
fn apply_angular(a: &mut RigidBody, b: &mut RigidBody, j: f32) {
    a.angular_velocity -= j * a.inverse_inertia;
    b.angular_velocity += j * b.inverse_inertia;
}

/// Fixed-joint rotational constraint.
pub fn resolve_fixed_rotation(bodies: &mut [RigidBody], joint: &mut Joint, params: &SimParams) {
    if !joint.active || !joint.is_fixed {
        return;
    }
    let (a, b) = pair_mut(bodies, joint.body_a, joint.body_b);
    let inv_sum = a.inverse_inertia + b.inverse_inertia;
    if inv_sum <= 0.0 {
        return;
    }
    let angle_error = a.rotation - b.rotation - joint.fixed_rotation;
    let j = (a.angular_velocity - b.angular_velocity + params.rotational_gamma * angle_error) / inv_sum;
    joint.accumulated_rotational_impulse += j;
    apply_angular(a, b, j);
}

/// One-sided rotation limit on a revolute joint. Not warm started.
pub fn resolve_joint_limit(bodies: &mut [RigidBody], joint: &Joint, params: &SimParams) {
    if !joint.active || !joint.has_limits || joint.is_fixed {
        return;
    }
    let (a, b) = pair_mut(bodies, joint.body_a, joint.body_b);
    let inv_sum = a.inverse_inertia + b.inverse_inertia;
    if inv_sum <= 0.0 {
        return;
    }
    let relative = a.rotation - b.rotation;
    let relative_velocity = a.angular_velocity - b.angular_velocity;
    let j = if relative > joint.limit_max {
        let restoring = relative_velocity < 0.0;
        let bias = if restoring { 0.0 } else { params.rotational_gamma * (relative - joint.limit_max) };
        ((relative_velocity + bias) / inv_sum).max(0.0)
    } else if relative < joint.limit_min {
        let restoring = relative_velocity > 0.0;
        let bias = if restoring { 0.0 } else { params.rotational_gamma * (relative - joint.limit_min) };
        ((relative_velocity + bias) / inv_sum).min(0.0)
    } else {
        return;
    };
    apply_angular(a, b, j);
}

pub(crate) fn warm_start_joint(bodies: &mut [RigidBody], joint: &Joint) {
    let (a, b) = pair_mut(bodies, joint.body_a, joint.body_b);
    let (ra, rb) = joint_arms(a, b, joint);
    let (pa, pb) = (a.position + ra, b.position + rb);
    apply_pair(a, b, pa, pb, joint.accumulated_impulse);
    if joint.is_fixed {
        apply_angular(a, b, joint.accumulated_rotational_impulse);
    }
}

/// Pulls the two anchors together by `beta` of their separation.
pub(crate) fn correct_joint_position(bodies: &mut [RigidBody], joint: &Joint, params: &SimParams) {
    let (a, b) = pair_mut(bodies, joint.body_a, joint.body_b);
    let inv_sum = a.inverse_mass + b.inverse_mass;
    if inv_sum <= 0.0 {
        return;
    }
    let (ra, rb) = joint_arms(a, b, joint);
    let separation = (b.position + rb) - (a.position + ra);
    let shift = separation * (params.positional_beta / inv_sum);
    a.position += shift * a.inverse_mass;
    b.position -= shift * b.inverse_mass;
}

/// Motor torque impulse for one engine step. `action` is ignored (treated as
/// `+1`) for always-on motors.
pub fn apply_motor(bodies: &mut [RigidBody], joint: &Joint, action: f32, params: &SimParams) {
    if !joint.active || !joint.motor_on || joint.is_fixed {
        return;
    }
    let action = if joint.motor_always_on { 1.0 } else { action };
    let (a, b) = pair_mut(bodies, joint.body_a, joint.body_b);
    let excess = a.angular_velocity - b.angular_velocity - joint.motor_speed * action;
    let j = joint.motor_power * (excess * params.motor_rho).tanh();
    apply_angular(a, b, j);
}

/// Thruster force `power * action` over one step, at the thruster's anchor
/// along its world-space heading.
pub fn apply_thruster(bodies: &mut [RigidBody], thruster: &Thruster, action: f32, params: &SimParams) {
    if !thruster.active || action == 0.0 {
        return;
    }
    let body = &mut bodies[thruster.body];
    let point = body.world_point(thruster.anchor);
    let heading = Vec2::X.rotate(body.rotation + thruster.rotation);
    let impulse = heading * (thruster.power * action * params.dt);
    apply_impulse(body, point, impulse);
}
