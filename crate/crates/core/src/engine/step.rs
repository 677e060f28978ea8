use super::collision::{circle_circle, polygon_circle, polygon_polygon, WorldPolygon};
use super::solver::{
    apply_motor, apply_thruster, can_respond, contact_impulse, correct_collision_position,
    correct_joint_position, init_restitution_target, pair_mut, resolve_fixed_rotation,
    resolve_joint_limit, resolve_revolute_position, warm_start_collision, warm_start_joint,
};
use super::{CollisionManifold, SimError, SimParams, SimState};
use crate::geometry::{Shape, Vec2};

/// Advances `state` by one engine step of `params.dt`.
///
/// `motor_actions` and `thruster_actions` must match the joint and thruster
/// capacities; entries for inactive slots are ignored.
pub fn step(
    state: &mut SimState,
    motor_actions: &[f32],
    thruster_actions: &[f32],
    params: &SimParams,
) -> Result<(), SimError> {
    if motor_actions.len() != state.joints.len() {
        return Err(SimError::ActionLength { expected: state.joints.len(), got: motor_actions.len() });
    }
    if thruster_actions.len() != state.thrusters.len() {
        return Err(SimError::ActionLength {
            expected: state.thrusters.len(),
            got: thruster_actions.len(),
        });
    }

    let dt = params.dt;
    for body in state.bodies.iter_mut().filter(|b| b.active && !b.fixated) {
        body.velocity += params.gravity * dt;
    }

    let contacts = compute_manifolds(state, params);

    for (joint, &action) in state.joints.iter().zip(motor_actions) {
        apply_motor(&mut state.bodies, joint, action, params);
    }
    for (thruster, &action) in state.thrusters.iter().zip(thruster_actions) {
        apply_thruster(&mut state.bodies, thruster, action, params);
    }

    for joint in state.joints.iter_mut() {
        if !joint.active || !params.warm_starting {
            joint.accumulated_impulse = Vec2::ZERO;
            joint.accumulated_rotational_impulse = 0.0;
        }
    }
    if params.warm_starting {
        for &i in &contacts.active {
            warm_start_collision(&mut state.bodies, &state.manifolds[i]);
        }
        for joint in state.joints.iter().filter(|j| j.active) {
            warm_start_joint(&mut state.bodies, joint);
        }
    }

    let batches = contacts.batches(state.manifolds.len(), params.solver_batch_size);
    let mut pending: Vec<(usize, Vec2)> = Vec::with_capacity(params.solver_batch_size);
    for _ in 0..params.num_solver_steps {
        for joint in state.joints.iter_mut().filter(|j| j.active) {
            resolve_revolute_position(&mut state.bodies, joint, params);
            if joint.is_fixed {
                resolve_fixed_rotation(&mut state.bodies, joint, params);
            } else {
                resolve_joint_limit(&mut state.bodies, joint, params);
            }
        }
        for batch in &batches {
            // Every impulse in a batch sees the velocities from batch start.
            pending.clear();
            for &i in batch {
                let m = &mut state.manifolds[i];
                let impulse = contact_impulse(&state.bodies[m.body_a], &state.bodies[m.body_b], m, params);
                pending.push((i, impulse));
            }
            for &(i, impulse) in &pending {
                let m = &state.manifolds[i];
                let (a, b) = pair_mut(&mut state.bodies, m.body_a, m.body_b);
                super::apply_impulse(a, m.position, -impulse);
                super::apply_impulse(b, m.position, impulse);
            }
        }
    }

    for &(i, weight) in &contacts.weighted {
        correct_collision_position(&mut state.bodies, &state.manifolds[i], weight, params);
    }
    for joint in state.joints.iter().filter(|j| j.active) {
        correct_joint_position(&mut state.bodies, joint, params);
    }

    for body in state.bodies.iter_mut().filter(|b| b.active && !b.fixated) {
        body.position += body.velocity * dt;
        body.rotation += body.angular_velocity * dt;
    }

    check_finite(state)
}

/// Active, solvable manifolds of this step.
struct ContactSet {
    active: Vec<usize>,
    /// Manifold index with its share of the pair's positional correction.
    weighted: Vec<(usize, f32)>,
}

impl ContactSet {
    /// Spreads active manifolds round-robin over as many batches as the
    /// slot count allows; empty batches are dropped.
    fn batches(&self, num_slots: usize, batch_size: usize) -> Vec<Vec<usize>> {
        let num_batches = num_slots.div_ceil(batch_size).max(1).min(self.active.len().max(1));
        let mut batches = vec![Vec::new(); num_batches];
        for (k, &i) in self.active.iter().enumerate() {
            batches[k % num_batches].push(i);
        }
        batches.retain(|b| !b.is_empty());
        batches
    }
}

/// Regenerates every manifold slot, carrying accumulated impulses over only
/// where the slot was already in contact on the previous step.
fn compute_manifolds(state: &mut SimState, params: &SimParams) -> ContactSet {
    let bodies = &state.bodies;
    let world: Vec<Option<WorldPolygon>> = bodies
        .iter()
        .map(|b| (b.active && !b.is_circle()).then(|| WorldPolygon::from_body(b)))
        .collect();
    let radii: Vec<f32> = bodies.iter().map(|b| b.shape.bounding_radius()).collect();

    let mut set = ContactSet { active: Vec::new(), weighted: Vec::new() };
    let slots: Vec<_> = state.pair_slots().collect();
    for slot in slots {
        let (ia, ib) = (slot.a, slot.b);
        let (a, b) = (&state.bodies[ia], &state.bodies[ib]);
        let mut fresh = [CollisionManifold::default(); 2];
        let reach = radii[ia] + radii[ib];
        let live = a.active
            && b.active
            && (a.position - b.position).length_squared() < reach * reach
            && !state.joints.iter().any(|j| j.active && j.connects(ia, ib));
        if live {
            match (&a.shape, &b.shape) {
                (Shape::Polygon(_), Shape::Polygon(_)) => {
                    fresh = polygon_polygon(world[ia].as_ref().unwrap(), world[ib].as_ref().unwrap());
                }
                (Shape::Polygon(_), Shape::Circle(c)) => {
                    fresh[0] = polygon_circle(world[ia].as_ref().unwrap(), b.position, c.radius);
                }
                (Shape::Circle(ca), Shape::Circle(cb)) => {
                    fresh[0] = circle_circle(a.position, ca.radius, b.position, cb.radius);
                }
                (Shape::Circle(_), Shape::Polygon(_)) => unreachable!("polygons precede circles"),
            }
        }
        let solvable = can_respond(a, b);
        let start = set.active.len();
        for (k, &new) in fresh.iter().enumerate().take(slot.count) {
            let index = slot.first + k;
            let old = state.manifolds[index];
            let mut m = new;
            m.body_a = ia;
            m.body_b = ib;
            if m.active {
                if params.warm_starting && old.active {
                    m.accumulated_normal_impulse = old.accumulated_normal_impulse;
                    m.accumulated_tangent_impulse = old.accumulated_tangent_impulse;
                }
                init_restitution_target(a, b, &mut m, params);
                if solvable {
                    set.active.push(index);
                }
            } else {
                m = CollisionManifold { body_a: ia, body_b: ib, ..CollisionManifold::default() };
            }
            state.manifolds[index] = m;
        }
        let n = set.active.len() - start;
        for &i in &set.active[start..] {
            set.weighted.push((i, 1.0 / n as f32));
        }
    }
    set
}

fn check_finite(state: &SimState) -> Result<(), SimError> {
    for (i, b) in state.bodies.iter().enumerate().filter(|(_, b)| b.active) {
        let finite = b.position.is_finite()
            && b.velocity.is_finite()
            && b.rotation.is_finite()
            && b.angular_velocity.is_finite();
        if !finite {
            return Err(SimError::Diverged { body: i });
        }
    }
    Ok(())
}
