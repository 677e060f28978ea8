use std::hash::Hasher;

use fnv::FnvHasher;

use super::{CollisionManifold, Joint, RigidBody, SimState, Thruster};
use crate::geometry::{Shape, Vec2};

/// Canonical little-endian byte stream over active entities.
struct Canonical(FnvHasher);

impl Canonical {
    fn f32(&mut self, v: f32) {
        self.0.write(&v.to_le_bytes());
    }
    fn vec2(&mut self, v: Vec2) {
        self.f32(v.x);
        self.f32(v.y);
    }
    fn u64(&mut self, v: u64) {
        self.0.write(&v.to_le_bytes());
    }
    fn flag(&mut self, v: bool) {
        self.0.write(&[v as u8]);
    }

    fn body(&mut self, b: &RigidBody) {
        match &b.shape {
            Shape::Circle(c) => {
                self.0.write(&[0]);
                self.f32(c.radius);
            }
            Shape::Polygon(p) => {
                self.0.write(&[1, p.vertex_count]);
                for &v in p.vertices() {
                    self.vec2(v);
                }
            }
        }
        self.vec2(b.position);
        self.f32(b.rotation);
        self.vec2(b.velocity);
        self.f32(b.angular_velocity);
        self.f32(b.inverse_mass);
        self.f32(b.inverse_inertia);
        self.f32(b.density);
        self.f32(b.friction);
        self.f32(b.restitution);
        self.0.write(&[b.role as u8]);
        self.flag(b.fixated);
    }

    fn joint(&mut self, j: &Joint) {
        self.u64(j.body_a as u64);
        self.u64(j.body_b as u64);
        self.vec2(j.anchor_a);
        self.vec2(j.anchor_b);
        self.flag(j.is_fixed);
        self.f32(j.fixed_rotation);
        self.flag(j.motor_on);
        self.f32(j.motor_power);
        self.f32(j.motor_speed);
        self.flag(j.motor_always_on);
        self.flag(j.has_limits);
        self.f32(j.limit_min);
        self.f32(j.limit_max);
        self.vec2(j.accumulated_impulse);
        self.f32(j.accumulated_rotational_impulse);
        self.0.write(&[j.binding]);
    }

    fn thruster(&mut self, t: &Thruster) {
        self.u64(t.body as u64);
        self.vec2(t.anchor);
        self.f32(t.rotation);
        self.f32(t.power);
        self.0.write(&[t.binding]);
    }

    fn manifold(&mut self, m: &CollisionManifold) {
        self.vec2(m.position);
        self.vec2(m.normal);
        self.f32(m.penetration);
        self.u64(m.body_a as u64);
        self.u64(m.body_b as u64);
        self.f32(m.restitution_velocity_target);
        self.f32(m.accumulated_normal_impulse);
        self.f32(m.accumulated_tangent_impulse);
    }
}

impl SimState {
    /// 64-bit FNV-1a digest of every active field, including the contact cache.
    pub fn state_hash(&self) -> u64 {
        let mut h = self.entity_hasher();
        for (i, m) in self.manifolds.iter().enumerate().filter(|(_, m)| m.active) {
            h.u64(i as u64);
            h.manifold(m);
        }
        h.0.finish()
    }

    /// Digest of active bodies, joints and thrusters only.
    pub fn entity_hash(&self) -> u64 {
        self.entity_hasher().0.finish()
    }

    fn entity_hasher(&self) -> Canonical {
        let mut h = Canonical(FnvHasher::default());
        let c = &self.capacities;
        for v in [c.num_polygons, c.num_circles, c.num_joints, c.num_thrusters] {
            h.u64(v as u64);
        }
        for (i, b) in self.bodies.iter().enumerate().filter(|(_, b)| b.active) {
            h.u64(i as u64);
            h.body(b);
        }
        for (i, j) in self.joints.iter().enumerate().filter(|(_, j)| j.active) {
            h.u64(i as u64);
            h.joint(j);
        }
        for (i, t) in self.thrusters.iter().enumerate().filter(|(_, t)| t.active) {
            h.u64(i as u64);
            h.thruster(t);
        }
        h
    }
}
