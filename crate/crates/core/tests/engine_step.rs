mod common;

use common::{random_scene, MEDIUM};
use impulse2d::engine::{step, Joint, RigidBody, SimParams, SimState, NUM_WALLS};
use impulse2d::geometry::Vec2;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn idle(s: &SimState) -> (Vec<f32>, Vec<f32>) {
    (vec![0.0; s.joints.len()], vec![0.0; s.thrusters.len()])
}

fn run(s: &mut SimState, steps: usize, params: &SimParams) {
    let (m, t) = idle(s);
    for _ in 0..steps {
        step(s, &m, &t, params).unwrap();
    }
}

fn mechanical_energy(s: &SimState, g: f32) -> f64 {
    let potential: f64 = s
        .bodies
        .iter()
        .filter(|b| b.active && !b.fixated)
        .map(|b| (g * b.position.y / b.inverse_mass) as f64)
        .sum();
    s.kinetic_energy() as f64 + potential
}

#[test]
fn hanging_chain_does_not_gain_energy() {
    use impulse2d::engine::StaticSimParams;
    use impulse2d::geometry::PolygonShape;

    let caps = StaticSimParams { num_polygons: 9, num_circles: 1, num_joints: 4, num_thrusters: 1 };
    let mut s = SimState::new(caps);
    let hub = RigidBody::polygon(PolygonShape::rectangle(0.1, 0.1), Vec2::new(1.5, 4.0), 1.0).with_fixated(true);
    let mut prev = s.add_body(hub).unwrap();
    let mut anchor = Vec2::ZERO;
    for k in 0..3 {
        let link = RigidBody::polygon(PolygonShape::rectangle(0.25, 0.05), Vec2::new(1.75 + 0.5 * k as f32, 4.0), 1.0);
        let id = s.add_body(link).unwrap();
        s.add_joint(Joint::revolute(prev, id, anchor, Vec2::new(-0.25, 0.0))).unwrap();
        prev = id;
        anchor = Vec2::new(0.25, 0.0);
    }
    let params = SimParams::default();
    let e0 = mechanical_energy(&s, 9.8);
    let (m, t) = idle(&s);
    for _ in 0..1000 {
        step(&mut s, &m, &t, &params).unwrap();
        assert!(mechanical_energy(&s, 9.8) <= e0 + 1e-3);
    }
    assert!(s.active_manifolds().all(|m| s.bodies[m.body_a].fixated && s.bodies[m.body_b].fixated));
}

#[test]
fn empty_scene_is_unchanged() {
    let mut s = SimState::new(MEDIUM);
    let before = s.clone();
    step(&mut s, &[1.0, -1.0], &[1.0, 1.0], &SimParams::default()).unwrap();
    assert_eq!(s.bodies, before.bodies);
    assert_eq!(s.joints, before.joints);
    assert_eq!(s.thrusters, before.thrusters);
}

#[test]
fn free_fall_follows_euler_recurrence() {
    let mut s = SimState::new(MEDIUM);
    let i = s.add_body(RigidBody::circle(0.2, Vec2::new(2.5, 4.5), 1.0)).unwrap();
    let p = SimParams::default();
    let (mut y, mut vy) = (4.5f32, 0.0f32);
    for _ in 0..45 {
        step(&mut s, &[0.0; 2], &[0.0; 2], &p).unwrap();
        vy += -9.8 * p.dt;
        y += vy * p.dt;
        assert_eq!(s.bodies[i].velocity.y, vy);
        assert_eq!(s.bodies[i].position.y, y);
        assert_eq!(s.bodies[i].position.x, 2.5);
    }
}

#[test]
fn wrong_action_length_is_rejected() {
    let mut s = SimState::new(MEDIUM);
    assert!(step(&mut s, &[0.0], &[0.0; 2], &SimParams::default()).is_err());
}

#[test]
fn batch_size_one_and_large_both_settle() {
    for batch in [1, 16, 1000] {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = random_scene(&mut rng, 0.8, 4.2, 1.0, true);
        let p = SimParams { solver_batch_size: batch, ..SimParams::default() };
        run(&mut s, 300, &p);
        assert!(s.active_manifolds().all(|m| m.penetration < 0.05 || (m.body_a < NUM_WALLS && m.body_b < NUM_WALLS)));
    }
}

#[test]
fn divergence_is_reported() {
    let mut s = SimState::new(MEDIUM);
    let i = s.add_body(RigidBody::circle(0.2, Vec2::new(2.5, 2.5), 1.0)).unwrap();
    s.bodies[i].velocity = Vec2::new(f32::NAN, 0.0);
    assert!(step(&mut s, &[0.0; 2], &[0.0; 2], &SimParams::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn stepping_is_deterministic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s0 = common::with_thruster(random_scene(&mut rng, 0.5, 4.5, 2.0, true), 5);
        let mut a = s0.clone();
        let mut b = s0;
        let p = SimParams::default();
        for k in 0..120 {
            let m = [(k as f32 * 0.1).sin(), 0.0];
            let t = [1.0, 0.0];
            step(&mut a, &m, &t, &p).unwrap();
            step(&mut b, &m, &t, &p).unwrap();
        }
        prop_assert_eq!(a.state_hash(), b.state_hash());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn masked_body_matches_absent_body(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = random_scene(&mut rng, 1.8, 3.2, 0.3, false);
        let mut with = base.clone();
        // A distant circle that never touches anything, then masked out.
        let Ok(extra) = with.add_body(RigidBody::circle(0.1, Vec2::new(0.3, 4.7), 1.0)) else {
            return Ok(());
        };
        with.bodies[extra].active = false;
        let mut without = base;
        let p = SimParams { gravity: Vec2::ZERO, ..SimParams::default() };
        run(&mut with, 60, &p);
        run(&mut without, 60, &p);
        prop_assert_eq!(with.entity_hash(), without.entity_hash());
    }

    #[test]
    fn momentum_is_conserved_without_external_forces(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = random_scene(&mut rng, 1.6, 3.4, 0.5, true);
        let p = SimParams { gravity: Vec2::ZERO, ..SimParams::default() };
        let (m, t) = idle(&s);
        for _ in 0..100 {
            let before = s.total_momentum();
            step(&mut s, &m, &t, &p).unwrap();
            let touched_wall = s.active_manifolds().any(|c| c.body_a < NUM_WALLS && c.body_b >= NUM_WALLS);
            prop_assume!(!touched_wall);
            let after = s.total_momentum();
            let scale = s.bodies.iter().filter(|b| b.active && !b.fixated)
                .map(|b| b.mass() * b.velocity.length()).sum::<f32>().max(1e-3);
            prop_assert!((after - before).length() / scale < 1e-4);
        }
    }

    #[test]
    fn frictionless_collision_does_not_gain_energy(
        e in 0.0f32..=1.0, speed in 0.1f32..4.0, offset in -0.3f32..0.3, ra in 0.1f32..0.4, rb in 0.1f32..0.4,
    ) {
        let mut s = SimState::new(MEDIUM);
        let gap = ra + rb - 0.01;
        s.add_body(RigidBody::circle(ra, Vec2::new(2.5 - gap * 0.5, 2.5), 1.0)
            .with_material(0.0, e).with_velocity(Vec2::new(speed, 0.0), 0.0)).unwrap();
        s.add_body(RigidBody::circle(rb, Vec2::new(2.5 + gap * 0.5, 2.5 + offset * 0.1), 1.3)
            .with_material(0.0, e).with_velocity(Vec2::new(-speed, 0.0), 0.0)).unwrap();
        let p = SimParams { gravity: Vec2::ZERO, velocity_bias_alpha: 0.0, ..SimParams::default() };
        let before = s.kinetic_energy();
        step(&mut s, &[0.0; 2], &[0.0; 2], &p).unwrap();
        prop_assert!(s.kinetic_energy() <= before * (1.0 + 1e-4));
    }

    #[test]
    fn inactive_slots_carry_no_impulse(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = random_scene(&mut rng, 0.5, 4.5, 3.0, true);
        let p = SimParams::default();
        let (m, t) = idle(&s);
        for _ in 0..150 {
            step(&mut s, &m, &t, &p).unwrap();
            for c in s.manifolds.iter().filter(|c| !c.active) {
                prop_assert_eq!(c.accumulated_normal_impulse, 0.0);
                prop_assert_eq!(c.accumulated_tangent_impulse, 0.0);
            }
        }
    }

    #[test]
    fn active_manifolds_have_unit_normals(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = random_scene(&mut rng, 0.5, 4.5, 3.0, false);
        let p = SimParams::default();
        let (m, t) = idle(&s);
        for _ in 0..100 {
            step(&mut s, &m, &t, &p).unwrap();
            for c in s.active_manifolds() {
                prop_assert!(c.penetration > 0.0);
                prop_assert!((c.normal.length() - 1.0).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn fixated_bodies_never_move(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = random_scene(&mut rng, 0.5, 4.5, 3.0, false);
        s.bodies[4].set_fixated(true);
        s.add_joint(Joint::revolute(4, 5, Vec2::new(0.1, 0.0), Vec2::ZERO).with_motor(3.0, 5.0)).unwrap();
        s = common::with_thruster(s, 4);
        let fixed: Vec<RigidBody> = s.bodies.iter().filter(|b| b.fixated).copied().collect();
        let p = SimParams::default();
        for _ in 0..150 {
            step(&mut s, &[1.0, 0.0], &[1.0, 0.0], &p).unwrap();
        }
        let after: Vec<RigidBody> = s.bodies.iter().filter(|b| b.fixated).copied().collect();
        prop_assert_eq!(fixed, after);
    }
}
