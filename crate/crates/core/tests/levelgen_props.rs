use impulse2d::engine::{Role, NUM_WALLS};
use impulse2d::env::{EnvParams, SizeClass};
use impulse2d::geometry::Vec2;
use impulse2d::levelgen::*;
use proptest::prelude::*;

fn size_of(k: u8) -> SizeClass {
    SizeClass::ALL[k as usize % 3]
}

fn counts(level: &Level) -> (usize, usize, usize) {
    let s = &level.state;
    (
        s.bodies.iter().filter(|b| b.active).count(),
        s.joints.iter().filter(|j| j.active).count(),
        s.thrusters.iter().filter(|t| t.active).count(),
    )
}

fn finite_f32() -> impl Strategy<Value = f32> {
    prop::num::f32::NORMAL | prop::num::f32::SUBNORMAL | prop::num::f32::ZERO
}

#[test]
fn generated_levels_round_trip_exactly() {
    for size in SizeClass::ALL {
        for seed in 0..334 {
            let level = generate(seed, size).unwrap();
            let text = serialize(&level);
            let back = deserialize(text.as_bytes()).unwrap();
            assert_eq!(back, level, "{size} seed {seed}");
            assert_eq!(serialize(&back), text);
        }
    }
}

#[test]
fn removal_never_touches_goal_shapes() {
    let mut removed = 0;
    for seed in 0..200 {
        let level = generate(seed, SizeClass::ALL[seed as usize % 3]).unwrap();
        for mseed in 0..5 {
            let Ok(m) = mutate(&level, mseed, MutationKind::RemoveShape) else { continue };
            let role = level.state.bodies[m.body].role;
            assert!(role != Role::Green && role != Role::Blue);
            validate(&m.level).unwrap();
            removed += 1;
        }
    }
    assert!(removed >= 500, "only {removed} removals succeeded");
}

#[test]
fn generated_motors_respect_the_gain_limit() {
    let cfg = GenConfig::default();
    for size in SizeClass::ALL {
        let rho = EnvParams::new(size).sim.motor_rho;
        for seed in 0..100 {
            let level = generate(seed, size).unwrap();
            let s = &level.state;
            for j in s.joints.iter().filter(|j| j.active && j.motor_on) {
                let inv = s.bodies[j.body_a].inverse_inertia + s.bodies[j.body_b].inverse_inertia;
                assert!(j.motor_power * rho * inv <= cfg.motor_gain_limit * (1.0 + 1e-5));
                assert!(j.motor_power > 0.0);
            }
        }
    }
}

#[test]
fn goal_shapes_are_never_directly_jointed() {
    for size in SizeClass::ALL {
        for seed in 0..100 {
            let level = generate(seed, size).unwrap();
            let s = &level.state;
            let find = |role| s.bodies.iter().position(|b| b.active && b.role == role).unwrap();
            assert!(!s.jointed(find(Role::Green), find(Role::Blue)));
            assert!(!s.bodies[find(Role::Green)].fixated);
        }
    }
}

#[test]
fn malformed_documents_report_format_errors() {
    for doc in ["", "{", "[]", r#"{"format":"impulse2d-level"}"#] {
        let err = deserialize(doc.as_bytes()).unwrap_err();
        assert_eq!(err.code(), "format", "{doc:?}: {err}");
    }
    let mut level = generate(0, SizeClass::S).unwrap();
    level.state.bodies[NUM_WALLS..].iter_mut().filter(|b| b.active).for_each(|b| b.role = Role::Red);
    let text = serialize(&level);
    assert!(matches!(deserialize(text.as_bytes()), Err(LevelError::GreenCount(0))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn float_fields_round_trip_bit_exactly(
        seed in 0u64..10_000,
        size in 0u8..3,
        vx in finite_f32(),
        vy in finite_f32(),
        omega in finite_f32(),
        friction in 0.0f32..10.0,
        restitution in 0.0f32..=1.0,
    ) {
        let mut level = generate(seed, size_of(size)).unwrap();
        let i = (NUM_WALLS..level.state.bodies.len()).find(|&i| level.state.bodies[i].active && !level.state.bodies[i].fixated).unwrap();
        let b = &mut level.state.bodies[i];
        b.velocity = Vec2::new(vx, vy);
        b.angular_velocity = omega;
        b.friction = friction;
        b.restitution = restitution;
        let back = deserialize(serialize(&level).as_bytes()).unwrap();
        let c = &back.state.bodies[i];
        prop_assert_eq!(c.velocity.x.to_bits(), vx.to_bits());
        prop_assert_eq!(c.velocity.y.to_bits(), vy.to_bits());
        prop_assert_eq!(c.angular_velocity.to_bits(), omega.to_bits());
        prop_assert_eq!(c.friction.to_bits(), friction.to_bits());
        prop_assert_eq!(c.restitution.to_bits(), restitution.to_bits());
        prop_assert_eq!(back.hash(), level.hash());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mutations_keep_the_level_contract(seed in 0u64..10_000, size in 0u8..3, mseed in any::<u64>(), kind in 0u8..3) {
        let level = generate(seed, size_of(size)).unwrap();
        let kind = [MutationKind::AddShape, MutationKind::RemoveShape, MutationKind::EditShape][kind as usize];
        let m = match mutate(&level, mseed, kind) {
            Ok(m) => m,
            Err(MutateError::NoCapacity | MutateError::NothingToRemove) => return Ok(()),
            Err(MutateError::Exhausted(MutationKind::RemoveShape)) => {
                // Only acceptable when no single removal yields a valid, unsolved level.
                let params = EnvParams::new(level.size_class);
                for i in NUM_WALLS..level.state.bodies.len() {
                    let b = &level.state.bodies[i];
                    if b.active && b.role != Role::Green && b.role != Role::Blue {
                        let candidate = remove_shape(&level, i);
                        prop_assert!(validate(&candidate).is_err() || noop_filter(&candidate, &params) != NoopResult::NotSolved);
                    }
                }
                return Ok(());
            }
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        prop_assert!(validate(&m.level).is_ok());
        let params = EnvParams::new(level.size_class);
        prop_assert_eq!(noop_filter(&m.level, &params), NoopResult::NotSolved);
        prop_assert_eq!(m.level.state.capacities, level.state.capacities);

        let (bodies, _, _) = counts(&level);
        let (after, _, _) = counts(&m.level);
        let roles = |l: &Level, r: Role| l.state.bodies.iter().filter(|b| b.active && b.role == r).count();
        prop_assert_eq!(roles(&m.level, Role::Green), 1);
        prop_assert_eq!(roles(&m.level, Role::Blue), 1);
        match kind {
            MutationKind::AddShape => {
                prop_assert_eq!(after, bodies + 1);
                prop_assert!(m.level.state.bodies[m.body].active);
            }
            MutationKind::RemoveShape => {
                prop_assert_eq!(after, bodies - 1);
                let removed = &level.state.bodies[m.body];
                prop_assert!(removed.role != Role::Green && removed.role != Role::Blue);
                prop_assert!(!m.level.state.bodies[m.body].active);
            }
            MutationKind::EditShape => prop_assert_eq!(counts(&m.level), counts(&level)),
        }
    }
}
