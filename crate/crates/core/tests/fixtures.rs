use std::fs;
use std::path::PathBuf;

use impulse2d::env::{advance, reset, Action, EnvParams, SizeClass};
use impulse2d::levelgen::{deserialize, noop_filter, serialize, GenConfig, NoopResult};

fn level_dir(size: SizeClass) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../levels").join(size.name())
}

#[test]
fn bundled_levels_load_and_are_not_trivially_solved() {
    let mut failures = Vec::new();
    for size in SizeClass::ALL {
        let mut paths: Vec<_> = fs::read_dir(level_dir(size)).unwrap().map(|e| e.unwrap().path()).collect();
        paths.sort();
        assert!(paths.len() >= 10, "{size}: only {} levels", paths.len());
        for path in paths {
            let bytes = fs::read(&path).unwrap();
            let level = match deserialize(&bytes) {
                Ok(l) => l,
                Err(e) => {
                    failures.push(format!("{}: {e}", path.display()));
                    continue;
                }
            };
            assert_eq!(level.size_class, size, "{}", path.display());
            assert_eq!(path.file_stem().unwrap().to_str().unwrap(), level.name);
            let again = deserialize(serialize(&level).as_bytes()).unwrap();
            assert_eq!(again.hash(), level.hash());
            let params = EnvParams::new(size);
            for j in level.state.joints.iter().filter(|j| j.active && j.motor_on) {
                let inv = level.state.bodies[j.body_a].inverse_inertia + level.state.bodies[j.body_b].inverse_inertia;
                let gain = j.motor_power * params.sim.motor_rho * inv;
                assert!(gain <= GenConfig::default().motor_gain_limit + 1e-3, "{}: motor gain {gain}", path.display());
            }
            let outcome = noop_filter(&level, &params);
            if outcome != NoopResult::NotSolved {
                failures.push(format!("{}: no-op policy gives {outcome:?}", path.display()));
            }
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

fn load(size: SizeClass, name: &str) -> impulse2d::levelgen::Level {
    deserialize(&fs::read(level_dir(size).join(format!("{name}.json"))).unwrap()).unwrap()
}

fn run_constant(level: &impulse2d::levelgen::Level, motor: f32, thruster: f32) -> f32 {
    let params = EnvParams::new(level.size_class);
    let mut state = reset(level, &params).unwrap();
    let caps = level.state.capacities;
    let action = Action { motors: vec![motor; caps.num_joints], thrusters: vec![thruster; caps.num_thrusters] };
    loop {
        let info = advance(&mut state, &action, &params).unwrap();
        if info.done {
            return info.sparse_reward;
        }
    }
}

#[test]
fn constant_controls_solve_simple_levels() {
    assert_eq!(run_constant(&load(SizeClass::S, "s01_slide_right"), 0.0, 1.0), 1.0);
    assert_eq!(run_constant(&load(SizeClass::M, "m01_car"), 1.0, 0.0), 1.0);
    assert_eq!(run_constant(&load(SizeClass::M, "m01_car"), -1.0, 0.0), 0.0);
}
