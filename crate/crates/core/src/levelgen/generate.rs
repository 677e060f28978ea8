use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{overlap, validate, Level};
use crate::engine::{Joint, RigidBody, Role, SimState, Thruster, ARENA_SIZE, NUM_WALLS};
use crate::env::{advance, reset, Action, EnvParams, SizeClass, JOINT_COLOURS};
use crate::geometry::{PolygonShape, Shape, Vec2};

/// Sampling ranges and retry budgets of the generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub half_extent: (f32, f32),
    pub circle_radius: (f32, f32),
    pub density: (f32, f32),
    pub friction: (f32, f32),
    pub restitution: (f32, f32),
    /// Log-uniform.
    pub motor_power: (f32, f32),
    /// Log-uniform magnitude, random sign.
    pub motor_speed: (f32, f32),
    /// Log-uniform.
    pub thruster_power: (f32, f32),
    /// Upper bound on `power * rho * (1/I_a + 1/I_b)` for every motor. Above
    /// 2 the once-per-step motor impulse overshoots its target speed.
    pub motor_gain_limit: f32,
    pub triangle_prob: f32,
    pub joint_prob: f32,
    /// Used instead of `joint_prob` while the level has no joint yet.
    pub first_joint_prob: f32,
    pub fixed_joint_prob: f32,
    pub motor_prob: f32,
    pub always_on_prob: f32,
    pub limits_prob: f32,
    pub fixate_prob: f32,
    pub blue_fixate_prob: f32,
    pub red_prob: f32,
    pub placement_retries: usize,
    pub level_retries: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            half_extent: (0.1, 0.6),
            circle_radius: (0.1, 0.4),
            density: (0.5, 2.0),
            friction: (0.0, 1.0),
            restitution: (0.0, 0.8),
            motor_power: (0.02, 0.5),
            motor_speed: (1.0, 8.0),
            thruster_power: (1.0, 10.0),
            motor_gain_limit: 1.0,
            triangle_prob: 0.3,
            joint_prob: 0.5,
            first_joint_prob: 0.7,
            fixed_joint_prob: 0.2,
            motor_prob: 0.8,
            always_on_prob: 0.1,
            limits_prob: 0.2,
            fixate_prob: 0.15,
            blue_fixate_prob: 0.3,
            red_prob: 0.2,
            placement_retries: 30,
            level_retries: 64,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("no valid level for seed {seed} within {attempts} attempts")]
    Exhausted { seed: u64, attempts: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoopResult {
    Solved,
    NotSolved,
    /// The rollout hit a non-finite state; counts as not solved.
    Diverged,
}

impl NoopResult {
    pub fn is_solved(self) -> bool {
        self == NoopResult::Solved
    }
}

/// Rolls the level out for the full horizon with every motor and thruster off.
pub fn noop_filter(level: &Level, params: &EnvParams) -> NoopResult {
    let Ok(mut state) = reset(level, params) else {
        return NoopResult::Diverged;
    };
    let action = Action::noop(&level.state.capacities);
    loop {
        match advance(&mut state, &action, params) {
            Ok(info) if info.sparse_reward > 0.0 => return NoopResult::Solved,
            Ok(info) if info.done => return NoopResult::NotSolved,
            Ok(_) => {}
            Err(_) => return NoopResult::Diverged,
        }
    }
}

pub fn generate(seed: u64, size: SizeClass) -> Result<Level, GenError> {
    generate_with(seed, size, &GenConfig::default(), &EnvParams::new(size))
}

/// Builds a random level and rejects it until it is valid and not solved by
/// the no-op policy. Deterministic in `seed`.
pub fn generate_with(seed: u64, size: SizeClass, cfg: &GenConfig, params: &EnvParams) -> Result<Level, GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cfg.level_retries {
        let Some(mut state) = build(&mut rng, size, cfg) else { continue };
        limit_motor_power(&mut state, params.sim.motor_rho, cfg.motor_gain_limit);
        let level = Level::new(format!("gen-{size}-{seed}"), size, state);
        if validate(&level).is_ok() && noop_filter(&level, params) == NoopResult::NotSolved {
            return Ok(level);
        }
    }
    Err(GenError::Exhausted { seed, attempts: cfg.level_retries })
}

/// Clamps motor powers so that each motor's linearised gain stays within
/// `limit`.
pub fn limit_motor_power(state: &mut SimState, rho: f32, limit: f32) {
    for j in state.joints.iter_mut().filter(|j| j.active && j.motor_on) {
        let inv = state.bodies[j.body_a].inverse_inertia + state.bodies[j.body_b].inverse_inertia;
        if inv > 0.0 && rho > 0.0 {
            j.motor_power = j.motor_power.min(limit / (rho * inv));
        }
    }
}

pub(crate) fn uniform(rng: &mut impl Rng, (lo, hi): (f32, f32)) -> f32 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

fn log_uniform(rng: &mut impl Rng, (lo, hi): (f32, f32)) -> f32 {
    uniform(rng, (lo.ln(), hi.ln())).exp()
}

pub(crate) fn sample_body(rng: &mut impl Rng, circle: bool, cfg: &GenConfig) -> RigidBody {
    let density = uniform(rng, cfg.density);
    let body = if circle {
        RigidBody::circle(uniform(rng, cfg.circle_radius), Vec2::ZERO, density)
    } else if rng.random_bool(cfg.triangle_prob as f64) {
        loop {
            let (hx, hy) = (uniform(rng, cfg.half_extent), uniform(rng, cfg.half_extent));
            let pts: Vec<Vec2> = (0..3)
                .map(|k| {
                    let t = (k as f32 + rng.random_range(-0.3..0.3)) * std::f32::consts::TAU / 3.0;
                    Vec2::new(hx * t.cos(), hy * t.sin())
                })
                .collect();
            if let Ok((shape, _)) = PolygonShape::new(&pts) {
                if shape.area() > 0.01 {
                    break RigidBody::polygon(shape, Vec2::ZERO, density);
                }
            }
        }
    } else {
        let shape = PolygonShape::rectangle(uniform(rng, cfg.half_extent), uniform(rng, cfg.half_extent));
        RigidBody::polygon(shape, Vec2::ZERO, density)
    };
    body.with_rotation(rng.random_range(-std::f32::consts::PI..std::f32::consts::PI))
        .with_material(uniform(rng, cfg.friction), uniform(rng, cfg.restitution))
}

/// Random point well inside the body, in body-local coordinates.
fn interior_point(rng: &mut impl Rng, body: &RigidBody) -> Vec2 {
    match &body.shape {
        Shape::Circle(c) => {
            let angle = rng.random_range(0.0..std::f32::consts::TAU);
            Vec2::new(angle.cos(), angle.sin()) * (c.radius * rng.random_range(0.0..0.8f32))
        }
        Shape::Polygon(p) => {
            let v = p.vertices();
            let i = rng.random_range(0..v.len());
            v[i] * rng.random_range(0.0..0.8f32)
        }
    }
}

fn fits_arena(b: &RigidBody) -> bool {
    let r = b.shape.bounding_radius();
    (r..=ARENA_SIZE - r).contains(&b.position.x) && (r..=ARENA_SIZE - r).contains(&b.position.y)
}

/// Free of any contact with active bodies other than `except`.
fn clear_of(state: &SimState, b: &RigidBody, except: Option<usize>) -> bool {
    state
        .bodies
        .iter()
        .enumerate()
        .filter(|(i, o)| o.active && Some(*i) != except)
        .all(|(_, o)| overlap(o, b) == 0.0)
}

/// Adds a randomly placed (optionally jointed) shape, trying a bounded
/// number of placements. Returns the new body index.
pub(crate) fn add_random_shape(
    rng: &mut impl Rng,
    state: &mut SimState,
    circle: bool,
    jointed: bool,
    cfg: &GenConfig,
) -> Option<usize> {
    let parents: Vec<usize> = (NUM_WALLS..state.bodies.len()).filter(|&i| state.bodies[i].active).collect();
    let jointed = jointed && !parents.is_empty() && state.joints.iter().any(|j| !j.active);
    for _ in 0..cfg.placement_retries {
        let mut body = sample_body(rng, circle, cfg);
        if jointed {
            let parent = *parents.choose(rng).unwrap();
            let pb = state.bodies[parent];
            let anchor_a = interior_point(rng, &pb);
            let anchor_b = interior_point(rng, &body);
            body.position = pb.world_point(anchor_a) - anchor_b.rotate(body.rotation);
            if !fits_arena(&body) || !clear_of(state, &body, Some(parent)) {
                continue;
            }
            let index = state.add_body(body).ok()?;
            let joint = random_joint(rng, parent, index, anchor_a, anchor_b, &pb, &body, cfg);
            state.add_joint(joint).expect("free joint slot checked above");
            return Some(index);
        }
        let r = body.shape.bounding_radius();
        body.position = Vec2::new(rng.random_range(r..ARENA_SIZE - r), rng.random_range(r..ARENA_SIZE - r));
        if clear_of(state, &body, None) {
            return state.add_body(body).ok();
        }
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn random_joint(
    rng: &mut impl Rng,
    a: usize,
    b: usize,
    anchor_a: Vec2,
    anchor_b: Vec2,
    body_a: &RigidBody,
    body_b: &RigidBody,
    cfg: &GenConfig,
) -> Joint {
    let relative = body_a.rotation - body_b.rotation;
    let mut j = Joint::revolute(a, b, anchor_a, anchor_b);
    j.binding = rng.random_range(0..JOINT_COLOURS as u8);
    if rng.random_bool(cfg.fixed_joint_prob as f64) {
        return j.fixed(relative);
    }
    if rng.random_bool(cfg.motor_prob as f64) {
        let speed = log_uniform(rng, cfg.motor_speed) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        j = j.with_motor(log_uniform(rng, cfg.motor_power), speed);
        j.motor_always_on = rng.random_bool(cfg.always_on_prob as f64);
    }
    if rng.random_bool(cfg.limits_prob as f64) {
        let below = rng.random_range(0.1..std::f32::consts::PI);
        let above = rng.random_range(0.1..std::f32::consts::PI);
        j = j.with_limits(relative - below, relative + above);
    }
    j
}

fn add_random_thruster(rng: &mut impl Rng, state: &mut SimState, cfg: &GenConfig, prefer: Option<usize>) -> bool {
    let movable: Vec<usize> = (NUM_WALLS..state.bodies.len())
        .filter(|&i| state.bodies[i].active && !state.bodies[i].fixated)
        .collect();
    let Some(&body) = prefer.filter(|i| movable.contains(i)).as_ref().or_else(|| movable.choose(rng)) else {
        return false;
    };
    let anchor = interior_point(rng, &state.bodies[body]);
    let rotation = rng.random_range(-std::f32::consts::PI..std::f32::consts::PI);
    let mut t = Thruster::new(body, anchor, rotation, log_uniform(rng, cfg.thruster_power));
    t.binding = rng.random_range(0..2);
    state.add_thruster(t).is_ok()
}

fn build(rng: &mut impl Rng, size: SizeClass, cfg: &GenConfig) -> Option<SimState> {
    let caps = size.static_params();
    let mut state = SimState::new(caps);
    let n_poly = rng.random_range(1..=caps.num_polygons - NUM_WALLS);
    let n_circ = rng.random_range(0..=caps.num_circles);
    let mut kinds: Vec<bool> = std::iter::repeat_n(false, n_poly).chain(std::iter::repeat_n(true, n_circ)).collect();
    if kinds.len() < 2 {
        kinds.push(true);
    }
    kinds.shuffle(rng);

    for circle in kinds {
        let any_joint = state.joints.iter().any(|j| j.active);
        let p = if any_joint { cfg.joint_prob } else { cfg.first_joint_prob };
        let jointed = rng.random_bool(p as f64);
        add_random_shape(rng, &mut state, circle, jointed, cfg);
    }
    let shapes: Vec<usize> = (NUM_WALLS..state.bodies.len()).filter(|&i| state.bodies[i].active).collect();
    if shapes.len() < 2 {
        return None;
    }

    let green = *shapes.choose(rng).unwrap();
    let blues: Vec<usize> = shapes.iter().copied().filter(|&i| i != green && !state.jointed(i, green)).collect();
    let blue = *blues.choose(rng)?;
    state.bodies[green].role = Role::Green;
    state.bodies[blue].role = Role::Blue;
    for &i in &shapes {
        let b = &mut state.bodies[i];
        let p = match b.role {
            Role::Green => 0.0,
            Role::Blue => cfg.blue_fixate_prob,
            _ => cfg.fixate_prob,
        };
        if rng.random_bool(p as f64) {
            b.set_fixated(true);
        }
        if b.role == Role::None && rng.random_bool(cfg.red_prob as f64) {
            b.role = Role::Red;
        }
    }

    for _ in 0..rng.random_range(0..=caps.num_thrusters) {
        add_random_thruster(rng, &mut state, cfg, None);
    }
    let controllable = state.joints.iter().any(|j| j.is_controllable()) || state.thrusters.iter().any(|t| t.active);
    if !controllable {
        let revolute = state.joints.iter().position(|j| j.active && !j.is_fixed);
        match revolute {
            Some(k) => {
                let speed = log_uniform(rng, cfg.motor_speed);
                let power = log_uniform(rng, cfg.motor_power);
                let j = &mut state.joints[k];
                j.motor_on = true;
                j.motor_power = power;
                j.motor_speed = speed;
            }
            None => {
                if !add_random_thruster(rng, &mut state, cfg, Some(green)) {
                    return None;
                }
            }
        }
    }
    Some(state)
}
