//! Control-task semantics on top of the engine: actions, reward, termination
//! and the three observation encodings.

mod observe;
mod render;

pub use observe::{
    flat_len, observe_entity, observe_flat, EntityObservation, JointRow, JOINT_COLOURS, JOINT_FEATURES,
    SHAPE_FEATURES, THRUSTER_FEATURES,
};
pub use render::{render_pixels, Raster, RASTER_SIZE};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{step, Role, SimError, SimParams, SimState, StaticSimParams};
use crate::levelgen::{validate, Level, LevelError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SizeClass {
    S,
    M,
    L,
}

impl SizeClass {
    pub const ALL: [SizeClass; 3] = [SizeClass::S, SizeClass::M, SizeClass::L];

    /// Arena capacities, walls included.
    pub fn static_params(self) -> StaticSimParams {
        let (p, c, j, t) = match self {
            SizeClass::S => (5, 2, 1, 1),
            SizeClass::M => (6, 3, 2, 2),
            SizeClass::L => (12, 4, 6, 2),
        };
        StaticSimParams {
            num_polygons: p + crate::engine::NUM_WALLS,
            num_circles: c,
            num_joints: j,
            num_thrusters: t,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SizeClass::S => "S",
            SizeClass::M => "M",
            SizeClass::L => "L",
        }
    }
}

impl std::str::FromStr for SizeClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "S" | "s" => Ok(SizeClass::S),
            "M" | "m" => Ok(SizeClass::M),
            "L" | "l" => Ok(SizeClass::L),
            other => Err(format!("unknown size class {other:?} (expected S, M or L)")),
        }
    }
}

impl std::fmt::Display for SizeClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionMode {
    MultiDiscrete,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationMode {
    Entity,
    Flat,
    Pixels,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvParams {
    pub size_class: SizeClass,
    /// Engine steps per environment step.
    pub frame_skip: usize,
    pub dense_reward_kappa: f32,
    pub horizon: usize,
    pub action_mode: ActionMode,
    pub observation_mode: ObservationMode,
    pub sim: SimParams,
}

impl EnvParams {
    pub fn new(size_class: SizeClass) -> Self {
        Self {
            size_class,
            frame_skip: 2,
            dense_reward_kappa: 0.05,
            horizon: 256,
            action_mode: ActionMode::MultiDiscrete,
            observation_mode: ObservationMode::Flat,
            sim: SimParams::default(),
        }
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        if self.frame_skip == 0 || self.horizon == 0 || !(self.dense_reward_kappa >= 0.0) {
            return Err(EnvError::InvalidParams);
        }
        self.sim.validate().map_err(EnvError::Sim)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    pub sim: SimState,
    pub timestep: usize,
    pub terminated: bool,
    /// Distance between the green and blue centres.
    pub last_distance: f32,
    pub green: usize,
    pub blue: usize,
}

impl EnvState {
    pub fn distance(&self) -> f32 {
        (self.sim.bodies[self.green].position - self.sim.bodies[self.blue].position).length()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Action {
    pub motors: Vec<f32>,
    pub thrusters: Vec<f32>,
}

impl Action {
    pub fn noop(caps: &StaticSimParams) -> Self {
        Self { motors: vec![0.0; caps.num_joints], thrusters: vec![0.0; caps.num_thrusters] }
    }

    /// Checks lengths and that every value lies in the range allowed by `mode`.
    pub fn check(&self, caps: &StaticSimParams, mode: ActionMode) -> Result<(), EnvError> {
        if self.motors.len() != caps.num_joints || self.thrusters.len() != caps.num_thrusters {
            return Err(EnvError::ActionShape {
                motors: self.motors.len(),
                thrusters: self.thrusters.len(),
            });
        }
        let ok = match mode {
            ActionMode::Continuous => {
                self.motors.iter().all(|m| (-1.0..=1.0).contains(m))
                    && self.thrusters.iter().all(|t| (0.0..=1.0).contains(t))
            }
            ActionMode::MultiDiscrete => {
                self.motors.iter().all(|&m| m == -1.0 || m == 0.0 || m == 1.0)
                    && self.thrusters.iter().all(|&t| t == 0.0 || t == 1.0)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(EnvError::ActionOutOfRange)
        }
    }
}

/// Maps motor indices {0, 1, 2} to {−1, 0, +1} and thruster indices {0, 1}
/// to {0, 1}. Motor entries come first.
pub fn decode_multidiscrete(indices: &[u8], caps: &StaticSimParams) -> Result<Action, EnvError> {
    if indices.len() != caps.num_joints + caps.num_thrusters {
        return Err(EnvError::Decode(format!(
            "expected {} indices, got {}",
            caps.num_joints + caps.num_thrusters,
            indices.len()
        )));
    }
    let (m, t) = indices.split_at(caps.num_joints);
    let motors = m
        .iter()
        .map(|&i| match i {
            0 => Ok(-1.0),
            1 => Ok(0.0),
            2 => Ok(1.0),
            _ => Err(EnvError::Decode(format!("motor index {i} out of range"))),
        })
        .collect::<Result<_, _>>()?;
    let thrusters = t
        .iter()
        .map(|&i| match i {
            0 => Ok(0.0),
            1 => Ok(1.0),
            _ => Err(EnvError::Decode(format!("thruster index {i} out of range"))),
        })
        .collect::<Result<_, _>>()?;
    Ok(Action { motors, thrusters })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Observation {
    Entity(EntityObservation),
    Flat(Vec<f32>),
    Pixels(Raster),
}

pub fn observe(state: &EnvState, params: &EnvParams) -> Observation {
    match params.observation_mode {
        ObservationMode::Entity => Observation::Entity(observe_entity(state)),
        ObservationMode::Flat => Observation::Flat(observe_flat(state)),
        ObservationMode::Pixels => Observation::Pixels(render_pixels(state)),
    }
}

/// Result of one environment step, without the observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub reward: f32,
    /// +1 on green-blue contact, −1 on green-red contact, otherwise 0.
    pub sparse_reward: f32,
    pub dense_reward: f32,
    pub done: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub observation: Observation,
    pub info: StepInfo,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("invalid level: {0}")]
    InvalidLevel(#[from] LevelError),
    #[error("level is size {level}, environment expects {env}")]
    SizeMismatch { level: SizeClass, env: SizeClass },
    #[error("episode already terminated")]
    Terminated,
    #[error("action has {motors} motor and {thrusters} thruster values, which does not match the level")]
    ActionShape { motors: usize, thrusters: usize },
    #[error("action value outside the range of the action mode")]
    ActionOutOfRange,
    #[error("cannot decode action: {0}")]
    Decode(String),
    #[error("invalid environment parameters")]
    InvalidParams,
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Starts an episode from a copy of the level's initial state.
pub fn reset(level: &Level, params: &EnvParams) -> Result<EnvState, EnvError> {
    if level.size_class != params.size_class {
        return Err(EnvError::SizeMismatch { level: level.size_class, env: params.size_class });
    }
    validate(level)?;
    let mut sim = level.state.clone();
    sim.clear_contacts();
    let find = |role| sim.bodies.iter().position(|b| b.active && b.role == role).unwrap();
    let (green, blue) = (find(Role::Green), find(Role::Blue));
    let mut state = EnvState { sim, timestep: 0, terminated: false, last_distance: 0.0, green, blue };
    state.last_distance = state.distance();
    Ok(state)
}

/// Advances one environment step and reports the reward, without observing.
///
/// On error the state is left untouched, except for a diverged simulation,
/// which leaves the episode terminated.
pub fn advance(state: &mut EnvState, action: &Action, params: &EnvParams) -> Result<StepInfo, EnvError> {
    if state.terminated {
        return Err(EnvError::Terminated);
    }
    action.check(&state.sim.capacities, params.action_mode)?;
    for _ in 0..params.frame_skip {
        if let Err(e) = step(&mut state.sim, &action.motors, &action.thrusters, &params.sim) {
            state.terminated = true;
            return Err(e.into());
        }
    }
    state.timestep += 1;

    let sparse_reward = sparse_outcome(state);
    let distance = state.distance();
    let dense_reward = params.dense_reward_kappa * (state.last_distance - distance);
    state.last_distance = distance;
    let done = sparse_reward != 0.0 || state.timestep >= params.horizon;
    state.terminated = done;
    Ok(StepInfo { reward: sparse_reward + dense_reward, sparse_reward, dense_reward, done })
}

pub fn env_step(state: &mut EnvState, action: &Action, params: &EnvParams) -> Result<Transition, EnvError> {
    let info = advance(state, action, params)?;
    Ok(Transition { observation: observe(state, params), info })
}

/// Green-blue contact wins over green-red contact.
fn sparse_outcome(state: &EnvState) -> f32 {
    let bodies = &state.sim.bodies;
    let mut red = false;
    for m in state.sim.active_manifolds() {
        let other = if m.body_a == state.green {
            m.body_b
        } else if m.body_b == state.green {
            m.body_a
        } else {
            continue;
        };
        if other == state.blue {
            return 1.0;
        }
        red |= bodies[other].role == Role::Red;
    }
    if red {
        -1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode_enumeration_order() {
        let caps = SizeClass::M.static_params();
        let a = decode_multidiscrete(&[0, 0, 0, 0], &caps).unwrap();
        assert_eq!(a.motors, vec![-1.0, -1.0]);
        let a = decode_multidiscrete(&[1, 2, 0, 1], &caps).unwrap();
        assert_eq!(a.motors, vec![0.0, 1.0]);
        assert_eq!(a.thrusters, vec![0.0, 1.0]);
        assert!(decode_multidiscrete(&[3, 1, 0, 0], &caps).is_err());
        assert!(decode_multidiscrete(&[1, 1, 2, 0], &caps).is_err());
        assert!(decode_multidiscrete(&[1, 1, 0], &caps).is_err());
    }

    #[test]
    fn noop_decodes_from_off_indices() {
        let caps = SizeClass::L.static_params();
        let mut idx = vec![1u8; caps.num_joints];
        idx.extend(vec![0u8; caps.num_thrusters]);
        assert_eq!(decode_multidiscrete(&idx, &caps).unwrap(), Action::noop(&caps));
    }

    #[test]
    fn action_bounds_by_mode() {
        let caps = SizeClass::S.static_params();
        let a = Action { motors: vec![0.5], thrusters: vec![0.25] };
        assert!(a.check(&caps, ActionMode::Continuous).is_ok());
        assert_eq!(a.check(&caps, ActionMode::MultiDiscrete), Err(EnvError::ActionOutOfRange));
        let a = Action { motors: vec![-1.5], thrusters: vec![0.0] };
        assert!(a.check(&caps, ActionMode::Continuous).is_err());
        let a = Action { motors: vec![f32::NAN], thrusters: vec![0.0] };
        assert!(a.check(&caps, ActionMode::Continuous).is_err());
    }

    #[test]
    fn size_classes_match_capacity_table() {
        let m = SizeClass::M.static_params();
        assert_eq!((m.num_polygons, m.num_circles, m.num_joints, m.num_thrusters), (10, 3, 2, 2));
        let l = SizeClass::L.static_params();
        assert_eq!((l.num_polygons, l.num_circles, l.num_joints, l.num_thrusters), (16, 4, 6, 2));
        assert_eq!("s".parse::<SizeClass>().unwrap(), SizeClass::S);
    }
}
