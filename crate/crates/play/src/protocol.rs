//! Wire messages. Every message is one JSON text frame with a `type` tag;
//! see `docs/protocol.md`.

use impulse2d::engine::{Role, SimState};
use impulse2d::env::{Action, SizeClass};
use impulse2d::geometry::{Shape, Vec2};
use serde::{Deserialize, Serialize};

pub const PROTOCOL: &str = "impulse2d-play/1";

pub type Point = [f32; 2];

pub fn point(v: Vec2) -> Point {
    [v.x, v.y]
}

pub fn vec2(p: Point) -> Vec2 {
    Vec2::new(p[0], p[1])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Play,
    Edit,
    Paused,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    /// Optional handshake; a mismatched protocol tag is answered with an error.
    Hello { protocol: String },
    /// `doc` is a level document as written by `save` or `impulse2d gen`.
    LoadLevel { doc: serde_json::Value },
    Generate { size: SizeClass, seed: u64 },
    Reset,
    Action { motors: Vec<f32>, thrusters: Vec<f32> },
    SetMode { mode: Mode },
    Edit(Edit),
    Save,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Edit {
    AddEntity { entity: EntitySpec },
    DeleteEntity { target: EntityRef },
    SetField { target: EntityRef, field: String, value: serde_json::Value },
    SetRole { body: usize, role: Role },
    Move { body: usize, position: Point, rotation: Option<f32> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Body,
    Joint,
    Thruster,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityRef {
    pub kind: EntityKind,
    pub index: usize,
}

fn one() -> f32 {
    1.0
}

fn half() -> f32 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodySpec {
    pub position: Point,
    #[serde(default)]
    pub rotation: f32,
    #[serde(default = "one")]
    pub density: f32,
    #[serde(default = "half")]
    pub friction: f32,
    #[serde(default)]
    pub restitution: f32,
    #[serde(default)]
    pub role: Role,
    #[serde(default)]
    pub fixated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EntitySpec {
    Circle {
        radius: f32,
        #[serde(flatten)]
        body: BodySpec,
    },
    /// Vertices are relative to `position`; the body is recentred on the
    /// polygon's centroid.
    Polygon {
        vertices: Vec<Point>,
        #[serde(flatten)]
        body: BodySpec,
    },
    Joint {
        body_a: usize,
        body_b: usize,
        anchor_a: Point,
        anchor_b: Point,
        #[serde(default)]
        motor: bool,
        #[serde(default)]
        motor_power: f32,
        #[serde(default)]
        motor_speed: f32,
        #[serde(default)]
        fixed: bool,
        #[serde(default)]
        binding: u8,
    },
    Thruster {
        body: usize,
        anchor: Point,
        #[serde(default)]
        rotation: f32,
        power: f32,
        #[serde(default)]
        binding: u8,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Hello { protocol: String, session: String, tick_rate: u32 },
    Frame(Frame),
    LevelDoc { name: String, hash: String, doc: serde_json::Value },
    Error { code: String, detail: String },
}

impl ServerMessage {
    pub fn error(code: impl Into<String>, detail: impl Into<String>) -> Self {
        ServerMessage::Error { code: code.into(), detail: detail.into() }
    }

    pub fn encode(&self) -> String {
        serde_json::to_string(self).expect("server messages serialize")
    }
}

/// Full scene state after `tick` env steps since the last reset. `action`
/// is the action that produced this tick; frames sent without stepping
/// repeat the current tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    /// Strictly increasing per session.
    pub seq: u64,
    pub tick: u64,
    pub mode: Mode,
    pub level: String,
    pub reward: f32,
    pub done: bool,
    pub state_hash: String,
    pub action: Action,
    pub bodies: Vec<BodyFrame>,
    pub joints: Vec<JointFrame>,
    pub thrusters: Vec<ThrusterFrame>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyFrame {
    pub index: usize,
    pub shape: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f32>,
    /// Body-local vertices, counter-clockwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Point>>,
    pub position: Point,
    pub rotation: f32,
    pub velocity: Point,
    pub angular_velocity: f32,
    pub role: Role,
    pub fixated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointFrame {
    pub index: usize,
    pub body_a: usize,
    pub body_b: usize,
    /// World position of the anchor on `body_a`.
    pub position: Point,
    pub motor_on: bool,
    pub fixed: bool,
    pub binding: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThrusterFrame {
    pub index: usize,
    pub body: usize,
    pub position: Point,
    /// World direction of the thrust, radians.
    pub direction: f32,
    pub power: f32,
    pub binding: u8,
    pub firing: bool,
}

/// Snapshot of the active entities of `sim`.
pub fn entities(sim: &SimState, action: &Action) -> (Vec<BodyFrame>, Vec<JointFrame>, Vec<ThrusterFrame>) {
    let bodies = sim
        .bodies
        .iter()
        .enumerate()
        .filter(|(_, b)| b.active)
        .map(|(index, b)| {
            let (shape, radius, vertices) = match &b.shape {
                Shape::Circle(c) => ("circle".to_string(), Some(c.radius), None),
                Shape::Polygon(p) => ("polygon".to_string(), None, Some(p.vertices().iter().map(|&v| point(v)).collect())),
            };
            BodyFrame {
                index,
                shape,
                radius,
                vertices,
                position: point(b.position),
                rotation: b.rotation,
                velocity: point(b.velocity),
                angular_velocity: b.angular_velocity,
                role: b.role,
                fixated: b.fixated,
            }
        })
        .collect();
    let joints = sim
        .joints
        .iter()
        .enumerate()
        .filter(|(_, j)| j.active)
        .map(|(index, j)| JointFrame {
            index,
            body_a: j.body_a,
            body_b: j.body_b,
            position: point(sim.bodies[j.body_a].world_point(j.anchor_a)),
            motor_on: j.motor_on,
            fixed: j.is_fixed,
            binding: j.binding,
        })
        .collect();
    let thrusters = sim
        .thrusters
        .iter()
        .enumerate()
        .filter(|(_, t)| t.active)
        .map(|(index, t)| {
            let body = &sim.bodies[t.body];
            ThrusterFrame {
                index,
                body: t.body,
                position: point(body.world_point(t.anchor)),
                direction: body.rotation + t.rotation,
                power: t.power,
                binding: t.binding,
                firing: action.thrusters.get(index).is_some_and(|&v| v > 0.0),
            }
        })
        .collect();
    (bodies, joints, thrusters)
}
