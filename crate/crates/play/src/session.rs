use impulse2d::env::{advance, reset, Action, EnvError, EnvParams, EnvState};
use impulse2d::levelgen::{deserialize, generate, serialize, Level};

use crate::edit::apply_edit;
use crate::protocol::{entities, ClientMessage, Frame, Mode, ServerMessage, PROTOCOL};

/// One player's scene. Message handling and ticking are synchronous; the
/// server serializes both per session.
#[derive(Debug, Clone)]
pub struct Session {
    id: String,
    level: Level,
    params: EnvParams,
    env: EnvState,
    mode: Mode,
    tick: u64,
    seq: u64,
    /// Latest received action; stays in effect until replaced.
    action: Action,
    /// Action that produced the current tick.
    applied: Action,
    reward: f32,
    done: bool,
}

impl Session {
    pub fn new(id: impl Into<String>, level: Level) -> Result<Self, EnvError> {
        let params = EnvParams::new(level.size_class);
        let env = reset(&level, &params)?;
        let noop = Action::noop(&level.state.capacities);
        Ok(Self {
            id: id.into(),
            level,
            params,
            env,
            mode: Mode::Play,
            tick: 0,
            seq: 0,
            action: noop.clone(),
            applied: noop,
            reward: 0.0,
            done: false,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn level(&self) -> &Level {
        &self.level
    }

    pub fn env(&self) -> &EnvState {
        &self.env
    }

    pub fn params(&self) -> &EnvParams {
        &self.params
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn hello(&self, tick_rate: u32) -> ServerMessage {
        ServerMessage::Hello { protocol: PROTOCOL.into(), session: self.id.clone(), tick_rate }
    }

    /// Snapshot of the current state.
    pub fn frame(&mut self) -> ServerMessage {
        self.seq += 1;
        let (bodies, joints, thrusters) = entities(&self.env.sim, &self.applied);
        ServerMessage::Frame(Frame {
            seq: self.seq,
            tick: self.tick,
            mode: self.mode,
            level: self.level.name.clone(),
            reward: self.reward,
            done: self.done,
            state_hash: format!("{:016x}", self.env.sim.state_hash()),
            action: self.applied.clone(),
            bodies,
            joints,
            thrusters,
        })
    }

    /// One play-mode tick: steps the env with the latest action and returns
    /// the resulting frame. Nothing happens when not playing or once the
    /// episode is over.
    pub fn step(&mut self) -> Vec<ServerMessage> {
        if self.mode != Mode::Play || self.done {
            return Vec::new();
        }
        self.applied = self.action.clone();
        let result = advance(&mut self.env, &self.applied, &self.params);
        self.tick += 1;
        match result {
            Ok(info) => {
                self.reward = info.reward;
                self.done = info.done;
                vec![self.frame()]
            }
            Err(e) => {
                self.reward = 0.0;
                self.done = true;
                vec![self.frame(), ServerMessage::error("diverged", e.to_string())]
            }
        }
    }

    /// Parses and handles one text message; malformed input yields an error
    /// message and leaves the session unchanged.
    pub fn handle_text(&mut self, text: &str) -> Vec<ServerMessage> {
        match serde_json::from_str::<ClientMessage>(text) {
            Ok(msg) => self.handle(msg),
            Err(e) => vec![ServerMessage::error("malformed", e.to_string())],
        }
    }

    pub fn handle(&mut self, msg: ClientMessage) -> Vec<ServerMessage> {
        match msg {
            ClientMessage::Hello { protocol } if protocol == PROTOCOL => Vec::new(),
            ClientMessage::Hello { protocol } => {
                vec![ServerMessage::error("protocol", format!("server speaks {PROTOCOL}, client sent {protocol}"))]
            }
            ClientMessage::LoadLevel { doc } => {
                let bytes = match doc {
                    serde_json::Value::String(s) => s.into_bytes(),
                    other => serde_json::to_vec(&other).expect("json values serialize"),
                };
                match deserialize(&bytes) {
                    Ok(level) => self.install(level),
                    Err(e) => vec![ServerMessage::error(e.code(), e.to_string())],
                }
            }
            ClientMessage::Generate { size, seed } => match generate(seed, size) {
                Ok(level) => self.install(level),
                Err(e) => vec![ServerMessage::error("generate", e.to_string())],
            },
            ClientMessage::Reset => {
                self.restart();
                vec![self.frame()]
            }
            ClientMessage::Action { motors, thrusters } => {
                let action = Action { motors, thrusters };
                match action.check(&self.level.state.capacities, self.params.action_mode) {
                    Ok(()) => {
                        self.action = action;
                        Vec::new()
                    }
                    Err(e) => vec![ServerMessage::error("bad_action", e.to_string())],
                }
            }
            ClientMessage::SetMode { mode } => {
                if mode == Mode::Edit && self.mode != Mode::Edit {
                    self.restart();
                }
                self.mode = mode;
                vec![self.frame()]
            }
            ClientMessage::Edit(edit) => {
                if self.mode != Mode::Edit {
                    return vec![ServerMessage::error("wrong_mode", "edits require edit mode")];
                }
                match apply_edit(&self.level, &edit) {
                    Ok(level) => {
                        self.level = level;
                        self.restart();
                        vec![self.frame()]
                    }
                    Err(e) => vec![ServerMessage::error(e.code(), e.to_string())],
                }
            }
            ClientMessage::Save => vec![self.save()],
        }
    }

    pub fn save(&self) -> ServerMessage {
        let text = serialize(&self.level);
        ServerMessage::LevelDoc {
            name: self.level.name.clone(),
            hash: format!("{:016x}", self.level.hash()),
            doc: serde_json::from_str(&text).expect("level documents are JSON"),
        }
    }

    fn install(&mut self, level: Level) -> Vec<ServerMessage> {
        let params = EnvParams { size_class: level.size_class, ..self.params };
        match reset(&level, &params) {
            Ok(env) => {
                self.level = level;
                self.params = params;
                self.env = env;
                self.action = Action::noop(&self.level.state.capacities);
                self.restart();
                vec![self.frame()]
            }
            Err(e) => vec![ServerMessage::error("invalid_level", e.to_string())],
        }
    }

    fn restart(&mut self) {
        self.env = reset(&self.level, &self.params).expect("session levels are valid");
        self.tick = 0;
        self.reward = 0.0;
        self.done = false;
        self.applied = Action::noop(&self.level.state.capacities);
    }
}
