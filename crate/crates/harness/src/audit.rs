//! Cross-run determinism checks.

use std::hash::Hasher;

use fnv::FnvHasher;
use impulse2d::engine::step;
use impulse2d::env::EnvParams;
use impulse2d::levelgen::Level;
use serde::Serialize;

use crate::policy::PolicySpec;
use crate::pool::parallel_map;

/// Digest of a whole trajectory: the state hash after every engine step, in
/// order. Each policy action is held for `frame_skip` engine steps and
/// episode termination is ignored. A diverged run stops early and folds in
/// the step at which it failed.
pub fn trajectory_hash(level: &Level, policy: &PolicySpec, engine_steps: usize, params: &EnvParams) -> u64 {
    let mut sim = level.state.clone();
    sim.clear_contacts();
    let mut actor = policy.instantiate(sim.capacities, params.action_mode);
    let mut digest = FnvHasher::default();
    let mut action = actor.act();
    for t in 0..engine_steps {
        if t > 0 && t % params.frame_skip == 0 {
            action = actor.act();
        }
        if step(&mut sim, &action.motors, &action.thrusters, &params.sim).is_err() {
            digest.write_u64(u64::MAX);
            digest.write_u64(t as u64);
            break;
        }
        digest.write_u64(sim.state_hash());
    }
    digest.finish()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub level_name: String,
    pub engine_steps: usize,
    /// One digest per repeat, run back to back on the calling thread.
    pub serial: Vec<u64>,
    /// The same repeats spread over the worker pool.
    pub pooled: Vec<u64>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        let reference = self.serial.first();
        reference.is_some() && self.serial.iter().chain(&self.pooled).all(|h| Some(h) == reference)
    }
}

pub fn audit(
    levels: &[Level],
    policy: &PolicySpec,
    engine_steps: usize,
    repeats: usize,
    workers: usize,
    params: &EnvParams,
) -> Vec<AuditReport> {
    let run = |level: &Level| {
        let mut params = *params;
        params.size_class = level.size_class;
        trajectory_hash(level, policy, engine_steps, &params)
    };
    let serial: Vec<Vec<u64>> = levels.iter().map(|l| (0..repeats).map(|_| run(l)).collect()).collect();
    let jobs: Vec<&Level> = levels.iter().flat_map(|l| std::iter::repeat_n(l, repeats)).collect();
    let pooled = parallel_map(jobs, workers, run);
    levels
        .iter()
        .zip(serial)
        .zip(pooled.chunks(repeats.max(1)))
        .map(|((level, serial), pooled)| AuditReport {
            level_name: level.name.clone(),
            engine_steps,
            serial,
            pooled: if repeats == 0 { Vec::new() } else { pooled.to_vec() },
        })
        .collect()
}
