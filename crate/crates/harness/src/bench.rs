//! Throughput measurement over many independent scenes.

use std::fmt;
use std::hint::black_box;
use std::str::FromStr;
use std::time::{Duration, Instant};

use impulse2d::engine::step;
use impulse2d::env::{advance, observe_flat, render_pixels, reset, Action, ActionMode, EnvParams, EnvState, SizeClass};
use impulse2d::levelgen::{generate, Level};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::policy::{mix_seed, random_action};
use crate::pool::parallel_map;
use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchMode {
    /// Engine steps only.
    Engine,
    /// Env steps with the flat observation.
    Env,
    /// Env steps with the pixel observation.
    Pixels,
}

impl FromStr for BenchMode {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "engine" => Ok(BenchMode::Engine),
            "env" => Ok(BenchMode::Env),
            "pixels" => Ok(BenchMode::Pixels),
            _ => Err(HarnessError::Usage(format!("unknown bench mode {s:?}"))),
        }
    }
}

impl fmt::Display for BenchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BenchMode::Engine => "engine",
            BenchMode::Env => "env",
            BenchMode::Pixels => "pixels",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub mode: BenchMode,
    pub size: SizeClass,
    pub instances: usize,
    pub workers: usize,
    /// Engine steps advanced by each instance.
    pub steps_per_instance: u64,
    pub total_engine_steps: u64,
    pub seconds: f64,
    /// Aggregate engine steps per second.
    pub sps: f64,
}

struct Instance {
    level: Level,
    env: EnvState,
    action: Action,
}

impl Instance {
    fn new(size: SizeClass, seed: u64, index: usize, params: &EnvParams) -> Self {
        let mut k = 0;
        let level = loop {
            if let Ok(level) = generate(mix_seed(seed, (index as u64) << 8 | k), size) {
                break level;
            }
            k += 1;
        };
        let caps = level.state.capacities;
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed ^ 0xA5A5, index as u64));
        let action = random_action(&mut rng, caps.num_joints, caps.num_thrusters, ActionMode::MultiDiscrete);
        let env = reset(&level, params).expect("generated levels are valid");
        Instance { level, env, action }
    }

    /// Advances by one engine step (engine mode) or one env step; returns
    /// the number of engine steps taken.
    fn advance(&mut self, mode: BenchMode, params: &EnvParams) -> u64 {
        match mode {
            BenchMode::Engine => {
                let sim = &mut self.env.sim;
                if step(sim, &self.action.motors, &self.action.thrusters, &params.sim).is_err() {
                    self.env = reset(&self.level, params).expect("valid level");
                }
                black_box(&self.env.sim.bodies);
                1
            }
            BenchMode::Env | BenchMode::Pixels => {
                let done = advance(&mut self.env, &self.action, params).map(|i| i.done).unwrap_or(true);
                if mode == BenchMode::Env {
                    black_box(observe_flat(&self.env));
                } else {
                    black_box(render_pixels(&self.env));
                }
                if done {
                    self.env = reset(&self.level, params).expect("valid level");
                }
                params.frame_skip as u64
            }
        }
    }
}

fn run_rounds(instances: &mut [Instance], rounds: u64, mode: BenchMode, params: &EnvParams) -> u64 {
    let mut steps = 0;
    for _ in 0..rounds {
        for inst in instances.iter_mut() {
            steps += inst.advance(mode, params);
        }
    }
    steps
}

/// Measures one point of the throughput curve. Every instance performs the
/// same number of rounds, sized from a serial calibration run so the timed
/// section lasts roughly `duration`.
pub fn bench_point(size: SizeClass, instances: usize, duration: Duration, mode: BenchMode, workers: usize, seed: u64) -> BenchRow {
    let params = EnvParams::new(size);
    let instances = instances.max(1);
    let workers = workers.clamp(1, instances);
    let mut scenes: Vec<Instance> = (0..instances).map(|i| Instance::new(size, seed, i, &params)).collect();

    let calibration = duration.mul_f64(0.1).max(Duration::from_millis(20));
    let start = Instant::now();
    let mut calibrated = 0u64;
    while start.elapsed() < calibration {
        run_rounds(&mut scenes, 1, mode, &params);
        calibrated += 1;
    }
    let rounds_per_sec = calibrated as f64 / start.elapsed().as_secs_f64();
    let speedup = workers.min(crate::pool::hardware_parallelism()) as f64;
    let rounds = ((rounds_per_sec * speedup * duration.as_secs_f64()).ceil() as u64).max(1);

    let mut shards: Vec<Vec<Instance>> = (0..workers).map(|_| Vec::new()).collect();
    for (i, inst) in scenes.into_iter().enumerate() {
        shards[i % workers].push(inst);
    }
    let start = Instant::now();
    let per_shard = parallel_map(shards, workers, |mut shard| run_rounds(&mut shard, rounds, mode, &params));
    let seconds = start.elapsed().as_secs_f64();

    let per_round = if mode == BenchMode::Engine { 1 } else { params.frame_skip as u64 };
    let steps_per_instance = rounds * per_round;
    let total: u64 = per_shard.iter().sum();
    debug_assert_eq!(total, steps_per_instance * instances as u64);
    BenchRow {
        mode,
        size,
        instances,
        workers,
        steps_per_instance,
        total_engine_steps: total,
        seconds,
        sps: total as f64 / seconds,
    }
}

/// Sweeps `instance_counts`, using `min(count, max_workers)` workers each.
pub fn bench(
    size: SizeClass,
    instance_counts: &[usize],
    duration: Duration,
    mode: BenchMode,
    max_workers: usize,
    seed: u64,
) -> Vec<BenchRow> {
    instance_counts
        .iter()
        .map(|&n| bench_point(size, n, duration, mode, n.min(max_workers), seed))
        .collect()
}
