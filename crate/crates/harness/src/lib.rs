//! Tooling around the impulse2d engine: throughput benchmarks, scripted
//! rollouts, determinism audits, bulk generation and learnability ranking.

pub mod audit;
pub mod bench;
pub mod policy;
pub mod pool;
pub mod rollout;

use std::path::{Path, PathBuf};

use impulse2d::env::EnvError;
use impulse2d::levelgen::{deserialize, Level, LevelError};
use thiserror::Error;

pub use audit::{audit, trajectory_hash, AuditReport};
pub use bench::{bench, bench_point, BenchMode, BenchRow};
pub use policy::{Policy, PolicySpec};
pub use rollout::{learnability, rank_levels, rollout, RankedLevel, RolloutResult};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Level { path: PathBuf, source: LevelError },
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("invalid policy: {0}")]
    Policy(String),
    #[error("learnability needs 0 <= successes <= trials and trials >= 1, got {successes}/{trials}")]
    Learnability { successes: usize, trials: usize },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.to_owned(), source }
    }
}

pub fn load_level(path: &Path) -> Result<Level, HarnessError> {
    let bytes = std::fs::read(path).map_err(|e| HarnessError::io(path, e))?;
    deserialize(&bytes).map_err(|source| HarnessError::Level { path: path.to_owned(), source })
}

/// Loads every `*.json` file in `dir`, sorted by file name.
pub fn load_level_dir(dir: &Path) -> Result<Vec<Level>, HarnessError> {
    let mut paths = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| HarnessError::io(dir, e))? {
        let path = entry.map_err(|e| HarnessError::io(dir, e))?.path();
        if path.extension().is_some_and(|x| x == "json") {
            paths.push(path);
        }
    }
    paths.sort();
    paths.iter().map(|p| load_level(p)).collect()
}
