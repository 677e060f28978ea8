use std::cmp::Ordering;

use impulse2d::env::{advance, reset, EnvError, EnvParams};
use impulse2d::levelgen::Level;
use serde::Serialize;

use crate::policy::PolicySpec;
use crate::pool::parallel_map;
use crate::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RolloutResult {
    pub level_name: String,
    pub solved: bool,
    /// Env steps taken.
    pub steps: usize,
    #[serde(rename = "return")]
    pub episode_return: f64,
    pub sparse_return: f32,
    #[serde(serialize_with = "hex")]
    pub state_hash: u64,
    pub diverged: bool,
}

fn hex<S: serde::Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{v:016x}"))
}

/// Runs one episode to termination or the horizon.
pub fn rollout(level: &Level, policy: &PolicySpec, params: &EnvParams) -> Result<RolloutResult, HarnessError> {
    let mut state = reset(level, params)?;
    let mut actor = policy.instantiate(level.state.capacities, params.action_mode);
    let mut result = RolloutResult {
        level_name: level.name.clone(),
        solved: false,
        steps: 0,
        episode_return: 0.0,
        sparse_return: 0.0,
        state_hash: 0,
        diverged: false,
    };
    while !state.terminated {
        match advance(&mut state, &actor.act(), params) {
            Ok(info) => {
                result.steps += 1;
                result.episode_return += info.reward as f64;
                result.sparse_return += info.sparse_reward;
            }
            Err(EnvError::Sim(_)) => {
                result.diverged = true;
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }
    result.solved = result.sparse_return == 1.0;
    result.state_hash = state.sim.state_hash();
    Ok(result)
}

/// `p(1 - p)` of the empirical solve rate.
pub fn learnability(successes: usize, trials: usize) -> Result<f64, HarnessError> {
    if trials == 0 || successes > trials {
        return Err(HarnessError::Learnability { successes, trials });
    }
    let p = successes as f64 / trials as f64;
    Ok(p * (1.0 - p))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedLevel {
    pub name: String,
    pub score: f64,
    pub successes: usize,
    pub trials: usize,
}

/// Scores every level by learnability over `trials` rollouts (trial `k` uses
/// `policy.for_trial(k)`) and sorts by descending score, then by name.
pub fn rank_levels(
    levels: &[Level],
    policy: &PolicySpec,
    trials: usize,
    params: &EnvParams,
    workers: usize,
) -> Result<Vec<RankedLevel>, HarnessError> {
    let scored = parallel_map(levels.iter().collect(), workers, |level: &Level| {
        let mut params = *params;
        params.size_class = level.size_class;
        let mut successes = 0;
        for k in 0..trials {
            if rollout(level, &policy.for_trial(k as u64), &params)?.solved {
                successes += 1;
            }
        }
        Ok(RankedLevel { name: level.name.clone(), score: learnability(successes, trials)?, successes, trials })
    });
    let mut ranked = scored.into_iter().collect::<Result<Vec<_>, HarnessError>>()?;
    ranked.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap_or(Ordering::Equal).then_with(|| a.name.cmp(&b.name)));
    Ok(ranked)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn learnability_values() {
        assert_eq!(learnability(0, 10).unwrap(), 0.0);
        assert_eq!(learnability(10, 10).unwrap(), 0.0);
        assert_eq!(learnability(5, 10).unwrap(), 0.25);
        assert_eq!(learnability(1, 4).unwrap(), 0.1875);
        assert!(learnability(0, 0).is_err());
        assert!(learnability(3, 2).is_err());
    }
}
