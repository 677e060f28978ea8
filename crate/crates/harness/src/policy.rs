//! Action sources for rollouts: no-op, seeded random and scripted files.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use impulse2d::engine::StaticSimParams;
use impulse2d::env::{Action, ActionMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::HarnessError;

/// Textual policy description: `noop`, `random:SEED` or `file:PATH`.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicySpec {
    Noop,
    Random(u64),
    /// One action per env step; the no-op action once the script runs out.
    Scripted { path: PathBuf, actions: Arc<Vec<Action>> },
}

impl PolicySpec {
    pub fn scripted(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let actions = parse_script(&text).map_err(|e| HarnessError::Policy(format!("{}: {e}", path.display())))?;
        Ok(PolicySpec::Scripted { path: path.to_owned(), actions: Arc::new(actions) })
    }

    /// Policy used for the `trial`-th repetition. Random policies get an
    /// independent stream per trial; the others repeat identically.
    pub fn for_trial(&self, trial: u64) -> PolicySpec {
        match self {
            PolicySpec::Random(seed) => PolicySpec::Random(mix_seed(*seed, trial)),
            other => other.clone(),
        }
    }

    pub fn instantiate(&self, caps: StaticSimParams, mode: ActionMode) -> Policy {
        let source = match self {
            PolicySpec::Noop => Source::Noop,
            PolicySpec::Random(seed) => Source::Random(Box::new(ChaCha8Rng::seed_from_u64(*seed))),
            PolicySpec::Scripted { actions, .. } => Source::Scripted(actions.clone(), 0),
        };
        Policy { source, caps, mode }
    }
}

impl FromStr for PolicySpec {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || HarnessError::Policy(format!("expected noop, random:SEED or file:PATH, got {s:?}"));
        match s.split_once(':') {
            None if s == "noop" => Ok(PolicySpec::Noop),
            Some(("random", seed)) => seed.parse().map(PolicySpec::Random).map_err(|_| bad()),
            Some(("file", path)) if !path.is_empty() => PolicySpec::scripted(path),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySpec::Noop => write!(f, "noop"),
            PolicySpec::Random(seed) => write!(f, "random:{seed}"),
            PolicySpec::Scripted { path, .. } => write!(f, "file:{}", path.display()),
        }
    }
}

/// SplitMix64 finaliser over the pair.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Scripts are JSON lines of `{"motors": [...], "thrusters": [...]}`.
/// Blank lines and lines starting with `#` are skipped.
pub fn parse_script(text: &str) -> Result<Vec<Action>, String> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| format!("line {}: {e}", i + 1)))
        .collect()
}

pub fn write_script(actions: &[Action]) -> String {
    let mut out = String::new();
    for a in actions {
        out.push_str(&serde_json::to_string(a).expect("actions serialize"));
        out.push('\n');
    }
    out
}

enum Source {
    Noop,
    Random(Box<ChaCha8Rng>),
    Scripted(Arc<Vec<Action>>, usize),
}

pub struct Policy {
    source: Source,
    caps: StaticSimParams,
    mode: ActionMode,
}

impl Policy {
    pub fn act(&mut self) -> Action {
        let (joints, thrusters) = (self.caps.num_joints, self.caps.num_thrusters);
        match &mut self.source {
            Source::Noop => Action::noop(&self.caps),
            Source::Random(rng) => random_action(rng.as_mut(), joints, thrusters, self.mode),
            Source::Scripted(actions, next) => {
                let a = actions.get(*next).cloned().unwrap_or_else(|| Action::noop(&self.caps));
                *next += 1;
                a
            }
        }
    }
}

pub fn random_action(rng: &mut impl Rng, joints: usize, thrusters: usize, mode: ActionMode) -> Action {
    match mode {
        ActionMode::MultiDiscrete => Action {
            motors: (0..joints).map(|_| rng.random_range(-1i8..=1) as f32).collect(),
            thrusters: (0..thrusters).map(|_| rng.random_range(0u8..=1) as f32).collect(),
        },
        ActionMode::Continuous => Action {
            motors: (0..joints).map(|_| rng.random_range(-1.0..=1.0)).collect(),
            thrusters: (0..thrusters).map(|_| rng.random_range(0.0..=1.0)).collect(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use impulse2d::env::SizeClass;

    #[test]
    fn parses_policy_strings() {
        assert_eq!("noop".parse::<PolicySpec>().unwrap(), PolicySpec::Noop);
        assert_eq!("random:42".parse::<PolicySpec>().unwrap(), PolicySpec::Random(42));
        for bad in ["", "random", "random:x", "file:", "greedy:1"] {
            assert!(bad.parse::<PolicySpec>().is_err(), "{bad}");
        }
        assert_eq!(PolicySpec::Random(7).to_string(), "random:7");
    }

    #[test]
    fn script_round_trip_and_exhaustion() {
        let caps = SizeClass::S.static_params();
        let script = vec![Action { motors: vec![1.0], thrusters: vec![0.0] }, Action { motors: vec![-1.0], thrusters: vec![1.0] }];
        let text = format!("# header\n\n{}", write_script(&script));
        let parsed = parse_script(&text).unwrap();
        assert_eq!(parsed, script);
        let spec = PolicySpec::Scripted { path: "x".into(), actions: Arc::new(parsed) };
        let mut p = spec.instantiate(caps, ActionMode::MultiDiscrete);
        assert_eq!(p.act(), script[0]);
        assert_eq!(p.act(), script[1]);
        assert_eq!(p.act(), Action::noop(&caps));
        assert!(parse_script("{\"motors\": [1]}").unwrap_err().contains("line 1"));
    }

    #[test]
    fn random_actions_are_in_mode_bounds() {
        let caps = SizeClass::L.static_params();
        for mode in [ActionMode::MultiDiscrete, ActionMode::Continuous] {
            let mut p = PolicySpec::Random(3).instantiate(caps, mode);
            for _ in 0..200 {
                p.act().check(&caps, mode).unwrap();
            }
        }
    }

    #[test]
    fn trials_get_distinct_streams() {
        let base = PolicySpec::Random(5);
        assert_ne!(base.for_trial(0), base.for_trial(1));
        assert_eq!(base.for_trial(3), base.for_trial(3));
        assert_eq!(PolicySpec::Noop.for_trial(9), PolicySpec::Noop);
    }
}
