use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::generate::{add_random_shape, limit_motor_power, uniform};
use super::{noop_filter, overlap, validate, GenConfig, Level, NoopResult};
use crate::engine::{Role, NUM_WALLS};
use crate::env::EnvParams;
use crate::geometry::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationKind {
    AddShape,
    RemoveShape,
    EditShape,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mutation {
    pub level: Level,
    pub kind: MutationKind,
    /// Body slot that was added, removed or edited.
    pub body: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MutateError {
    #[error("no free slot for a new shape")]
    NoCapacity,
    #[error("no removable shape")]
    NothingToRemove,
    #[error("no valid {0:?} mutation found within the retry budget")]
    Exhausted(MutationKind),
}

pub fn mutate(level: &Level, seed: u64, kind: MutationKind) -> Result<Mutation, MutateError> {
    mutate_with(level, seed, kind, &GenConfig::default(), &EnvParams::new(level.size_class))
}

/// Applies one random mutation, resampling until the result is valid and not
/// solved by the no-op policy.
pub fn mutate_with(
    level: &Level,
    seed: u64,
    kind: MutationKind,
    cfg: &GenConfig,
    params: &EnvParams,
) -> Result<Mutation, MutateError> {
    let s = &level.state;
    let shapes: Vec<usize> = (NUM_WALLS..s.bodies.len()).filter(|&i| s.bodies[i].active).collect();
    match kind {
        MutationKind::AddShape if shapes.len() + NUM_WALLS == s.bodies.len() => return Err(MutateError::NoCapacity),
        MutationKind::RemoveShape if !shapes.iter().any(|&i| s.bodies[i].role != Role::Green && s.bodies[i].role != Role::Blue) => {
            return Err(MutateError::NothingToRemove)
        }
        _ => {}
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cfg.level_retries {
        let Some((mut candidate, body)) = propose(&mut rng, level, &shapes, kind, cfg) else { continue };
        limit_motor_power(&mut candidate.state, params.sim.motor_rho, cfg.motor_gain_limit);
        if validate(&candidate).is_ok() && noop_filter(&candidate, params) == NoopResult::NotSolved {
            return Ok(Mutation { level: candidate, kind, body });
        }
    }
    Err(MutateError::Exhausted(kind))
}

/// Removes a body and everything attached to it, without re-validating.
pub fn remove_shape(level: &Level, body: usize) -> Level {
    let mut out = level.clone();
    out.state.remove_body(body);
    out
}

fn propose(
    rng: &mut impl Rng,
    level: &Level,
    shapes: &[usize],
    kind: MutationKind,
    cfg: &GenConfig,
) -> Option<(Level, usize)> {
    let mut out = level.clone();
    let s = &mut out.state;
    let body = match kind {
        MutationKind::AddShape => {
            let free_polygon = (NUM_WALLS..s.capacities.num_polygons).any(|i| !s.bodies[i].active);
            let free_circle = (s.capacities.num_polygons..s.bodies.len()).any(|i| !s.bodies[i].active);
            let circle = match (free_polygon, free_circle) {
                (true, true) => rng.random_bool(0.5),
                (p, _) => !p,
            };
            let jointed = rng.random_bool(cfg.joint_prob as f64);
            add_random_shape(rng, s, circle, jointed, cfg)?
        }
        MutationKind::RemoveShape => {
            let removable: Vec<usize> = shapes
                .iter()
                .copied()
                .filter(|&i| s.bodies[i].role != Role::Green && s.bodies[i].role != Role::Blue)
                .collect();
            let i = *removable.choose(rng)?;
            s.remove_body(i);
            i
        }
        MutationKind::EditShape => {
            let i = *shapes.choose(rng)?;
            let jointed = s.joints.iter().any(|j| j.active && (j.body_a == i || j.body_b == i));
            let b = &mut s.bodies[i];
            match rng.random_range(0..6) {
                0 if !jointed => {
                    b.position += Vec2::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
                }
                1 if !jointed => b.rotation += rng.random_range(-1.0..1.0),
                2 => {
                    b.density = uniform(rng, cfg.density);
                    b.recompute_mass();
                }
                3 => b.friction = uniform(rng, cfg.friction),
                4 if b.role != Role::Green => {
                    let fixated = !b.fixated;
                    b.set_fixated(fixated);
                }
                _ => b.restitution = uniform(rng, cfg.restitution),
            }
            let moved = *b;
            let fits = s
                .bodies
                .iter()
                .enumerate()
                .filter(|&(k, o)| k != i && o.active)
                .all(|(k, o)| s.joints.iter().any(|j| j.active && j.connects(i, k)) || overlap(o, &moved) == 0.0);
            if !fits {
                return None;
            }
            i
        }
    };
    s.clear_contacts();
    Some((out, body))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::SizeClass;
    use crate::levelgen::generate;

    #[test]
    fn add_then_remove_restores_level() {
        let level = generate(5, SizeClass::M).unwrap();
        for seed in 0..10 {
            let Ok(m) = mutate(&level, seed, MutationKind::AddShape) else { continue };
            assert_ne!(m.level.hash(), level.hash());
            assert_eq!(remove_shape(&m.level, m.body).hash(), level.hash());
        }
    }

    #[test]
    fn edit_preserves_counts() {
        let level = generate(8, SizeClass::L).unwrap();
        let count = |l: &Level| {
            let s = &l.state;
            (
                s.bodies.iter().filter(|b| b.active).count(),
                s.joints.iter().filter(|j| j.active).count(),
                s.thrusters.iter().filter(|t| t.active).count(),
            )
        };
        for seed in 0..10 {
            let m = mutate(&level, seed, MutationKind::EditShape).unwrap();
            assert_eq!(count(&m.level), count(&level));
            validate(&m.level).unwrap();
        }
    }
}
