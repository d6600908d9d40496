//! Desk-scale episodic environments and an exact tabular oracle.
//!
//! | env       | obs            | actions              | reward          | γ    | cap |
//! |-----------|----------------|----------------------|-----------------|------|-----|
//! | gridworld5| one-hot(25)    | up, down, left, right| +1 entering goal| 0.99 | 100 |
//! | catch     | 10×5 binary    | left, stay, right    | ±1 at bottom    | 0.99 | 9   |
//! | chain5    | one-hot(5)     | single               | +1 exiting right| 1.0  | 200 |

mod catch;
mod chain;
mod gridworld;
mod tabular;

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use serde::{Deserialize, Serialize};

pub use catch::{catch_optimal_return, catch_random_policy_return, Catch};
pub use chain::Chain;
pub use gridworld::Gridworld;
pub use tabular::{evaluate_policy, value_iteration, Outcome, QTable, TabularMdp};

use crate::error::{Result, TarlError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnvName {
    #[serde(rename = "gridworld5")]
    Gridworld5,
    #[serde(rename = "catch")]
    Catch,
    #[serde(rename = "chain5")]
    Chain5,
}

impl EnvName {
    pub const ALL: [EnvName; 3] = [EnvName::Gridworld5, EnvName::Catch, EnvName::Chain5];

    pub fn as_str(self) -> &'static str {
        match self {
            EnvName::Gridworld5 => "gridworld5",
            EnvName::Catch => "catch",
            EnvName::Chain5 => "chain5",
        }
    }

    /// Default environment instance.
    pub fn make(self) -> Box<dyn Environment> {
        match self {
            EnvName::Gridworld5 => Box::new(Gridworld::new()),
            EnvName::Catch => Box::new(Catch::new()),
            EnvName::Chain5 => Box::new(Chain::new(1.0)),
        }
    }

    /// Tabular description for the value-iteration oracle.
    pub fn tabular(self) -> Result<TabularMdp> {
        match self {
            EnvName::Gridworld5 => Ok(Gridworld::new().tabular()),
            EnvName::Chain5 => Ok(Chain::new(1.0).tabular()),
            EnvName::Catch => Err(TarlError::Unsupported("catch has no tabular description".into())),
        }
    }
}

impl fmt::Display for EnvName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EnvName {
    type Err = TarlError;

    fn from_str(s: &str) -> Result<Self> {
        EnvName::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| TarlError::arg(format!("unknown environment {s:?} (expected gridworld5, catch or chain5)")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvSpec {
    pub name: EnvName,
    pub obs_dim: usize,
    pub n_actions: usize,
    pub max_episode_steps: usize,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub observation: Vec<f64>,
    pub reward: f64,
    /// Reached a terminal state.
    pub terminated: bool,
    /// Hit the step cap without terminating.
    pub truncated: bool,
}

impl StepOutcome {
    /// Episode over, for either reason.
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

pub trait Environment: Send {
    fn spec(&self) -> &EnvSpec;

    /// Starts a new episode and returns the first observation.
    fn reset(&mut self, rng: &mut dyn RngCore) -> Vec<f64>;

    /// Advances one step. Stepping a finished episode is a protocol error.
    fn step(&mut self, action: usize, rng: &mut dyn RngCore) -> Result<StepOutcome>;
}

pub(crate) fn one_hot(n: usize, index: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[index] = 1.0;
    v
}

/// Shared step bookkeeping: validates the call and applies the step cap.
#[derive(Debug, Clone, Default)]
pub(crate) struct EpisodeClock {
    steps: usize,
    finished: bool,
    started: bool,
}

impl EpisodeClock {
    pub(crate) fn reset(&mut self) {
        *self = EpisodeClock { steps: 0, finished: false, started: true };
    }

    pub(crate) fn begin_step(&self, spec: &EnvSpec, action: usize) -> Result<()> {
        if !self.started {
            return Err(TarlError::Protocol("step before reset".into()));
        }
        if self.finished {
            return Err(TarlError::Protocol("step after episode end; call reset".into()));
        }
        if action >= spec.n_actions {
            return Err(TarlError::arg(format!("action {action} invalid for {} ({} actions)", spec.name, spec.n_actions)));
        }
        Ok(())
    }

    /// Returns `(terminated, truncated)`.
    pub(crate) fn end_step(&mut self, spec: &EnvSpec, terminal: bool) -> (bool, bool) {
        self.steps += 1;
        let truncated = !terminal && self.steps >= spec.max_episode_steps;
        self.finished = terminal || truncated;
        (terminal, truncated)
    }

    pub(crate) fn steps(&self) -> usize {
        self.steps
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn names_round_trip() {
        for e in EnvName::ALL {
            assert_eq!(e.as_str().parse::<EnvName>().unwrap(), e);
            assert_eq!(e.make().spec().name, e);
        }
        assert!("pong".parse::<EnvName>().is_err());
        assert!(matches!(EnvName::Catch.tabular(), Err(TarlError::Unsupported(_))));
    }

    #[test]
    fn step_after_done_and_before_reset_are_protocol_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut env = Catch::new();
        assert!(matches!(env.step(1, &mut rng), Err(TarlError::Protocol(_))));
        env.reset(&mut rng);
        for _ in 0..9 {
            env.step(1, &mut rng).unwrap();
        }
        assert!(matches!(env.step(1, &mut rng), Err(TarlError::Protocol(_))));
    }

    fn rollout(env: &mut dyn Environment, seed: u64, policy: impl Fn(usize) -> usize) -> Vec<(Vec<f64>, f64, bool)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = vec![];
        env.reset(&mut rng);
        for t in 0..500 {
            let s = env.step(policy(t), &mut rng).unwrap();
            let done = s.done();
            out.push((s.observation, s.reward, done));
            if done {
                break;
            }
        }
        out
    }

    #[test]
    fn fixed_seed_gives_identical_trajectories() {
        for name in EnvName::ALL {
            let n = name.make().spec().n_actions;
            let pol = move |t: usize| (t * 7 + 3) % n;
            let a = rollout(name.make().as_mut(), 11, pol);
            let b = rollout(name.make().as_mut(), 11, pol);
            assert_eq!(a, b, "{name}");
        }
    }

    #[test]
    fn rewards_stay_in_range() {
        let allowed: &[(EnvName, &[f64])] =
            &[(EnvName::Gridworld5, &[0.0, 1.0]), (EnvName::Catch, &[-1.0, 0.0, 1.0]), (EnvName::Chain5, &[0.0, 1.0])];
        for &(name, vals) in allowed {
            for seed in 0..50 {
                let n = name.make().spec().n_actions;
                for (_, r, _) in rollout(name.make().as_mut(), seed, |t| (t * 31 + seed as usize) % n) {
                    assert!(vals.contains(&r), "{name}: {r}");
                }
            }
        }
    }
}
