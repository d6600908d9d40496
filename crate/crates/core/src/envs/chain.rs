use rand::{Rng, RngCore};

use super::{one_hot, EnvName, EnvSpec, Environment, EpisodeClock, Outcome, StepOutcome, TabularMdp};
use crate::error::Result;

const N: usize = 5;

/// Five-state random walk between two terminals. The single action moves
/// left or right with probability 1/2; leaving on the right pays +1.
#[derive(Debug, Clone)]
pub struct Chain {
    spec: EnvSpec,
    state: usize,
    clock: EpisodeClock,
}

impl Chain {
    pub fn new(gamma: f64) -> Self {
        Chain {
            spec: EnvSpec { name: EnvName::Chain5, obs_dim: N, n_actions: 1, max_episode_steps: 200, gamma },
            state: N / 2,
            clock: EpisodeClock::default(),
        }
    }

    pub fn state(&self) -> usize {
        self.state
    }

    pub fn set_state(&mut self, state: usize) {
        self.clock.reset();
        self.state = state.min(N - 1);
    }

    pub fn tabular(&self) -> TabularMdp {
        let outcomes = (0..N)
            .map(|s| {
                let left = if s == 0 {
                    Outcome { prob: 0.5, next: None, reward: 0.0 }
                } else {
                    Outcome { prob: 0.5, next: Some(s - 1), reward: 0.0 }
                };
                let right = if s == N - 1 {
                    Outcome { prob: 0.5, next: None, reward: 1.0 }
                } else {
                    Outcome { prob: 0.5, next: Some(s + 1), reward: 0.0 }
                };
                vec![vec![left, right]]
            })
            .collect();
        TabularMdp::new(1, outcomes, N / 2).expect("chain table is consistent")
    }
}

impl Environment for Chain {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, _rng: &mut dyn RngCore) -> Vec<f64> {
        self.clock.reset();
        self.state = N / 2;
        one_hot(N, self.state)
    }

    fn step(&mut self, action: usize, rng: &mut dyn RngCore) -> Result<StepOutcome> {
        self.clock.begin_step(&self.spec, action)?;
        let go_left = rng.gen_bool(0.5);
        let (exit, reward) = match (go_left, self.state) {
            (true, 0) => (true, 0.0),
            (false, s) if s == N - 1 => (true, 1.0),
            (true, s) => {
                self.state = s - 1;
                (false, 0.0)
            }
            (false, s) => {
                self.state = s + 1;
                (false, 0.0)
            }
        };
        let (terminated, truncated) = self.clock.end_step(&self.spec, exit);
        let observation = if exit { vec![0.0; N] } else { one_hot(N, self.state) };
        Ok(StepOutcome { observation, reward, terminated, truncated })
    }
}
