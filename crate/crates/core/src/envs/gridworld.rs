use rand::RngCore;

use super::{one_hot, EnvName, EnvSpec, Environment, EpisodeClock, Outcome, StepOutcome, TabularMdp};
use crate::error::Result;

const SIZE: usize = 5;
const GOAL: (usize, usize) = (SIZE - 1, SIZE - 1);

const UP: usize = 0;
const DOWN: usize = 1;
const LEFT: usize = 2;

/// 5×5 deterministic grid. Start at (0, 0), +1 for entering (4, 4), which
/// ends the episode. Moves into a wall leave the agent in place.
#[derive(Debug, Clone)]
pub struct Gridworld {
    spec: EnvSpec,
    pos: (usize, usize),
    clock: EpisodeClock,
}

impl Default for Gridworld {
    fn default() -> Self {
        Self::new()
    }
}

impl Gridworld {
    pub const UP: usize = UP;
    pub const DOWN: usize = DOWN;
    pub const LEFT: usize = LEFT;
    pub const RIGHT: usize = 3;

    pub fn new() -> Self {
        Gridworld {
            spec: EnvSpec { name: EnvName::Gridworld5, obs_dim: SIZE * SIZE, n_actions: 4, max_episode_steps: 100, gamma: 0.99 },
            pos: (0, 0),
            clock: EpisodeClock::default(),
        }
    }

    /// `(row, col)`.
    pub fn position(&self) -> (usize, usize) {
        self.pos
    }

    /// Places the agent, for tests and probes. Resets the step counter.
    pub fn set_position(&mut self, row: usize, col: usize) {
        self.clock.reset();
        self.pos = (row.min(SIZE - 1), col.min(SIZE - 1));
    }

    fn index((r, c): (usize, usize)) -> usize {
        r * SIZE + c
    }

    fn moved((r, c): (usize, usize), action: usize) -> (usize, usize) {
        match action {
            UP => (r.saturating_sub(1), c),
            DOWN => ((r + 1).min(SIZE - 1), c),
            LEFT => (r, c.saturating_sub(1)),
            _ => (r, (c + 1).min(SIZE - 1)),
        }
    }

    pub fn tabular(&self) -> TabularMdp {
        let n = SIZE * SIZE;
        let mut outcomes = vec![vec![Vec::new(); 4]; n];
        for (s, row) in outcomes.iter_mut().enumerate() {
            let pos = (s / SIZE, s % SIZE);
            if pos == GOAL {
                continue;
            }
            for (a, cell) in row.iter_mut().enumerate() {
                let next = Self::moved(pos, a);
                *cell = if next == GOAL {
                    vec![Outcome { prob: 1.0, next: None, reward: 1.0 }]
                } else {
                    vec![Outcome { prob: 1.0, next: Some(Self::index(next)), reward: 0.0 }]
                };
            }
        }
        TabularMdp::new(4, outcomes, Self::index((0, 0))).expect("gridworld table is consistent")
    }
}

impl Environment for Gridworld {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, _rng: &mut dyn RngCore) -> Vec<f64> {
        self.clock.reset();
        self.pos = (0, 0);
        one_hot(SIZE * SIZE, 0)
    }

    fn step(&mut self, action: usize, _rng: &mut dyn RngCore) -> Result<StepOutcome> {
        self.clock.begin_step(&self.spec, action)?;
        self.pos = Self::moved(self.pos, action);
        let at_goal = self.pos == GOAL;
        let (terminated, truncated) = self.clock.end_step(&self.spec, at_goal);
        Ok(StepOutcome {
            observation: one_hot(SIZE * SIZE, Self::index(self.pos)),
            reward: if at_goal { 1.0 } else { 0.0 },
            terminated,
            truncated,
        })
    }
}
