use rand::{Rng, RngCore};

use super::{EnvName, EnvSpec, Environment, EpisodeClock, StepOutcome};
use crate::error::Result;

const ROWS: usize = 10;
const COLS: usize = 5;
const START_PADDLE: usize = COLS / 2;
const EPISODE_STEPS: usize = ROWS - 1;

/// Ball falls one row per step from a random top column; the paddle on the
/// bottom row moves left, stays or moves right. When the ball reaches the
/// bottom row the episode ends with +1 for a catch and −1 for a miss.
#[derive(Debug, Clone)]
pub struct Catch {
    spec: EnvSpec,
    ball: (usize, usize),
    paddle: usize,
    clock: EpisodeClock,
}

impl Default for Catch {
    fn default() -> Self {
        Self::new()
    }
}

impl Catch {
    pub fn new() -> Self {
        Catch {
            spec: EnvSpec { name: EnvName::Catch, obs_dim: ROWS * COLS, n_actions: 3, max_episode_steps: EPISODE_STEPS, gamma: 0.99 },
            ball: (0, 0),
            paddle: START_PADDLE,
            clock: EpisodeClock::default(),
        }
    }

    /// `(row, col)` of the ball.
    pub fn ball(&self) -> (usize, usize) {
        self.ball
    }

    pub fn paddle(&self) -> usize {
        self.paddle
    }

    fn observation(&self) -> Vec<f64> {
        let mut obs = vec![0.0; ROWS * COLS];
        obs[self.ball.0 * COLS + self.ball.1] = 1.0;
        obs[(ROWS - 1) * COLS + self.paddle] = 1.0;
        obs
    }
}

fn move_paddle(paddle: usize, action: usize) -> usize {
    (paddle + action).saturating_sub(1).min(COLS - 1)
}

impl Environment for Catch {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> Vec<f64> {
        self.clock.reset();
        self.ball = (0, rng.gen_range(0..COLS));
        self.paddle = START_PADDLE;
        self.observation()
    }

    fn step(&mut self, action: usize, _rng: &mut dyn RngCore) -> Result<StepOutcome> {
        self.clock.begin_step(&self.spec, action)?;
        self.paddle = move_paddle(self.paddle, action);
        self.ball.0 += 1;
        let landed = self.ball.0 == ROWS - 1;
        let reward = match (landed, self.paddle == self.ball.1) {
            (false, _) => 0.0,
            (true, true) => 1.0,
            (true, false) => -1.0,
        };
        let (terminated, truncated) = self.clock.end_step(&self.spec, landed);
        debug_assert!(!landed || self.clock.steps() == EPISODE_STEPS);
        Ok(StepOutcome { observation: self.observation(), reward, terminated, truncated })
    }
}

/// Expected return from a start column by backward induction over the
/// paddle position, combining action values with `combine`.
fn catch_value(ball_col: usize, combine: impl Fn([f64; 3]) -> f64) -> f64 {
    let mut value: Vec<f64> = (0..COLS).map(|p| if p == ball_col { 1.0 } else { -1.0 }).collect();
    for _ in 0..EPISODE_STEPS {
        value = (0..COLS).map(|p| combine([0, 1, 2].map(|a| value[move_paddle(p, a)]))).collect();
    }
    value[START_PADDLE]
}

/// Exact expected return of the uniform random policy, averaged over start columns.
pub fn catch_random_policy_return() -> f64 {
    (0..COLS).map(|c| catch_value(c, |v| v.iter().sum::<f64>() / 3.0)).sum::<f64>() / COLS as f64
}

/// Exact optimal expected return, averaged over start columns.
pub fn catch_optimal_return() -> f64 {
    (0..COLS).map(|c| catch_value(c, |v| v.into_iter().fold(f64::NEG_INFINITY, f64::max))).sum::<f64>() / COLS as f64
}
