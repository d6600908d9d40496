//! Seeded training runs: interaction loop, evaluation, metrics and checkpoints.

use std::fs;
use std::path::{Path, PathBuf};

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tarl_core::agents::epsilon_at;
use tarl_core::envs::Environment;
use tarl_core::rng::{stream, RunRng, Stream};
use tarl_core::{DqnAgent, Network, ReplayBuffer, Transition};

use crate::config::{save_config, RunConfig};
use crate::error::{CliError, Result};
use crate::metrics::{metrics_file_name, write_metrics, MetricsRow, StepAccumulator};

/// Mean pool alignment on the last gradient step before a hard target copy
/// and on the first gradient step after it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardUpdateEvent {
    pub step: u64,
    pub before: f64,
    pub after: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub seed: u64,
    pub rows: Vec<MetricsRow>,
    pub gradient_steps: u64,
    /// Gradient steps where the kept batch scored below the pool on average.
    pub dominance_violations: u64,
    pub hard_updates: Vec<HardUpdateEvent>,
}

impl RunOutcome {
    /// `(step, eval_score)` at every evaluation point.
    pub fn eval_curve(&self) -> Vec<(u64, f64)> {
        self.rows.iter().filter_map(|r| r.eval_score.map(|s| (r.step, s))).collect()
    }

    pub fn final_eval(&self) -> Option<f64> {
        self.eval_curve().last().map(|&(_, s)| s)
    }
}

/// Evaluation steps `k·T/E` for `k = 1..=E`.
pub fn eval_steps(total_steps: u64, eval_points: usize) -> Vec<u64> {
    let e = eval_points as u64;
    (1..=e).map(|k| k * total_steps / e).collect()
}

/// Parameters saved at each evaluation point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub seed: u64,
    pub step: u64,
    pub online: Network,
    pub target: Network,
}

pub fn checkpoint_file_name(seed: u64) -> String {
    format!("checkpoint_seed{seed}.json")
}

/// Greedy rollouts of `agent` on a fresh environment. Returns the mean
/// undiscounted episode return. Touches neither the agent nor any buffer.
pub fn evaluate(agent: &DqnAgent, env: &mut dyn Environment, episodes: usize, rng: &mut dyn RngCore) -> Result<f64> {
    let mut total = 0.0;
    for _ in 0..episodes {
        let mut obs = env.reset(rng);
        loop {
            let action = agent.act(&obs, 0.0, rng)?;
            let out = env.step(action, rng)?;
            total += out.reward;
            if out.done() {
                break;
            }
            obs = out.observation;
        }
    }
    Ok(total / episodes as f64)
}

/// Full state of one seed's run, advanced one environment step at a time.
pub struct Trainer {
    config: RunConfig,
    seed: u64,
    agent: DqnAgent,
    buffer: ReplayBuffer,
    env: Box<dyn Environment>,
    eval_env: Box<dyn Environment>,
    obs: Vec<f64>,
    env_rng: RunRng,
    explore_rng: RunRng,
    replay_rng: RunRng,
    eval_rng: RunRng,
    step: u64,
    episode_return: f64,
    acc: StepAccumulator,
    gradient_steps: u64,
    dominance_violations: u64,
    last_pool: Option<f64>,
    pending_update: Option<(u64, f64)>,
    hard_updates: Vec<HardUpdateEvent>,
}

impl Trainer {
    pub fn new(config: &RunConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut env = config.env.make();
        let spec = env.spec().clone();
        let mut init_rng = stream(seed, Stream::Init);
        let agent = DqnAgent::new(config.agent.clone(), spec.obs_dim, spec.n_actions, &mut init_rng)?;
        let buffer = ReplayBuffer::new(config.buffer_capacity, spec.obs_dim, spec.n_actions)?;
        let mut env_rng = stream(seed, Stream::Env);
        let obs = env.reset(&mut env_rng);
        Ok(Trainer {
            config: config.clone(),
            seed,
            agent,
            buffer,
            env,
            eval_env: config.env.make(),
            obs,
            env_rng,
            explore_rng: stream(seed, Stream::Explore),
            replay_rng: stream(seed, Stream::Replay),
            eval_rng: stream(seed, Stream::Eval),
            step: 0,
            episode_return: 0.0,
            acc: StepAccumulator::default(),
            gradient_steps: 0,
            dominance_violations: 0,
            last_pool: None,
            pending_update: None,
            hard_updates: Vec::new(),
        })
    }

    pub fn agent(&self) -> &DqnAgent {
        &self.agent
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    /// Environment steps taken so far.
    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn epsilon(&self) -> f64 {
        epsilon_at(self.step.saturating_sub(1), &self.config.agent.epsilon, self.config.total_steps)
    }

    /// One environment step, then a gradient step once past `learning_starts`,
    /// then the target update. Returns the episode return if an episode ended.
    pub fn advance(&mut self) -> Result<Option<f64>> {
        self.step += 1;
        let t = self.step;
        let action = self.agent.act(&self.obs, self.epsilon(), &mut self.explore_rng)?;
        let out = self.env.step(action, &mut self.env_rng)?;
        self.episode_return += out.reward;
        let mut transition = Transition::new(self.obs.clone(), action, out.reward, out.observation.clone(), out.done());
        transition.truncated = out.truncated;
        self.buffer.push(transition)?;

        let mut trained_now = false;
        if t >= self.config.agent.learning_starts {
            let report = self.agent.train_step(&self.buffer, &mut self.replay_rng)?;
            if report.trained {
                trained_now = true;
                self.gradient_steps += 1;
                if !report.dominance_holds() {
                    self.dominance_violations += 1;
                }
                self.acc.add(report.loss, report.mean_pool_alignment, report.mean_selected_alignment);
                if let Some((step, before)) = self.pending_update.take() {
                    self.hard_updates.push(HardUpdateEvent { step, before, after: report.mean_pool_alignment });
                }
                self.last_pool = Some(report.mean_pool_alignment);
            }
        }
        if self.agent.update_target(t)? && trained_now {
            self.pending_update = self.last_pool.map(|p| (t, p));
        }

        if out.done() {
            let ret = self.episode_return;
            self.episode_return = 0.0;
            self.obs = self.env.reset(&mut self.env_rng);
            Ok(Some(ret))
        } else {
            self.obs = out.observation;
            Ok(None)
        }
    }

    /// Greedy evaluation on the separate evaluation environment and stream.
    pub fn evaluate(&mut self) -> Result<f64> {
        evaluate(&self.agent, self.eval_env.as_mut(), self.config.eval_episodes, &mut self.eval_rng)
    }

    /// Row for the current step, draining the per-gradient-step means.
    pub fn take_row(&mut self, episode_return: Option<f64>, eval_score: Option<f64>) -> MetricsRow {
        let (loss, pool, selected) = self.acc.drain();
        MetricsRow {
            seed: self.seed,
            step: self.step,
            episode_return,
            eval_score,
            loss,
            mean_pool_alignment: pool,
            mean_selected_alignment: selected,
            epsilon: self.epsilon(),
        }
    }

    pub fn checkpoint(&self) -> Checkpoint {
        let state = self.agent.state();
        Checkpoint { seed: self.seed, step: self.step, online: state.online.clone(), target: state.target.clone() }
    }

    fn finish(self, rows: Vec<MetricsRow>) -> RunOutcome {
        RunOutcome {
            seed: self.seed,
            rows,
            gradient_steps: self.gradient_steps,
            dominance_violations: self.dominance_violations,
            hard_updates: self.hard_updates,
        }
    }
}

/// Runs one seed to completion. With `checkpoint_dir`, the parameters are
/// saved there at every evaluation point.
pub fn run_seed(config: &RunConfig, seed: u64, checkpoint_dir: Option<&Path>) -> Result<RunOutcome> {
    let mut trainer = Trainer::new(config, seed)?;
    let evals = eval_steps(config.total_steps, config.eval_points);
    let mut next_eval = evals.iter().copied().peekable();
    let mut rows = Vec::new();
    while trainer.step_count() < config.total_steps {
        let episode_return = trainer.advance()?;
        let mut eval_score = None;
        while next_eval.peek() == Some(&trainer.step_count()) {
            next_eval.next();
            eval_score = Some(trainer.evaluate()?);
        }
        if eval_score.is_some() {
            if let Some(dir) = checkpoint_dir {
                let path = dir.join(checkpoint_file_name(seed));
                let json = serde_json::to_string(&trainer.checkpoint()).expect("checkpoint serializes");
                fs::write(&path, json).map_err(|e| CliError::io(path, e))?;
            }
        }
        if episode_return.is_some() || eval_score.is_some() {
            rows.push(trainer.take_row(episode_return, eval_score));
        }
    }
    log::info!("seed {seed}: {} gradient steps", trainer.gradient_steps);
    Ok(trainer.finish(rows))
}

/// Runs every configured seed and writes `metrics_seed<k>.csv`, checkpoints
/// and the resolved `config.json` into `output_dir`.
pub fn run_training(config: &RunConfig) -> Result<Vec<RunOutcome>> {
    config.validate()?;
    let dir: PathBuf = config.output_dir.clone();
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let config_path = dir.join("config.json");
    save_config(config, &config_path).map_err(|e| CliError::io(config_path, e))?;
    let outcomes: Vec<RunOutcome> =
        config.seeds.par_iter().map(|&seed| run_seed(config, seed, Some(&dir))).collect::<Result<_>>()?;
    for outcome in &outcomes {
        write_metrics(&dir.join(metrics_file_name(outcome.seed)), &outcome.rows)?;
    }
    Ok(outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tarl_core::envs::EnvName;

    fn small(env: EnvName) -> RunConfig {
        let mut c = RunConfig::new(env, vec![0]);
        c.total_steps = 600;
        c.eval_points = 3;
        c.eval_episodes = 2;
        c.buffer_capacity = 500;
        c.agent.learning_starts = 100;
        c.agent.hidden_sizes = vec![16];
        c.agent.target_update = tarl_core::agents::TargetUpdate::Hard { period: 50 };
        c
    }

    #[test]
    fn eval_steps_are_evenly_spaced() {
        assert_eq!(eval_steps(100, 4), vec![25, 50, 75, 100]);
        assert_eq!(eval_steps(10, 3), vec![3, 6, 10]);
    }

    #[test]
    fn rows_cover_episode_ends_and_evaluations() {
        let out = run_seed(&small(EnvName::Catch), 5, None).unwrap();
        let evals: Vec<u64> = out.eval_curve().iter().map(|e| e.0).collect();
        assert_eq!(evals, vec![200, 400, 600]);
        // Catch episodes are exactly 9 steps long.
        let ends = out.rows.iter().filter(|r| r.episode_return.is_some()).count();
        assert_eq!(ends, 600 / 9);
        assert!(out.rows.iter().all(|r| r.seed == 5));
        assert_eq!(out.gradient_steps, 501);
        assert!(out.rows.windows(2).all(|w| w[0].step < w[1].step));
    }

    #[test]
    fn evaluation_leaves_training_untouched() {
        let config = small(EnvName::Gridworld5);
        let mut plain = Trainer::new(&config, 9).unwrap();
        let mut probed = Trainer::new(&config, 9).unwrap();
        for _ in 0..300 {
            plain.advance().unwrap();
            probed.advance().unwrap();
        }
        let before = (probed.buffer().len(), probed.agent().online().clone(), probed.buffer().write_cursor());
        probed.evaluate().unwrap();
        probed.evaluate().unwrap();
        assert_eq!(before, (probed.buffer().len(), probed.agent().online().clone(), probed.buffer().write_cursor()));
        for _ in 0..200 {
            plain.advance().unwrap();
            probed.advance().unwrap();
        }
        assert_eq!(plain.agent().online(), probed.agent().online());
    }

    #[test]
    fn hard_updates_are_recorded_between_gradient_steps() {
        let mut config = small(EnvName::Catch);
        config.agent.tarl_enabled = true;
        let out = run_seed(&config, 1, None).unwrap();
        assert_eq!(out.dominance_violations, 0);
        // Copies at 100, 150, ..., 550 each see a following gradient step.
        assert_eq!(out.hard_updates.iter().map(|e| e.step).collect::<Vec<_>>(), (2..=11).map(|k| k * 50).collect::<Vec<_>>());
        for e in &out.hard_updates {
            assert!((0.0..=1.0).contains(&e.before) && (0.0..=1.0).contains(&e.after));
        }
    }
}
