//! DQN and DDQN agents with target networks and alignment-based oversampling.
//!
//! With oversampling enabled a train step draws `m + b` transitions, scores
//! each one by target alignment, and trains on the `m` best aligned. With it
//! disabled the step is plain (D)DQN on `m` uniform draws.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::alignment::{alignment_score, select_top_k, Epsilon, ErrorPair};
use crate::error::{Result, TarlError};
use crate::nn::{Matrix, NetworkParams, OptimizerConfig, OptimizerState};
use crate::replay::{ReplayBuffer, Transition};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Dqn,
    Ddqn,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum TargetUpdate {
    /// Copy the online network every `period` environment steps.
    Hard { period: usize },
    /// Polyak averaging with coefficient `tau` every environment step.
    Soft { tau: f64 },
}

/// Linear decay from `start` to `end` over `fraction` of the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub fraction: f64,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        EpsilonSchedule { start: 1.0, end: 0.01, fraction: 0.05 }
    }
}

pub fn epsilon_at(step: u64, schedule: &EpsilonSchedule, total_steps: u64) -> f64 {
    let window = schedule.fraction * total_steps as f64;
    if window <= 0.0 || step as f64 >= window {
        return schedule.end;
    }
    schedule.start + (schedule.end - schedule.start) * (step as f64 / window)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub variant: Variant,
    pub tarl_enabled: bool,
    pub batch_size: usize,
    pub oversample: usize,
    pub target_update: TargetUpdate,
    pub gamma: f64,
    pub learning_starts: u64,
    pub epsilon: EpsilonSchedule,
    pub optimizer: OptimizerConfig,
    pub hidden_sizes: Vec<usize>,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            variant: Variant::Dqn,
            tarl_enabled: false,
            batch_size: 32,
            oversample: 32,
            target_update: TargetUpdate::Hard { period: 1000 },
            gamma: 0.99,
            learning_starts: 1000,
            epsilon: EpsilonSchedule::default(),
            optimizer: OptimizerConfig::default(),
            hidden_sizes: vec![64, 64],
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(TarlError::arg("batch_size must be at least 1"));
        }
        if self.tarl_enabled && self.oversample == 0 {
            return Err(TarlError::arg("oversample must be at least 1 when tarl is enabled"));
        }
        match self.target_update {
            TargetUpdate::Hard { period: 0 } => return Err(TarlError::arg("hard update period must be at least 1")),
            TargetUpdate::Soft { tau } if !(tau > 0.0 && tau <= 1.0) => {
                return Err(TarlError::arg(format!("soft update tau must lie in (0, 1], got {tau}")))
            }
            _ => {}
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(TarlError::arg(format!("gamma must lie in [0, 1], got {}", self.gamma)));
        }
        let e = &self.epsilon;
        if !(0.0..=1.0).contains(&e.start) || !(0.0..=1.0).contains(&e.end) || !(0.0..=1.0).contains(&e.fraction) {
            return Err(TarlError::arg("epsilon schedule values must lie in [0, 1]"));
        }
        if self.hidden_sizes.contains(&0) {
            return Err(TarlError::arg("hidden sizes must be positive"));
        }
        self.optimizer.validate()
    }

    /// Transitions drawn per train step.
    pub fn pool_size(&self) -> usize {
        if self.tarl_enabled {
            self.batch_size + self.oversample
        } else {
            self.batch_size
        }
    }
}

/// Online network `θ`, target network `θ̄`, optimizer and gradient-step count.
#[derive(Debug, Clone)]
pub struct AgentState<T> {
    pub online: NetworkParams<T>,
    pub target: NetworkParams<T>,
    pub optimizer: OptimizerState<T>,
    pub step_count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport<T> {
    pub trained: bool,
    pub loss: T,
    pub mean_selected_alignment: T,
    pub mean_pool_alignment: T,
    /// Buffer slots of the transitions used for the gradient step.
    pub selected_indices: Vec<usize>,
}

impl<T: Scalar> StepReport<T> {
    fn skipped() -> Self {
        StepReport {
            trained: false,
            loss: T::zero(),
            mean_selected_alignment: T::zero(),
            mean_pool_alignment: T::zero(),
            selected_indices: Vec::new(),
        }
    }

    /// Top-k selection never lowers the mean score (up to summation rounding).
    pub fn dominance_holds(&self) -> bool {
        !self.trained || self.mean_selected_alignment >= self.mean_pool_alignment - T::lit(1e-12)
    }
}

/// Per-transition quantities from one pass over a batch.
struct BatchEval<T> {
    q_taken: Vec<T>,
    online_targets: Vec<T>,
    offline_targets: Vec<T>,
}

#[inline]
fn argmax<T: Scalar>(row: &[T]) -> usize {
    (1..row.len()).fold(0, |best, a| if row[a] > row[best] { a } else { best })
}

#[inline]
fn max_of<T: Scalar>(row: &[T]) -> T {
    row[argmax(row)]
}

#[inline]
fn bootstrap<T: Scalar>(t: &Transition<T>, gamma: T, next_value: T) -> T {
    if t.bootstrap_mask() == T::zero() {
        t.reward
    } else {
        t.reward + gamma * next_value
    }
}

fn stack<'a, T: Scalar>(batch: &[&'a Transition<T>], pick: impl Fn(&'a Transition<T>) -> &'a [T]) -> Result<Matrix<T>> {
    let rows: Vec<&[T]> = batch.iter().map(|t| pick(t)).collect();
    Matrix::from_rows(&rows)
}

#[derive(Debug, Clone)]
pub struct Agent<T> {
    config: AgentConfig,
    state: AgentState<T>,
    eps: Epsilon<T>,
}

impl<T: Scalar> Agent<T> {
    /// Fresh agent with He-initialized `θ` and `θ̄ = θ`.
    pub fn new<R: Rng + ?Sized>(config: AgentConfig, obs_dim: usize, n_actions: usize, rng: &mut R) -> Result<Self> {
        let mut sizes = vec![obs_dim];
        sizes.extend(&config.hidden_sizes);
        sizes.push(n_actions);
        let online = NetworkParams::init_he(&sizes, rng)?;
        Self::from_network(config, online)
    }

    /// Agent around a given online network; the target starts as a copy.
    pub fn from_network(config: AgentConfig, online: NetworkParams<T>) -> Result<Self> {
        config.validate()?;
        let optimizer = OptimizerState::new(config.optimizer.clone(), &online)?;
        let state = AgentState { target: online.clone(), online, optimizer, step_count: 0 };
        Ok(Agent { config, state, eps: Epsilon::default() })
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn state(&self) -> &AgentState<T> {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut AgentState<T> {
        &mut self.state
    }

    pub fn online(&self) -> &NetworkParams<T> {
        &self.state.online
    }

    pub fn target(&self) -> &NetworkParams<T> {
        &self.state.target
    }

    pub fn n_actions(&self) -> usize {
        self.state.online.out_dim()
    }

    fn gamma(&self) -> T {
        T::lit(self.config.gamma)
    }

    pub fn q_values(&self, obs: &[T]) -> Result<Vec<T>> {
        let q = self.state.online.forward(&Matrix::from_rows(&[obs])?)?;
        Ok(q.row(0).to_vec())
    }

    /// ε-greedy on the online network; greedy ties go to the lowest action.
    /// No random draw happens when `epsilon == 0`.
    pub fn act<R: Rng + ?Sized>(&self, obs: &[T], epsilon: f64, rng: &mut R) -> Result<usize> {
        if epsilon > 0.0 && rng.gen::<f64>() < epsilon {
            return Ok(rng.gen_range(0..self.n_actions()));
        }
        Ok(argmax(&self.q_values(obs)?))
    }

    fn check_batch(batch: &[&Transition<T>]) -> Result<()> {
        if batch.is_empty() {
            return Err(TarlError::arg("empty batch"));
        }
        Ok(())
    }

    /// `y = r + (1 − d) γ max_a Q(s', a; θ̄)`.
    pub fn targets_dqn(&self, batch: &[&Transition<T>]) -> Result<Vec<T>> {
        Self::check_batch(batch)?;
        let next = self.state.target.forward(&stack(batch, |t| &t.next_state)?)?;
        let g = self.gamma();
        Ok(batch.iter().enumerate().map(|(j, t)| bootstrap(t, g, max_of(next.row(j)))).collect())
    }

    /// `y = r + (1 − d) γ Q(s', argmax_a Q(s', a; θ); θ̄)`.
    pub fn targets_ddqn(&self, batch: &[&Transition<T>]) -> Result<Vec<T>> {
        Self::check_batch(batch)?;
        let next = stack(batch, |t| &t.next_state)?;
        let online = self.state.online.forward(&next)?;
        let target = self.state.target.forward(&next)?;
        let g = self.gamma();
        Ok(batch.iter().enumerate().map(|(j, t)| bootstrap(t, g, target.get(j, argmax(online.row(j))))).collect())
    }

    /// Targets of the configured variant.
    pub fn targets(&self, batch: &[&Transition<T>]) -> Result<Vec<T>> {
        match self.config.variant {
            Variant::Dqn => self.targets_dqn(batch),
            Variant::Ddqn => self.targets_ddqn(batch),
        }
    }

    fn evaluate_batch(&self, batch: &[&Transition<T>]) -> Result<BatchEval<T>> {
        Self::check_batch(batch)?;
        let states = stack(batch, |t| &t.state)?;
        let next = stack(batch, |t| &t.next_state)?;
        let q = self.state.online.forward(&states)?;
        let next_online = self.state.online.forward(&next)?;
        let next_target = self.state.target.forward(&next)?;
        let g = self.gamma();
        let n = batch.len();
        let mut eval = BatchEval { q_taken: Vec::with_capacity(n), online_targets: Vec::with_capacity(n), offline_targets: Vec::with_capacity(n) };
        for (j, t) in batch.iter().enumerate() {
            if t.action >= q.cols() {
                return Err(TarlError::Index { index: t.action, limit: q.cols() });
            }
            eval.q_taken.push(q.get(j, t.action));
            // With θ in both roles the DDQN rule reduces to the max rule.
            eval.online_targets.push(bootstrap(t, g, max_of(next_online.row(j))));
            let offline_next = match self.config.variant {
                Variant::Dqn => max_of(next_target.row(j)),
                Variant::Ddqn => next_target.get(j, argmax(next_online.row(j))),
            };
            eval.offline_targets.push(bootstrap(t, g, offline_next));
        }
        Ok(eval)
    }

    /// Online error `δ = y_θ − Q(s, a; θ)` and offline error `δ̄ = y_θ̄ − Q(s, a; θ)`.
    pub fn td_error_pair(&self, t: &Transition<T>) -> Result<ErrorPair<T>> {
        Ok(self.td_error_pairs(&[t])?[0])
    }

    pub fn td_error_pairs(&self, batch: &[&Transition<T>]) -> Result<Vec<ErrorPair<T>>> {
        let e = self.evaluate_batch(batch)?;
        Ok((0..batch.len()).map(|j| ErrorPair::new(e.online_targets[j] - e.q_taken[j], e.offline_targets[j] - e.q_taken[j])).collect())
    }

    /// One gradient step, with alignment-based oversampling when enabled.
    ///
    /// Skips (returns an untrained report) while the buffer holds fewer than
    /// the pool size.
    pub fn train_step<R: Rng + ?Sized>(&mut self, buffer: &ReplayBuffer<T>, rng: &mut R) -> Result<StepReport<T>> {
        let m = self.config.batch_size;
        let pool_size = self.config.pool_size();
        if buffer.len() < pool_size {
            return Ok(StepReport::skipped());
        }
        let pool = buffer.sample_uniform(pool_size, rng)?;
        let transitions: Vec<&Transition<T>> = pool.iter().map(|&(_, t)| t).collect();
        let eval = self.evaluate_batch(&transitions)?;
        let scores: Vec<T> = (0..pool_size)
            .map(|j| {
                let pair = ErrorPair::new(eval.online_targets[j] - eval.q_taken[j], eval.offline_targets[j] - eval.q_taken[j]);
                alignment_score(pair, self.eps).value
            })
            .collect();
        let kept = if self.config.tarl_enabled { select_top_k(&scores, m)? } else { (0..m).collect() };

        let mean = |idx: &mut dyn Iterator<Item = usize>, n: usize| idx.map(|j| scores[j]).sum::<T>() / T::lit(n as f64);
        let mean_pool_alignment = mean(&mut (0..pool_size), pool_size);
        let mean_selected_alignment = mean(&mut kept.iter().copied(), m);

        let selected: Vec<&Transition<T>> = kept.iter().map(|&j| transitions[j]).collect();
        let states = stack(&selected, |t| &t.state)?;
        let actions: Vec<usize> = selected.iter().map(|t| t.action).collect();
        let targets: Vec<T> = kept.iter().map(|&j| eval.offline_targets[j]).collect();
        let (loss, grads) = self.state.online.backward_mse(&states, &actions, &targets)?;
        self.state.optimizer.apply_update(&mut self.state.online, &grads)?;
        self.state.step_count += 1;

        let report = StepReport {
            trained: true,
            loss,
            mean_selected_alignment,
            mean_pool_alignment,
            selected_indices: kept.iter().map(|&j| pool[j].0).collect(),
        };
        debug_assert!(report.dominance_holds());
        Ok(report)
    }

    /// `θ̄ ← θ`.
    pub fn hard_update(&mut self) {
        self.state.target.clone_from(&self.state.online);
    }

    /// `θ̄ ← τ θ + (1 − τ) θ̄`.
    pub fn soft_update(&mut self, tau: f64) -> Result<()> {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(TarlError::arg(format!("tau must lie in (0, 1], got {tau}")));
        }
        let tau = T::lit(tau);
        let keep = T::one() - tau;
        for (tgt, &on) in self.state.target.params_mut().zip(self.state.online.params()) {
            *tgt = tau * on + keep * *tgt;
        }
        Ok(())
    }

    /// Applies the configured target update after environment step `env_step`.
    /// Returns true when a hard copy happened.
    pub fn update_target(&mut self, env_step: u64) -> Result<bool> {
        match self.config.target_update {
            TargetUpdate::Hard { period } => {
                if env_step % period as u64 == 0 {
                    self.hard_update();
                    return Ok(true);
                }
                Ok(false)
            }
            TargetUpdate::Soft { tau } => {
                self.soft_update(tau)?;
                Ok(false)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Layer, OptimizerConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn one_hot(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }

    /// Linear net on one-hot states: `Q(s_i, a) = table[a][i]`.
    fn table_net(table: &[&[f64]]) -> NetworkParams<f64> {
        NetworkParams::new(vec![Layer::new(Matrix::from_rows(table).unwrap(), vec![0.0; table.len()]).unwrap()]).unwrap()
    }

    fn agent_with(cfg: AgentConfig, online: &[&[f64]], target: &[&[f64]]) -> Agent<f64> {
        let mut a = Agent::from_network(cfg, table_net(online)).unwrap();
        a.state_mut().target = table_net(target);
        a
    }

    fn cfg(variant: Variant, gamma: f64) -> AgentConfig {
        AgentConfig { variant, gamma, optimizer: OptimizerConfig::sgd(0.1), ..Default::default() }
    }

    #[test]
    fn epsilon_schedule_points() {
        let s = EpsilonSchedule::default();
        assert_eq!(epsilon_at(0, &s, 10_000), 1.0);
        assert_eq!(epsilon_at(500, &s, 10_000), 0.01);
        assert_eq!(epsilon_at(9_999, &s, 10_000), 0.01);
        assert!((epsilon_at(250, &s, 10_000) - 0.505).abs() < 1e-12);
        assert_eq!(epsilon_at(3, &EpsilonSchedule { fraction: 0.0, ..s }, 100), 0.01);
    }

    #[test]
    fn greedy_action_and_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = Agent::from_network(cfg(Variant::Dqn, 0.9), table_net(&[&[1.0], &[3.0], &[2.0]])).unwrap();
        assert_eq!(a.act(&[1.0], 0.0, &mut rng).unwrap(), 1);
        let tie = Agent::from_network(cfg(Variant::Dqn, 0.9), table_net(&[&[2.0], &[2.0]])).unwrap();
        assert_eq!(tie.act(&[1.0], 0.0, &mut rng).unwrap(), 0);
    }

    #[test]
    fn fully_random_action_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = Agent::from_network(cfg(Variant::Dqn, 0.9), table_net(&[&[5.0], &[0.0], &[0.0], &[0.0]])).unwrap();
        let n = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[a.act(&[1.0], 1.0, &mut rng).unwrap()] += 1;
        }
        let sigma = (0.25f64 * 0.75 / n as f64).sqrt();
        for c in counts {
            assert!((c as f64 / n as f64 - 0.25).abs() <= 4.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn dqn_targets_by_hand() {
        // Two one-hot states, two actions. Target table: Q̄(s0) = [1, 4], Q̄(s1) = [2, -1].
        let a = agent_with(cfg(Variant::Dqn, 0.9), &[&[0.0, 0.0], &[0.0, 0.0]], &[&[1.0, 2.0], &[4.0, -1.0]]);
        let t0 = Transition::new(one_hot(2, 1), 0, 0.5, one_hot(2, 0), false);
        let t1 = Transition::new(one_hot(2, 0), 1, -1.0, one_hot(2, 1), false);
        let terminal = Transition::new(one_hot(2, 0), 0, 1.0, one_hot(2, 0), true);
        let y = a.targets_dqn(&[&t0, &t1, &terminal]).unwrap();
        assert!((y[0] - (0.5 + 0.9 * 4.0)).abs() < 1e-15);
        assert!((y[1] - (-1.0 + 0.9 * 2.0)).abs() < 1e-15);
        assert_eq!(y[2], 1.0);

        let mut truncated = terminal.clone();
        truncated.truncated = true;
        assert!((a.targets_dqn(&[&truncated]).unwrap()[0] - (1.0 + 0.9 * 4.0)).abs() < 1e-15);

        let zero = agent_with(cfg(Variant::Dqn, 0.0), &[&[0.0, 0.0], &[0.0, 0.0]], &[&[1.0, 2.0], &[4.0, -1.0]]);
        assert_eq!(zero.targets_dqn(&[&t0]).unwrap(), vec![0.5]);
    }

    #[test]
    fn ddqn_decouples_selection_from_evaluation() {
        // Online prefers action 0 in s0, target values there are [0, 10].
        let a = agent_with(cfg(Variant::Ddqn, 1.0), &[&[5.0], &[1.0]], &[&[0.0], &[10.0]]);
        let t = Transition::new(vec![1.0], 0, 0.0, vec![1.0], false);
        assert_eq!(a.targets_ddqn(&[&t]).unwrap(), vec![0.0]);
        assert_eq!(a.targets_dqn(&[&t]).unwrap(), vec![10.0]);
        let done = Transition::new(vec![1.0], 0, 2.5, vec![1.0], true);
        assert_eq!(a.targets_ddqn(&[&done]).unwrap(), vec![2.5]);
    }

    #[test]
    fn ddqn_equals_dqn_when_networks_coincide() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = Agent::<f64>::new(AgentConfig { variant: Variant::Ddqn, ..Default::default() }, 6, 3, &mut rng).unwrap();
        let batch: Vec<Transition<f64>> = (0..20)
            .map(|i| Transition::new((0..6).map(|k| ((i * 7 + k) % 5) as f64 - 2.0).collect(), i % 3, 0.1 * i as f64, (0..6).map(|k| ((i + k) % 4) as f64).collect(), i % 5 == 0))
            .collect();
        let refs: Vec<&Transition<f64>> = batch.iter().collect();
        assert_eq!(a.targets_ddqn(&refs).unwrap(), a.targets_dqn(&refs).unwrap());
    }

    #[test]
    fn td_pairs_by_hand() {
        // Q(s0) = [1, 2], Q(s1) = [0.5, 3]; Q̄(s1) = [4, 0].
        let a = agent_with(cfg(Variant::Dqn, 0.5), &[&[1.0, 0.5], &[2.0, 3.0]], &[&[0.0, 4.0], &[0.0, 0.0]]);
        let t = Transition::new(one_hot(2, 0), 1, 1.0, one_hot(2, 1), false);
        let p = a.td_error_pair(&t).unwrap();
        // δ = 1 + 0.5·3 − 2 = 0.5, δ̄ = 1 + 0.5·4 − 2 = 1.
        assert!((p.online - 0.5).abs() < 1e-15);
        assert!((p.offline - 1.0).abs() < 1e-15);

        let term = Transition::new(one_hot(2, 0), 1, 1.0, one_hot(2, 1), true);
        let p = a.td_error_pair(&term).unwrap();
        assert_eq!(p.online, -1.0);
        assert_eq!(p.offline, -1.0);

        let same = Agent::from_network(cfg(Variant::Ddqn, 0.5), table_net(&[&[1.0, 0.5], &[2.0, 3.0]])).unwrap();
        let p = same.td_error_pair(&t).unwrap();
        assert_eq!(p.online, p.offline);
    }

    #[test]
    fn soft_update_arithmetic_and_tau_one() {
        let mut a = agent_with(cfg(Variant::Dqn, 0.9), &[&[1.0]], &[&[0.0]]);
        a.soft_update(0.005).unwrap();
        assert!((a.target().layers()[0].weights.get(0, 0) - 0.005).abs() < 1e-15);
        a.soft_update(1.0).unwrap();
        assert_eq!(a.target(), a.online());
        assert!(a.soft_update(0.0).is_err());
        assert!(a.soft_update(1.5).is_err());
    }

    #[test]
    fn soft_updates_contract_geometrically() {
        let tau = 0.05;
        let mut a = agent_with(cfg(Variant::Dqn, 0.9), &[&[2.0, -1.0]], &[&[-3.0, 4.0]]);
        let gap0: Vec<f64> = a.target().to_flat().iter().zip(a.online().to_flat()).map(|(t, o)| t - o).collect();
        for k in 1..=40 {
            a.soft_update(tau).unwrap();
            let expected = (1.0 - tau as f64).powi(k);
            for ((t, o), g0) in a.target().to_flat().iter().zip(a.online().to_flat()).zip(&gap0) {
                assert!(((t - o) - expected * g0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hard_update_copies_and_decouples() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut a = Agent::<f64>::new(AgentConfig::default(), 4, 2, &mut rng).unwrap();
        for p in a.state_mut().online.params_mut() {
            *p += 0.25;
        }
        assert_ne!(a.target(), a.online());
        a.hard_update();
        let probe = Matrix::from_rows(&[[1.0, 0.0, -2.0, 0.5], [0.3, 0.3, 0.3, 0.3]]).unwrap();
        assert_eq!(a.target().forward(&probe).unwrap(), a.online().forward(&probe).unwrap());
        let snapshot = a.target().clone();
        a.hard_update();
        assert_eq!(a.target(), &snapshot);
        for p in a.state_mut().online.params_mut() {
            *p -= 1.0;
        }
        assert_eq!(a.target(), &snapshot);
    }

    #[test]
    fn update_target_schedule() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = AgentConfig { target_update: TargetUpdate::Hard { period: 3 }, ..Default::default() };
        let mut a = Agent::<f64>::new(c, 2, 2, &mut rng).unwrap();
        let hits: Vec<bool> = (1..=7).map(|t| a.update_target(t).unwrap()).collect();
        assert_eq!(hits, vec![false, false, true, false, false, true, false]);
    }

    #[test]
    fn config_validation() {
        assert!(AgentConfig::default().validate().is_ok());
        assert!(AgentConfig { batch_size: 0, ..Default::default() }.validate().is_err());
        assert!(AgentConfig { tarl_enabled: true, oversample: 0, ..Default::default() }.validate().is_err());
        assert!(AgentConfig { target_update: TargetUpdate::Soft { tau: 0.0 }, ..Default::default() }.validate().is_err());
        assert!(AgentConfig { target_update: TargetUpdate::Hard { period: 0 }, ..Default::default() }.validate().is_err());
        assert_eq!(AgentConfig { tarl_enabled: true, ..Default::default() }.pool_size(), 64);
        assert_eq!(AgentConfig::default().pool_size(), 32);
    }
}
