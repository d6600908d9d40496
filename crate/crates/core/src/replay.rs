//! Fixed-capacity FIFO experience replay.

use rand::Rng;

use crate::error::{Result, TarlError};
use crate::scalar::Scalar;

/// One environment step `(s, a, r, s', done)`.
///
/// `done` marks episode termination. `truncated` marks a step-cap cutoff:
/// such transitions still bootstrap from `s'`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition<T> {
    pub state: Vec<T>,
    pub action: usize,
    pub reward: T,
    pub next_state: Vec<T>,
    pub done: bool,
    pub truncated: bool,
}

impl<T: Scalar> Transition<T> {
    pub fn new(state: Vec<T>, action: usize, reward: T, next_state: Vec<T>, done: bool) -> Self {
        Transition { state, action, reward, next_state, done, truncated: false }
    }

    /// `1 − d` in the bootstrap target; truncation keeps the bootstrap.
    #[inline]
    pub fn bootstrap_mask(&self) -> T {
        if self.done && !self.truncated {
            T::zero()
        } else {
            T::one()
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReplayBuffer<T> {
    capacity: usize,
    obs_dim: usize,
    n_actions: usize,
    storage: Vec<Transition<T>>,
    write_cursor: usize,
}

impl<T: Scalar> ReplayBuffer<T> {
    pub fn new(capacity: usize, obs_dim: usize, n_actions: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(TarlError::arg("replay capacity must be positive"));
        }
        Ok(ReplayBuffer { capacity, obs_dim, n_actions, storage: Vec::with_capacity(capacity.min(1 << 16)), write_cursor: 0 })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    /// Slot the next push writes to.
    pub fn write_cursor(&self) -> usize {
        self.write_cursor
    }

    pub fn get(&self, index: usize) -> Option<&Transition<T>> {
        self.storage.get(index)
    }

    /// Stored transitions, oldest first.
    pub fn iter_oldest_first(&self) -> impl Iterator<Item = &Transition<T>> + '_ {
        let split = if self.storage.len() == self.capacity { self.write_cursor } else { 0 };
        self.storage[split..].iter().chain(self.storage[..split].iter())
    }

    /// Appends `t`, evicting the oldest entry once full.
    pub fn push(&mut self, t: Transition<T>) -> Result<()> {
        if t.state.len() != self.obs_dim || t.next_state.len() != self.obs_dim {
            return Err(TarlError::arg(format!(
                "transition observation dims ({}, {}) differ from buffer dim {}",
                t.state.len(),
                t.next_state.len(),
                self.obs_dim
            )));
        }
        if t.action >= self.n_actions {
            return Err(TarlError::arg(format!("action {} out of range for {} actions", t.action, self.n_actions)));
        }
        if self.storage.len() < self.capacity {
            self.storage.push(t);
        } else {
            self.storage[self.write_cursor] = t;
        }
        self.write_cursor = (self.write_cursor + 1) % self.capacity;
        Ok(())
    }

    /// `n` uniform draws with replacement, returned with their buffer slots.
    ///
    /// Any non-empty buffer can serve any `n`; the minimum fill before
    /// training is the caller's concern.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<(usize, &Transition<T>)>> {
        if self.storage.is_empty() {
            return Err(TarlError::NotEnoughSamples { have: self.storage.len(), need: n.max(1) });
        }
        Ok((0..n)
            .map(|_| {
                let i = rng.gen_range(0..self.storage.len());
                (i, &self.storage[i])
            })
            .collect())
    }
}
