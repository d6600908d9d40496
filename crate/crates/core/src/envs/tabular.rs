use crate::error::{Result, TarlError};

const MAX_SWEEPS: usize = 1_000_000;

/// One possible result of taking an action. `next == None` is termination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub prob: f64,
    pub next: Option<usize>,
    pub reward: f64,
}

/// Finite MDP with explicit outcome lists. A state whose outcome lists are
/// all empty is absorbing with value zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    n_actions: usize,
    outcomes: Vec<Vec<Vec<Outcome>>>,
    start_state: usize,
}

impl TabularMdp {
    /// `outcomes[s][a]` lists the outcomes of action `a` in state `s`.
    pub fn new(n_actions: usize, outcomes: Vec<Vec<Vec<Outcome>>>, start_state: usize) -> Result<Self> {
        let n_states = outcomes.len();
        if n_states == 0 || n_actions == 0 {
            return Err(TarlError::arg("tabular MDP needs states and actions"));
        }
        if start_state >= n_states {
            return Err(TarlError::Index { index: start_state, limit: n_states });
        }
        for (s, row) in outcomes.iter().enumerate() {
            if row.len() != n_actions {
                return Err(TarlError::shape(format!("state {s} lists {} actions, expected {n_actions}", row.len())));
            }
            for (a, outs) in row.iter().enumerate() {
                if outs.is_empty() {
                    continue;
                }
                let total: f64 = outs.iter().map(|o| o.prob).sum();
                if (total - 1.0).abs() > 1e-12 || outs.iter().any(|o| o.prob < 0.0) {
                    return Err(TarlError::arg(format!("outcomes of ({s}, {a}) sum to {total}")));
                }
                if let Some(next) = outs.iter().filter_map(|o| o.next).find(|&n| n >= n_states) {
                    return Err(TarlError::Index { index: next, limit: n_states });
                }
            }
        }
        Ok(TabularMdp { n_actions, outcomes, start_state })
    }

    pub fn n_states(&self) -> usize {
        self.outcomes.len()
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn start_state(&self) -> usize {
        self.start_state
    }

    pub fn outcomes(&self, state: usize, action: usize) -> &[Outcome] {
        &self.outcomes[state][action]
    }

    fn backup(&self, state: usize, action: usize, gamma: f64, value: &[f64]) -> f64 {
        self.outcomes[state][action]
            .iter()
            .map(|o| o.prob * (o.reward + o.next.map_or(0.0, |n| gamma * value[n])))
            .sum()
    }
}

/// State-action values with the residual reached by the solver.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    n_actions: usize,
    values: Vec<f64>,
    /// Sup-norm Bellman residual of `values`.
    pub residual: f64,
    pub sweeps: usize,
}

impl QTable {
    pub fn n_states(&self) -> usize {
        self.values.len() / self.n_actions
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn q(&self, state: usize, action: usize) -> f64 {
        self.values[state * self.n_actions + action]
    }

    pub fn row(&self, state: usize) -> &[f64] {
        &self.values[state * self.n_actions..(state + 1) * self.n_actions]
    }

    pub fn state_value(&self, state: usize) -> f64 {
        self.row(state).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Greedy action, ties to the lowest index.
    pub fn greedy_action(&self, state: usize) -> usize {
        let row = self.row(state);
        (1..row.len()).fold(0, |best, a| if row[a] > row[best] { a } else { best })
    }

    /// `max |T Q − Q|` for the optimality operator `T`.
    pub fn bellman_residual(&self, mdp: &TabularMdp, gamma: f64) -> f64 {
        let v: Vec<f64> = (0..self.n_states()).map(|s| self.state_value(s)).collect();
        let mut worst: f64 = 0.0;
        for s in 0..self.n_states() {
            for a in 0..self.n_actions {
                worst = worst.max((mdp.backup(s, a, gamma, &v) - self.q(s, a)).abs());
            }
        }
        worst
    }
}

fn check_solver_args(gamma: f64, tol: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(TarlError::arg(format!("discount must lie in [0, 1], got {gamma}")));
    }
    if !(tol > 0.0) {
        return Err(TarlError::arg(format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

/// Synchronous value iteration on Q until the sup-norm Bellman residual is at most `tol`.
pub fn value_iteration(mdp: &TabularMdp, gamma: f64, tol: f64) -> Result<QTable> {
    check_solver_args(gamma, tol)?;
    let (ns, na) = (mdp.n_states(), mdp.n_actions());
    let mut q = vec![0.0; ns * na];
    let mut v = vec![0.0; ns];
    for sweep in 1..=MAX_SWEEPS {
        let mut residual: f64 = 0.0;
        for s in 0..ns {
            for a in 0..na {
                let backed = mdp.backup(s, a, gamma, &v);
                residual = residual.max((backed - q[s * na + a]).abs());
                q[s * na + a] = backed;
            }
        }
        for (s, vs) in v.iter_mut().enumerate() {
            *vs = q[s * na..(s + 1) * na].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        }
        if residual <= tol {
            let mut table = QTable { n_actions: na, values: q, residual, sweeps: sweep };
            table.residual = table.bellman_residual(mdp, gamma);
            return Ok(table);
        }
        if sweep == MAX_SWEEPS {
            return Err(TarlError::NotConverged { iterations: sweep, residual });
        }
    }
    unreachable!()
}

/// Iterative policy evaluation. `policy[s][a]` is the probability of `a` in `s`.
pub fn evaluate_policy(mdp: &TabularMdp, policy: &[Vec<f64>], gamma: f64, tol: f64) -> Result<Vec<f64>> {
    check_solver_args(gamma, tol)?;
    if policy.len() != mdp.n_states() || policy.iter().any(|p| p.len() != mdp.n_actions()) {
        return Err(TarlError::shape("policy table does not match the MDP"));
    }
    let mut v = vec![0.0; mdp.n_states()];
    for sweep in 1..=MAX_SWEEPS {
        let next: Vec<f64> = (0..mdp.n_states())
            .map(|s| (0..mdp.n_actions()).map(|a| policy[s][a] * mdp.backup(s, a, gamma, &v)).sum())
            .collect();
        let residual = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        if residual <= tol {
            return Ok(v);
        }
        if sweep == MAX_SWEEPS {
            return Err(TarlError::NotConverged { iterations: sweep, residual });
        }
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_step_terminal() {
        let mdp = TabularMdp::new(1, vec![vec![vec![Outcome { prob: 1.0, next: None, reward: 1.0 }]]], 0).unwrap();
        let q = value_iteration(&mdp, 0.9, 1e-12).unwrap();
        assert_eq!(q.q(0, 0), 1.0);
        assert_eq!(q.residual, 0.0);
    }

    #[test]
    fn greedy_ties_to_lowest_action() {
        let out = vec![Outcome { prob: 1.0, next: None, reward: 2.0 }];
        let mdp = TabularMdp::new(2, vec![vec![out.clone(), out]], 0).unwrap();
        let q = value_iteration(&mdp, 0.5, 1e-12).unwrap();
        assert_eq!(q.greedy_action(0), 0);
    }

    #[test]
    fn rejects_malformed_tables_and_args() {
        let bad = vec![vec![vec![Outcome { prob: 0.4, next: None, reward: 0.0 }]]];
        assert!(TabularMdp::new(1, bad, 0).is_err());
        let dangling = vec![vec![vec![Outcome { prob: 1.0, next: Some(3), reward: 0.0 }]]];
        assert!(TabularMdp::new(1, dangling, 0).is_err());
        let ok = TabularMdp::new(1, vec![vec![vec![]]], 0).unwrap();
        assert!(value_iteration(&ok, 0.9, 0.0).is_err());
        assert!(value_iteration(&ok, 1.5, 1e-3).is_err());
    }

    #[test]
    fn undiscounted_loop_does_not_converge() {
        let mdp = TabularMdp::new(1, vec![vec![vec![Outcome { prob: 1.0, next: Some(0), reward: 1.0 }]]], 0).unwrap();
        assert!(matches!(value_iteration(&mdp, 1.0, 1e-9), Err(TarlError::NotConverged { .. })));
    }
}
