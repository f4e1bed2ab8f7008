//! Value iteration over the empirical tensor.
//!
//! Standard synchronous sweeps of the Bellman operator with a discount
//! factor under one; convergence is declared when the max-norm change of
//! the value vector drops under the tolerance. Ties in the greedy step go
//! to the highest action index, so exact ties prefer keeping both
//! batteries connected.

use serde::{Deserialize, Serialize};

use super::reward::{reward, RewardTable};
use super::state::{Action, N_STATES};
use super::tensor::TransitionTensor;
use super::MdpError;

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ValueIterationSettings {
    /// Discount factor in (0, 1).
    pub gamma: f64,
    /// Max-norm convergence tolerance on the value vector.
    pub tol: f64,
    /// Sweep budget before giving up.
    pub max_sweeps: usize,
}

impl Default for ValueIterationSettings {
    fn default() -> Self {
        Self {
            gamma: 0.95,
            tol: 1e-6,
            max_sweeps: 100_000,
        }
    }
}

impl ValueIterationSettings {
    pub fn validate(&self) -> Result<(), MdpError> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(MdpError::BadReward(format!(
                "gamma must lie in (0, 1), got {}",
                self.gamma
            )));
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(MdpError::BadReward(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_sweeps == 0 {
            return Err(MdpError::BadReward("max_sweeps must be positive".into()));
        }
        Ok(())
    }
}

/// Deterministic state-to-action map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct Policy {
    actions: Vec<Action>,
}

impl Policy {
    pub fn new(actions: Vec<Action>) -> Result<Self, MdpError> {
        if actions.len() != N_STATES {
            return Err(MdpError::BadState(actions.len()));
        }
        Ok(Self { actions })
    }

    pub fn action(&self, state: usize) -> Result<Action, MdpError> {
        self.actions
            .get(state)
            .copied()
            .ok_or(MdpError::BadState(state))
    }

    /// Switch command for the state, `[battery 1, battery 2]`.
    pub fn switches(&self, state: usize) -> Result<[bool; 2], MdpError> {
        Ok(self.action(state)?.switches())
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }
}

impl From<Policy> for Vec<u8> {
    fn from(p: Policy) -> Self {
        p.actions.iter().map(|a| a.index() as u8).collect()
    }
}

impl TryFrom<Vec<u8>> for Policy {
    type Error = MdpError;

    fn try_from(v: Vec<u8>) -> Result<Self, MdpError> {
        let actions = v
            .iter()
            .map(|&b| Action::from_index(b as usize).ok_or(MdpError::BadState(b as usize)))
            .collect::<Result<Vec<_>, _>>()?;
        Policy::new(actions)
    }
}

/// Converged values and the greedy policy they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub values: Vec<f64>,
    pub policy: Policy,
    pub sweeps: usize,
    pub residual: f64,
}

/// A finite MDP as the solver sees it: per-pair rewards and one-step
/// expectations of a value vector under the transition kernel.
pub trait DiscreteMdp {
    fn n_states(&self) -> usize;
    fn n_actions(&self) -> usize;
    fn reward(&self, s: usize, a: usize) -> f64;
    /// `E[v(s') | s, a]`; `values` has length `n_states()`.
    fn expected_value(&self, s: usize, a: usize, values: &[f64]) -> f64;
}

/// Explicit tabular MDP, indexed `s * n_actions + a`. Rows must be proper
/// distributions; useful for small hand-built or randomly generated models.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    n_states: usize,
    n_actions: usize,
    rewards: Vec<f64>,
    rows: Vec<Vec<(usize, f64)>>,
}

impl TabularMdp {
    pub fn new(
        n_states: usize,
        n_actions: usize,
        rewards: Vec<f64>,
        rows: Vec<Vec<(usize, f64)>>,
    ) -> Result<Self, MdpError> {
        let pairs = n_states * n_actions;
        if rewards.len() != pairs || rows.len() != pairs {
            return Err(MdpError::BadTensor(format!(
                "expected {pairs} state-action entries, got {} rewards and {} rows",
                rewards.len(),
                rows.len()
            )));
        }
        if rewards.iter().any(|r| !r.is_finite()) {
            return Err(MdpError::BadReward("non-finite reward entry".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            let mut total = 0.0;
            for &(n, p) in row {
                if n >= n_states || !(0.0..=1.0 + 1e-9).contains(&p) {
                    return Err(MdpError::BadTensor(format!(
                        "row {i} has entry ({n}, {p})"
                    )));
                }
                total += p;
            }
            if (total - 1.0).abs() > 1e-9 {
                return Err(MdpError::BadTensor(format!("row {i} sums to {total}")));
            }
        }
        Ok(Self {
            n_states,
            n_actions,
            rewards,
            rows,
        })
    }
}

impl DiscreteMdp for TabularMdp {
    fn n_states(&self) -> usize {
        self.n_states
    }

    fn n_actions(&self) -> usize {
        self.n_actions
    }

    fn reward(&self, s: usize, a: usize) -> f64 {
        self.rewards[s * self.n_actions + a]
    }

    fn expected_value(&self, s: usize, a: usize, values: &[f64]) -> f64 {
        self.rows[s * self.n_actions + a]
            .iter()
            .map(|&(n, p)| p * values[n])
            .sum()
    }
}

/// The battery MDP: empirical tensor dynamics with the structured rewards.
struct BatteryMdp<'a> {
    tensor: &'a TransitionTensor,
    table: &'a RewardTable,
}

impl DiscreteMdp for BatteryMdp<'_> {
    fn n_states(&self) -> usize {
        N_STATES
    }

    fn n_actions(&self) -> usize {
        Action::ALL.len()
    }

    fn reward(&self, s: usize, a: usize) -> f64 {
        reward(s, Action::from_index(a).expect("action index in range"), self.table)
    }

    fn expected_value(&self, s: usize, a: usize, values: &[f64]) -> f64 {
        self.tensor.expected_value(s, a, values)
    }
}

/// Converged values and greedy action indices for a generic model.
#[derive(Debug, Clone, PartialEq)]
pub struct GenericSolution {
    pub values: Vec<f64>,
    pub actions: Vec<usize>,
    pub sweeps: usize,
    pub residual: f64,
}

/// Greedy action index and its backup value, ties to the highest index.
fn greedy(model: &impl DiscreteMdp, gamma: f64, values: &[f64], s: usize) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for a in 0..model.n_actions() {
        let q = model.reward(s, a) + gamma * model.expected_value(s, a, values);
        if q >= best.1 {
            best = (a, q);
        }
    }
    best
}

/// Runs synchronous value iteration on any finite MDP.
pub fn value_iteration_generic(
    model: &impl DiscreteMdp,
    settings: &ValueIterationSettings,
) -> Result<GenericSolution, MdpError> {
    settings.validate()?;
    let n = model.n_states();
    let mut values = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for sweep in 1..=settings.max_sweeps {
        for s in 0..n {
            next[s] = greedy(model, settings.gamma, &values, s).1;
        }
        residual = values
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut values, &mut next);
        if residual < settings.tol {
            let actions = (0..n)
                .map(|s| greedy(model, settings.gamma, &values, s).0)
                .collect();
            return Ok(GenericSolution {
                values,
                actions,
                sweeps: sweep,
                residual,
            });
        }
    }
    Err(MdpError::NoConvergence {
        iterations: settings.max_sweeps,
        residual,
    })
}

/// Runs value iteration on the battery MDP over the empirical tensor.
pub fn value_iteration(
    tensor: &TransitionTensor,
    table: &RewardTable,
    settings: &ValueIterationSettings,
) -> Result<Solution, MdpError> {
    table.validate()?;
    tensor.validate()?;
    let model = BatteryMdp { tensor, table };
    let sol = value_iteration_generic(&model, settings)?;
    let actions = sol
        .actions
        .iter()
        .map(|&a| Action::from_index(a).expect("solver returns valid indices"))
        .collect();
    Ok(Solution {
        policy: Policy::new(actions)?,
        values: sol.values,
        sweeps: sol.sweeps,
        residual: sol.residual,
    })
}
