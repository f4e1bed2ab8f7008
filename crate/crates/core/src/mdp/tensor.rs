//! Empirical transition tensor.
//!
//! Counts of observed `(state, action) -> next state` transitions, gathered
//! from simulated flights. Probabilities are the normalized counts; a
//! never-visited pair behaves as a self-loop so that value iteration stays
//! well defined, and the visit counts are kept so callers can tell real
//! structure from that fallback.

use serde::{Deserialize, Serialize};

use super::state::{N_ACTIONS, N_STATES};
use super::MdpError;

/// Dense transition counts over the full state and action space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TensorData", into = "TensorData")]
pub struct TransitionTensor {
    counts: Vec<u64>,
    row_totals: Vec<u64>,
}

impl Default for TransitionTensor {
    fn default() -> Self {
        Self::new()
    }
}

impl TransitionTensor {
    pub fn new() -> Self {
        Self {
            counts: vec![0; N_STATES * N_ACTIONS * N_STATES],
            row_totals: vec![0; N_STATES * N_ACTIONS],
        }
    }

    fn idx(s: usize, a: usize, next: usize) -> usize {
        (s * N_ACTIONS + a) * N_STATES + next
    }

    fn check(s: usize, a: usize, next: usize) -> Result<(), MdpError> {
        if s >= N_STATES || next >= N_STATES {
            return Err(MdpError::BadState(s.max(next)));
        }
        if a >= N_ACTIONS {
            return Err(MdpError::BadTensor(format!("action index {a} out of range")));
        }
        Ok(())
    }

    /// Adds one observed transition.
    pub fn record(&mut self, s: usize, a: usize, next: usize) -> Result<(), MdpError> {
        Self::check(s, a, next)?;
        self.counts[Self::idx(s, a, next)] += 1;
        self.row_totals[s * N_ACTIONS + a] += 1;
        Ok(())
    }

    /// Observations of the pair.
    pub fn visits(&self, s: usize, a: usize) -> u64 {
        self.row_totals[s * N_ACTIONS + a]
    }

    pub fn count(&self, s: usize, a: usize, next: usize) -> u64 {
        self.counts[Self::idx(s, a, next)]
    }

    /// Transition probability; an unvisited pair is a self-loop.
    pub fn prob(&self, s: usize, a: usize, next: usize) -> f64 {
        let total = self.row_totals[s * N_ACTIONS + a];
        if total == 0 {
            return if s == next { 1.0 } else { 0.0 };
        }
        self.counts[Self::idx(s, a, next)] as f64 / total as f64
    }

    /// Expectation of `values` over the next-state distribution.
    pub fn expected_value(&self, s: usize, a: usize, values: &[f64]) -> f64 {
        let total = self.row_totals[s * N_ACTIONS + a];
        if total == 0 {
            return values[s];
        }
        let base = (s * N_ACTIONS + a) * N_STATES;
        let mut acc = 0.0;
        for next in 0..N_STATES {
            let c = self.counts[base + next];
            if c != 0 {
                acc += c as f64 * values[next];
            }
        }
        acc / total as f64
    }

    /// Observed next states with probabilities for one pair.
    pub fn row(&self, s: usize, a: usize) -> Vec<(usize, f64)> {
        let total = self.row_totals[s * N_ACTIONS + a];
        if total == 0 {
            return vec![(s, 1.0)];
        }
        let base = (s * N_ACTIONS + a) * N_STATES;
        (0..N_STATES)
            .filter(|&n| self.counts[base + n] != 0)
            .map(|n| (n, self.counts[base + n] as f64 / total as f64))
            .collect()
    }

    /// Fraction of `(state, action)` pairs with at least one observation.
    pub fn coverage(&self) -> f64 {
        let visited = self.row_totals.iter().filter(|&&t| t > 0).count();
        visited as f64 / self.row_totals.len() as f64
    }

    /// Total recorded transitions.
    pub fn total_observations(&self) -> u64 {
        self.row_totals.iter().sum()
    }

    /// Checks internal consistency and row normalization.
    pub fn validate(&self) -> Result<(), MdpError> {
        if self.counts.len() != N_STATES * N_ACTIONS * N_STATES
            || self.row_totals.len() != N_STATES * N_ACTIONS
        {
            return Err(MdpError::BadTensor("dimension mismatch".into()));
        }
        for s in 0..N_STATES {
            for a in 0..N_ACTIONS {
                let base = (s * N_ACTIONS + a) * N_STATES;
                let sum: u64 = self.counts[base..base + N_STATES].iter().sum();
                if sum != self.row_totals[s * N_ACTIONS + a] {
                    return Err(MdpError::BadTensor(format!(
                        "row total mismatch at state {s} action {a}"
                    )));
                }
                let p: f64 = (0..N_STATES).map(|n| self.prob(s, a, n)).sum();
                if (p - 1.0).abs() > 1e-9 {
                    return Err(MdpError::BadTensor(format!(
                        "row at state {s} action {a} sums to {p}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Serialized form: sparse sorted count entries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TensorData {
    pub n_states: usize,
    pub n_actions: usize,
    /// `[state, action, next, count]`, ascending.
    pub entries: Vec<(u32, u8, u32, u64)>,
}

impl From<TransitionTensor> for TensorData {
    fn from(t: TransitionTensor) -> Self {
        let mut entries = Vec::new();
        for s in 0..N_STATES {
            for a in 0..N_ACTIONS {
                let base = (s * N_ACTIONS + a) * N_STATES;
                for next in 0..N_STATES {
                    let c = t.counts[base + next];
                    if c != 0 {
                        entries.push((s as u32, a as u8, next as u32, c));
                    }
                }
            }
        }
        Self {
            n_states: N_STATES,
            n_actions: N_ACTIONS,
            entries,
        }
    }
}

impl TryFrom<TensorData> for TransitionTensor {
    type Error = MdpError;

    fn try_from(data: TensorData) -> Result<Self, MdpError> {
        if data.n_states != N_STATES || data.n_actions != N_ACTIONS {
            return Err(MdpError::BadTensor(format!(
                "expected {N_STATES} states and {N_ACTIONS} actions, file has {} and {}",
                data.n_states, data.n_actions
            )));
        }
        let mut t = TransitionTensor::new();
        for (s, a, next, c) in data.entries {
            TransitionTensor::check(s as usize, a as usize, next as usize)?;
            let idx = TransitionTensor::idx(s as usize, a as usize, next as usize);
            if t.counts[idx] != 0 {
                return Err(MdpError::BadTensor(format!(
                    "duplicate entry for ({s}, {a}, {next})"
                )));
            }
            t.counts[idx] = c;
            t.row_totals[s as usize * N_ACTIONS + a as usize] += c;
        }
        Ok(t)
    }
}
