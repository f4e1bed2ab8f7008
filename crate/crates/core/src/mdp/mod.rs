//! Decision layer: the battery-switching process over graded telemetry
//! features, its empirical transition tensor, value iteration, and
//! per-condition policy storage.

pub mod reward;
pub mod solve;
pub mod state;
pub mod store;
pub mod tensor;

pub use reward::{reward, RewardTable, RewardWeights};
pub use solve::{
    value_iteration, value_iteration_generic, DiscreteMdp, GenericSolution, Policy, Solution,
    TabularMdp, ValueIterationSettings,
};
pub use state::{
    encode_state, Action, BattFeatures, ChargeGrade, CurrentLevel, EncodeThresholds, MdpState,
    SupplyGrade, SwitchState, Telemetry, FAILURE_STATE, N_ACTIONS, N_STATES,
};
pub use store::{ConditionKey, PolicyStore};
pub use tensor::TransitionTensor;

use thiserror::Error;

/// Errors from the decision layer.
#[derive(Debug, Error)]
pub enum MdpError {
    #[error("invalid reward configuration: {0}")]
    BadReward(String),
    #[error("invalid transition tensor: {0}")]
    BadTensor(String),
    #[error("state index {0} out of range")]
    BadState(usize),
    #[error("value iteration stopped after {iterations} sweeps, residual {residual}")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("no policy stored for condition {0}")]
    MissingPolicy(String),
}
