//! Probing schedules for networks of components under stealthy attack.
//!
//! Each component is an arm of a restless bandit whose state is the last
//! observation and the time since it was made. The crate provides the
//! closed-form Whittle index, index and baseline policies, the single-arm
//! subsidy problem with its relaxed policy, exact small-instance oracles, and
//! a seeded Monte Carlo simulator.

pub mod arm;
pub mod attack_model;
pub mod error;
pub mod oracle;
pub mod policies;
pub mod queueing;
pub mod sim;
pub mod subsidy;
pub mod whittle;

pub use arm::{belief_abnormal, transition, Action, ArmState, ComponentState, Observation};
pub use attack_model::{AttackProcess, ComponentDescriptor, ComponentSpec};
pub use error::{Error, Result};
pub use oracle::{
    dp_optimal, policy_evaluate_exact, value_monotonicity_probe, whittle_exact, DpSolution, ExactEvaluation,
    JointState, ValueEntry, DEFAULT_GUARD,
};
pub use policies::{
    queue_init, queue_step, select_myopic, select_random, select_whittle, PolicyKind, QueueState, Selection,
};
pub use queueing::{to_rmab, Arrival, QueueClass, QueueNetworkSpec};
pub use sim::{run, run_relaxed, run_replication, CostTrajectory, RelaxedRun, RunConfig, StepOutcome, WorldState};
pub use subsidy::{
    activation_rate, gain, lagrangian_dual, optimal_stopping, relaxed_select, single_arm_action_values, solve_lambda_star,
    ActionValues, GainResult, RelaxedPlan, SubsidyPolicy, DEFAULT_T_CAP,
};
pub use whittle::{index_at_lag, index_table, verify_strict_indexability, whittle_index, IndexCurve, IndexRow, IndexValue};
