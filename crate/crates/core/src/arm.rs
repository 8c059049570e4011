//! Arm state `(i, t)`: last observed component state and slots since that
//! observation. Together with the attack process it is a sufficient
//! statistic for scheduling.

use serde::{Deserialize, Serialize};

use crate::attack_model::ComponentSpec;
use crate::error::{Error, Result};

/// Observable component state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ComponentState {
    Healthy,
    Abnormal,
}

impl ComponentState {
    pub fn as_bit(self) -> u8 {
        match self {
            ComponentState::Healthy => 0,
            ComponentState::Abnormal => 1,
        }
    }

    pub fn from_bit(bit: u8) -> Option<Self> {
        match bit {
            0 => Some(ComponentState::Healthy),
            1 => Some(ComponentState::Abnormal),
            _ => None,
        }
    }
}

/// Result of probing an arm.
pub type Observation = ComponentState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Passive,
    Active,
}

/// `(i, t)` with `i` the last observed state and `t >= 1` the slots elapsed
/// since. `(0, 0)` is only used as the origin of the index table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArmState {
    pub i: u8,
    pub t: u32,
}

impl ArmState {
    /// The index origin `(0, 0)`; never part of a trajectory.
    pub const ORIGIN: ArmState = ArmState { i: 0, t: 0 };

    pub fn new(i: u8, t: u32) -> Result<Self> {
        if i > 1 || t == 0 {
            return Err(Error::InvalidArmState { i, t });
        }
        Ok(ArmState { i, t })
    }

    /// State at the first decision epoch of a component that starts healthy:
    /// it behaves as if it had been reset one slot earlier.
    pub fn healthy_start() -> Self {
        ArmState { i: 0, t: 1 }
    }

    /// Number of attack steps since the component was last known healthy,
    /// `t - i`. The abnormal belief is `p(t - i)`.
    pub fn lag(self) -> u32 {
        self.t.saturating_sub(u32::from(self.i))
    }
}

/// `Pr(component abnormal now | (i, t))`: `p(t)` for `i = 0`, `p(t-1)` for `i = 1`.
pub fn belief_abnormal(spec: &ComponentSpec, state: ArmState) -> f64 {
    spec.process.marginal_p(u64::from(state.lag()))
}

/// One-step update of the arm state.
pub fn transition(state: ArmState, action: Action, obs: Option<Observation>) -> Result<ArmState> {
    match (action, obs) {
        (Action::Active, Some(ComponentState::Healthy)) => Ok(ArmState { i: 0, t: 1 }),
        (Action::Active, Some(ComponentState::Abnormal)) => Ok(ArmState { i: 1, t: 1 }),
        (Action::Passive, None) => Ok(ArmState {
            i: state.i,
            t: state.t.saturating_add(1),
        }),
        _ => Err(Error::ObservationActionMismatch),
    }
}
