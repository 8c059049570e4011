//! Exact finite-horizon machinery for small instances: the optimal dynamic
//! program over joint arm states and exact evaluation of fixed policies.
//!
//! Both routines work on beliefs, not sampled worlds, so results are
//! deterministic. The reachable joint-state space is enumerated first and
//! refused when `states * horizon` exceeds the configured guard.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::arm::{belief_abnormal, transition, Action, ArmState, ComponentState};
use crate::attack_model::ComponentSpec;
use crate::error::{Error, Result};
use crate::policies::{select_whittle, Selection};

/// Per-arm states of the whole network.
pub type JointState = Vec<ArmState>;

/// Default bound on `reachable states * horizon`.
pub const DEFAULT_GUARD: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ValueEntry {
    /// Expected cost from this slot to the end of the horizon.
    pub cost: f64,
    pub action: Selection,
}

/// Solution of the finite-horizon dynamic program.
#[derive(Debug, Clone)]
pub struct DpSolution {
    pub cost: f64,
    /// `layers[s]` holds the entries for states reachable at slot `s`.
    pub layers: Vec<HashMap<JointState, ValueEntry>>,
}

impl DpSolution {
    pub fn horizon(&self) -> usize {
        self.layers.len()
    }

    pub fn entry(&self, slot: usize, state: &[ArmState]) -> Option<&ValueEntry> {
        self.layers.get(slot)?.get(state)
    }

    pub fn state_count(&self) -> usize {
        self.layers.iter().map(HashMap::len).sum()
    }
}

/// Expected cost of a fixed policy, overall and slot by slot.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactEvaluation {
    pub total: f64,
    pub per_slot: Vec<f64>,
}

impl ExactEvaluation {
    /// Cost over the first `horizon` slots.
    pub fn prefix(&self, horizon: usize) -> f64 {
        self.per_slot.iter().take(horizon).sum()
    }
}

fn validate(specs: &[ComponentSpec], initial: &[ArmState], k: usize, horizon: u32) -> Result<()> {
    if specs.len() != initial.len() {
        return Err(Error::LengthMismatch {
            what: "initial joint state",
            expected: specs.len(),
            got: initial.len(),
        });
    }
    if k == 0 || k > specs.len() {
        return Err(Error::InvalidBudget { k, n: specs.len() });
    }
    if horizon < 1 {
        return Err(Error::TooSmall {
            what: "horizon",
            min: 1,
            got: 0,
        });
    }
    for s in initial {
        ArmState::new(s.i, s.t)?;
    }
    Ok(())
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(current.clone());
        let Some(pos) = (0..k).rev().find(|&j| current[j] < n - k + j) else {
            return out;
        };
        current[pos] += 1;
        for j in pos + 1..k {
            current[j] = current[j - 1] + 1;
        }
    }
}

fn slot_cost(specs: &[ComponentSpec], state: &[ArmState]) -> f64 {
    specs
        .iter()
        .zip(state)
        .map(|(spec, &s)| spec.cost * belief_abnormal(spec, s))
        .sum()
}

/// Successor states with positive probability after probing `probed`.
fn successors(specs: &[ComponentSpec], state: &[ArmState], probed: &[usize]) -> Vec<(JointState, f64)> {
    let mut passive: JointState = state
        .iter()
        .map(|&s| transition(s, Action::Passive, None).expect("passive without observation"))
        .collect();
    for &arm in probed {
        passive[arm] = state[arm];
    }
    let mut out = vec![(passive, 1.0)];
    for &arm in probed {
        let b = belief_abnormal(&specs[arm], state[arm]);
        let mut next = Vec::with_capacity(out.len() * 2);
        for (joint, prob) in out {
            for (obs, p) in [(ComponentState::Healthy, 1.0 - b), (ComponentState::Abnormal, b)] {
                if p > 0.0 {
                    let mut j = joint.clone();
                    j[arm] = transition(state[arm], Action::Active, Some(obs)).expect("active with observation");
                    next.push((j, prob * p));
                }
            }
        }
        out = next;
    }
    out
}

/// Enumerates reachable joint states slot by slot, refusing once the running
/// count times the horizon passes `guard`.
fn reachable_layers(
    initial: &[ArmState],
    horizon: u32,
    guard: u64,
    mut expand: impl FnMut(&JointState) -> Vec<JointState>,
) -> Result<Vec<Vec<JointState>>> {
    let mut layers = vec![vec![initial.to_vec()]];
    let mut total = 1u64;
    for _ in 1..horizon {
        let mut next = BTreeSet::new();
        for state in layers.last().expect("nonempty") {
            next.extend(expand(state));
        }
        total += next.len() as u64;
        if total.saturating_mul(u64::from(horizon)) > guard {
            return Err(Error::GuardExceeded {
                states: total,
                horizon,
                bound: guard,
            });
        }
        layers.push(next.into_iter().collect());
    }
    Ok(layers)
}

/// Minimal expected total cost over `horizon` slots by backward induction.
/// Ties between actions go to the lexicographically first subset.
pub fn dp_optimal(
    specs: &[ComponentSpec],
    initial: &[ArmState],
    k: usize,
    horizon: u32,
    guard: u64,
) -> Result<DpSolution> {
    validate(specs, initial, k, horizon)?;
    let actions = k_subsets(specs.len(), k);
    let layers = reachable_layers(initial, horizon, guard, |state| {
        actions
            .iter()
            .flat_map(|a| successors(specs, state, a).into_iter().map(|(s, _)| s))
            .collect()
    })?;

    let mut values: Vec<HashMap<JointState, ValueEntry>> = vec![HashMap::new(); layers.len()];
    for slot in (0..layers.len()).rev() {
        let later = values.get(slot + 1);
        let layer: HashMap<JointState, ValueEntry> = layers[slot]
            .par_iter()
            .map(|state| {
                let now = slot_cost(specs, state);
                let mut best: Option<(f64, &Vec<usize>)> = None;
                for action in &actions {
                    let future = match later {
                        None => 0.0,
                        Some(next) => successors(specs, state, action)
                            .iter()
                            .map(|(s, p)| p * next[s].cost)
                            .sum(),
                    };
                    if best.is_none_or(|(b, _)| future < b) {
                        best = Some((future, action));
                    }
                }
                let (future, action) = best.expect("at least one action");
                let entry = ValueEntry {
                    cost: now + future,
                    action: Selection::new(action.clone(), specs.len()).expect("valid subset"),
                };
                (state.clone(), entry)
            })
            .collect();
        values[slot] = layer;
    }
    let cost = values[0][initial].cost;
    Ok(DpSolution { cost, layers: values })
}

/// Exact expected cost of a deterministic policy, by propagating the
/// distribution over joint states forward.
pub fn policy_evaluate_exact<P>(
    specs: &[ComponentSpec],
    initial: &[ArmState],
    k: usize,
    horizon: u32,
    guard: u64,
    policy: P,
) -> Result<ExactEvaluation>
where
    P: Fn(&[ArmState]) -> Result<Selection>,
{
    validate(specs, initial, k, horizon)?;
    let mut dist: BTreeMap<JointState, f64> = BTreeMap::from([(initial.to_vec(), 1.0)]);
    let mut per_slot = Vec::with_capacity(horizon as usize);
    let mut total_states = 1u64;
    for slot in 0..horizon {
        per_slot.push(dist.iter().map(|(s, p)| p * slot_cost(specs, s)).sum());
        if slot + 1 == horizon {
            break;
        }
        let mut next: BTreeMap<JointState, f64> = BTreeMap::new();
        for (state, prob) in &dist {
            let selection = policy(state)?;
            if selection.len() != k {
                return Err(Error::InvalidBudget {
                    k: selection.len(),
                    n: specs.len(),
                });
            }
            for (succ, p) in successors(specs, state, selection.arms()) {
                *next.entry(succ).or_insert(0.0) += prob * p;
            }
        }
        total_states += next.len() as u64;
        if total_states.saturating_mul(u64::from(horizon)) > guard {
            return Err(Error::GuardExceeded {
                states: total_states,
                horizon,
                bound: guard,
            });
        }
        dist = next;
    }
    Ok(ExactEvaluation {
        total: per_slot.iter().sum(),
        per_slot,
    })
}

/// Exact expected cost of the Whittle index policy.
pub fn whittle_exact(
    specs: &[ComponentSpec],
    initial: &[ArmState],
    k: usize,
    horizon: u32,
    guard: u64,
) -> Result<ExactEvaluation> {
    policy_evaluate_exact(specs, initial, k, horizon, guard, |s| select_whittle(specs, s, k))
}

/// Draws random joint states, advances one arm's `t` by one and checks that
/// the exact Whittle-policy cost does not decrease. Returns `false` on the
/// first violation.
pub fn value_monotonicity_probe(
    specs: &[ComponentSpec],
    k: usize,
    horizon: u32,
    trials: usize,
    seed: u64,
    guard: u64,
) -> Result<bool> {
    let n = specs.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let base: JointState = (0..n)
            .map(|_| ArmState {
                i: rng.gen_range(0..=1),
                t: rng.gen_range(1..=4),
            })
            .collect();
        let arm = rng.gen_range(0..n);
        let mut older = base.clone();
        older[arm].t += 1;
        let low = whittle_exact(specs, &base, k, horizon, guard)?.total;
        let high = whittle_exact(specs, &older, k, horizon, guard)?.total;
        if high < low - 1e-12 {
            return Ok(false);
        }
    }
    Ok(true)
}
