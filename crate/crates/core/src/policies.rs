//! Per-slot arm selection rules.
//!
//! Every ranking rule shares one deterministic tie-break chain: after the
//! rule's primary key, prefer larger cost-weighted abnormal belief, then the
//! arm that has gone longer without a probe (larger `t`), then the smaller arm
//! id. The `t` key lines the index and myopic rules up with the queue rule for
//! homogeneous arms, where states like `(1, t+1)` and `(0, t)` tie on belief.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arm::{belief_abnormal, ArmState, ComponentState, Observation};
use crate::attack_model::ComponentSpec;
use crate::error::{Error, Result};
use crate::whittle::whittle_index;

/// Set of probed arm ids (0-based), kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Selection(Vec<usize>);

impl Selection {
    /// Builds a selection of distinct arms below `n`.
    pub fn new(mut arms: Vec<usize>, n: usize) -> Result<Self> {
        arms.sort_unstable();
        if let Some(&bad) = arms.iter().find(|&&a| a >= n) {
            return Err(Error::ArmOutOfRange { arm: bad, n });
        }
        if arms.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::ObservationSetMismatch);
        }
        Ok(Selection(arms))
    }

    pub fn arms(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, arm: usize) -> bool {
        self.0.binary_search(&arm).is_ok()
    }
}

/// Policy names accepted by configuration files and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Whittle,
    Myopic,
    Queue,
    Random,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::Whittle,
        PolicyKind::Myopic,
        PolicyKind::Queue,
        PolicyKind::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Whittle => "whittle",
            PolicyKind::Myopic => "myopic",
            PolicyKind::Queue => "queue",
            PolicyKind::Random => "random",
        }
    }

    /// Whether the selection is a function of the arm states alone.
    pub fn is_state_feedback(self) -> bool {
        matches!(self, PolicyKind::Whittle | PolicyKind::Myopic)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        PolicyKind::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown policy {s:?} (expected whittle, myopic, queue or random)"))
    }
}

fn check_budget(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::InvalidBudget { k, n });
    }
    Ok(())
}

fn check_lengths(specs: &[ComponentSpec], states: &[ArmState]) -> Result<()> {
    if specs.len() != states.len() {
        return Err(Error::LengthMismatch {
            what: "arm states vs components",
            expected: specs.len(),
            got: states.len(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
struct RankKey {
    primary: f64,
    weighted_belief: f64,
    t: u32,
    arm: usize,
}

/// Descending priority: the arm ranked first compares as `Less`.
fn by_priority(a: &RankKey, b: &RankKey) -> Ordering {
    b.primary
        .total_cmp(&a.primary)
        .then_with(|| b.weighted_belief.total_cmp(&a.weighted_belief))
        .then_with(|| b.t.cmp(&a.t))
        .then_with(|| a.arm.cmp(&b.arm))
}

/// All arm ids ordered from highest to lowest priority under `primary`.
fn rank(
    specs: &[ComponentSpec],
    states: &[ArmState],
    primary: impl Fn(&ComponentSpec, ArmState) -> f64,
) -> Vec<usize> {
    let mut keys: Vec<RankKey> = specs
        .iter()
        .zip(states)
        .enumerate()
        .map(|(arm, (spec, &state))| RankKey {
            primary: primary(spec, state),
            weighted_belief: spec.cost * belief_abnormal(spec, state),
            t: state.t,
            arm,
        })
        .collect();
    keys.sort_by(by_priority);
    keys.into_iter().map(|k| k.arm).collect()
}

fn top_k(
    specs: &[ComponentSpec],
    states: &[ArmState],
    k: usize,
    primary: impl Fn(&ComponentSpec, ArmState) -> f64,
) -> Result<Selection> {
    check_lengths(specs, states)?;
    check_budget(specs.len(), k)?;
    let mut order = rank(specs, states, primary);
    order.truncate(k);
    order.sort_unstable();
    Ok(Selection(order))
}

/// The `k` arms with the largest Whittle indices.
pub fn select_whittle(specs: &[ComponentSpec], states: &[ArmState], k: usize) -> Result<Selection> {
    top_k(specs, states, k, |spec, st| whittle_index(spec, st).value())
}

/// The `k` arms with the largest expected next-slot cost `c * Pr(abnormal)`.
pub fn select_myopic(specs: &[ComponentSpec], states: &[ArmState], k: usize) -> Result<Selection> {
    top_k(specs, states, k, |spec, st| spec.cost * belief_abnormal(spec, st))
}

/// A uniformly random `k`-subset of `0..n`.
pub fn select_random<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Selection> {
    check_budget(n, k)?;
    let mut arms = rand::seq::index::sample(rng, n, k).into_vec();
    arms.sort_unstable();
    Ok(Selection(arms))
}

/// Probe order of the parameter-free homogeneous policy; the head is probed next.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueueState {
    order: Vec<usize>,
}

impl QueueState {
    /// Queue with an explicit order, which must be a permutation of `0..n`.
    pub fn new(n: usize, order: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; n];
        if order.len() != n {
            return Err(Error::NotAPermutation { n });
        }
        for &a in &order {
            if a >= n || std::mem::replace(&mut seen[a], true) {
                return Err(Error::NotAPermutation { n });
            }
        }
        Ok(QueueState { order })
    }

    /// Queue sorted by descending initial abnormal belief, with the shared tie-break.
    pub fn from_beliefs(specs: &[ComponentSpec], states: &[ArmState]) -> Result<Self> {
        check_lengths(specs, states)?;
        let order = rank(specs, states, |spec, st| spec.cost * belief_abnormal(spec, st));
        Ok(QueueState { order })
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// The `k` arms at the head of the queue.
    pub fn head(&self, k: usize) -> Result<Selection> {
        check_budget(self.order.len(), k)?;
        let mut arms = self.order[..k].to_vec();
        arms.sort_unstable();
        Ok(Selection(arms))
    }

    /// Probe the head `k` arms and requeue them at the tail: arms observed
    /// abnormal go ahead of arms observed healthy, each group keeping its
    /// previous relative order.
    pub fn step(
        &self,
        k: usize,
        observations: &BTreeMap<usize, Observation>,
    ) -> Result<(Selection, QueueState)> {
        let selection = self.head(k)?;
        if observations.len() != k || !observations.keys().all(|&a| selection.contains(a)) {
            return Err(Error::ObservationSetMismatch);
        }
        let (head, rest) = self.order.split_at(k);
        let mut order = rest.to_vec();
        for wanted in [ComponentState::Abnormal, ComponentState::Healthy] {
            order.extend(head.iter().copied().filter(|a| observations[a] == wanted));
        }
        Ok((selection, QueueState { order }))
    }
}

/// Builds a queue from an explicit order.
pub fn queue_init(n: usize, initial_order: Vec<usize>) -> Result<QueueState> {
    QueueState::new(n, initial_order)
}

/// Probes the head of `queue` and returns the selection with the updated queue.
pub fn queue_step(
    queue: &QueueState,
    k: usize,
    observations: &BTreeMap<usize, Observation>,
) -> Result<(Selection, QueueState)> {
    queue.step(k, observations)
}
