//! Seeded Monte Carlo simulation of the true network under a policy.
//!
//! Timing within a slot: the cost of every abnormal component is charged,
//! probed components are observed, and repairs take effect in the next slot.
//! A component observed healthy restarts its attack clock and gets its first
//! flip chance (with `hazard(1)`) on the way into the next slot.
//!
//! Every arm draws exactly one uniform per slot from its own stream, keyed by
//! `(seed, replication, arm)`, so different policies see common random numbers
//! and results do not depend on thread scheduling.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arm::{ArmState, ComponentState, Observation};
use crate::attack_model::ComponentSpec;
use crate::error::{Error, Result};
use crate::policies::{select_myopic, select_random, select_whittle, PolicyKind, QueueState, Selection};
use crate::subsidy::{relaxed_select, RelaxedPlan};

/// Stream id reserved for the policy's own randomness.
const POLICY_STREAM: u64 = 0xFF_FFFF;

/// Replications handled sequentially by one parallel task.
const CHUNK: usize = 256;

/// The random stream of one arm (or the policy) in one replication.
pub fn stream(seed: u64, replication: u64, arm: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((replication << 24) | (arm & POLICY_STREAM));
    rng
}

/// True component states plus the bookkeeping that drives the hazards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorldState {
    status: Vec<ComponentState>,
    /// Flip opportunities since the component was last known healthy.
    age: Vec<u32>,
    last_seen: Vec<ComponentState>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub observations: BTreeMap<usize, Observation>,
    pub cost: f64,
}

impl WorldState {
    /// Samples true states consistent with the given arm states.
    pub fn sample<R: Rng>(specs: &[ComponentSpec], initial: &[ArmState], rngs: &mut [R]) -> Result<Self> {
        check_arms(specs.len(), initial.len(), rngs.len())?;
        let mut world = WorldState {
            status: Vec::with_capacity(specs.len()),
            age: Vec::with_capacity(specs.len()),
            last_seen: Vec::with_capacity(specs.len()),
        };
        for ((spec, &state), rng) in specs.iter().zip(initial).zip(rngs.iter_mut()) {
            let state = ArmState::new(state.i, state.t)?;
            let u: f64 = rng.gen();
            let abnormal = u < spec.process.marginal_p(u64::from(state.lag()));
            world.status.push(if abnormal {
                ComponentState::Abnormal
            } else {
                ComponentState::Healthy
            });
            world.age.push(state.lag());
            world.last_seen.push(ComponentState::from_bit(state.i).expect("validated"));
        }
        Ok(world)
    }

    pub fn status(&self) -> &[ComponentState] {
        &self.status
    }

    /// The controller's view `(i, t)` of each arm, derived from the world's
    /// own bookkeeping.
    pub fn arm_states(&self) -> Vec<ArmState> {
        self.age
            .iter()
            .zip(&self.last_seen)
            .map(|(&age, &seen)| {
                let i = seen.as_bit();
                ArmState { i, t: age + u32::from(i) }
            })
            .collect()
    }

    /// Advances one slot with the given arms probed.
    pub fn step<R: Rng>(
        &mut self,
        specs: &[ComponentSpec],
        selection: &Selection,
        rngs: &mut [R],
    ) -> Result<StepOutcome> {
        check_arms(specs.len(), self.status.len(), rngs.len())?;
        if let Some(&arm) = selection.arms().iter().find(|&&a| a >= specs.len()) {
            return Err(Error::ArmOutOfRange { arm, n: specs.len() });
        }
        let mut observations = BTreeMap::new();
        let mut cost = 0.0;
        for (arm, spec) in specs.iter().enumerate() {
            let u: f64 = rngs[arm].gen();
            let current = self.status[arm];
            if current == ComponentState::Abnormal {
                cost += spec.cost;
            }
            let clock = if selection.contains(arm) {
                observations.insert(arm, current);
                self.last_seen[arm] = current;
                match current {
                    ComponentState::Abnormal => {
                        self.status[arm] = ComponentState::Healthy;
                        self.age[arm] = 0;
                        continue;
                    }
                    ComponentState::Healthy => 1,
                }
            } else {
                self.age[arm].saturating_add(1)
            };
            self.age[arm] = clock;
            if self.status[arm] == ComponentState::Healthy && u < spec.process.hazard(u64::from(clock)) {
                self.status[arm] = ComponentState::Abnormal;
            }
        }
        Ok(StepOutcome { observations, cost })
    }
}

fn check_arms(n: usize, states: usize, streams: usize) -> Result<()> {
    for (what, got) in [("arm states", states), ("random streams", streams)] {
        if got != n {
            return Err(Error::LengthMismatch { what, expected: n, got });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub specs: Vec<ComponentSpec>,
    pub k: usize,
    pub horizon: u32,
    pub policy: PolicyKind,
    pub replications: u64,
    pub seed: u64,
    /// Starting arm states; every arm starts at `(0, 1)` when `None`.
    pub initial: Option<Vec<ArmState>>,
}

impl RunConfig {
    pub fn new(specs: Vec<ComponentSpec>, k: usize, horizon: u32, policy: PolicyKind) -> Self {
        RunConfig {
            specs,
            k,
            horizon,
            policy,
            replications: 1,
            seed: 0,
            initial: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.specs.len();
        if self.k == 0 || self.k > n {
            return Err(Error::InvalidBudget { k: self.k, n });
        }
        if self.horizon < 1 {
            return Err(Error::TooSmall { what: "horizon", min: 1, got: 0 });
        }
        if self.replications < 1 {
            return Err(Error::TooSmall { what: "replications", min: 1, got: 0 });
        }
        if let Some(initial) = &self.initial {
            if initial.len() != n {
                return Err(Error::LengthMismatch {
                    what: "initial arm states",
                    expected: n,
                    got: initial.len(),
                });
            }
            for s in initial {
                ArmState::new(s.i, s.t)?;
            }
        }
        Ok(())
    }

    fn initial_states(&self) -> Vec<ArmState> {
        self.initial
            .clone()
            .unwrap_or_else(|| vec![ArmState::healthy_start(); self.specs.len()])
    }
}

/// Mean cumulative cost per slot across replications, with standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostTrajectory {
    pub policy: PolicyKind,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub replications: u64,
}

impl CostTrajectory {
    pub fn final_mean(&self) -> f64 {
        *self.mean.last().expect("horizon >= 1")
    }

    pub fn final_stderr(&self) -> f64 {
        *self.stderr.last().expect("horizon >= 1")
    }
}

/// Selection rule with whatever state it carries between slots.
enum Controller {
    Whittle,
    Myopic,
    Queue(QueueState),
    Random(Box<ChaCha8Rng>),
}

impl Controller {
    fn new(config: &RunConfig, initial: &[ArmState], replication: u64) -> Result<Self> {
        Ok(match config.policy {
            PolicyKind::Whittle => Controller::Whittle,
            PolicyKind::Myopic => Controller::Myopic,
            PolicyKind::Queue => Controller::Queue(QueueState::from_beliefs(&config.specs, initial)?),
            PolicyKind::Random => Controller::Random(Box::new(stream(config.seed, replication, POLICY_STREAM))),
        })
    }

    fn select(&mut self, specs: &[ComponentSpec], states: &[ArmState], k: usize) -> Result<Selection> {
        match self {
            Controller::Whittle => select_whittle(specs, states, k),
            Controller::Myopic => select_myopic(specs, states, k),
            Controller::Queue(queue) => queue.head(k),
            Controller::Random(rng) => select_random(specs.len(), k, rng.as_mut()),
        }
    }

    fn observe(&mut self, k: usize, observations: &BTreeMap<usize, Observation>) -> Result<()> {
        if let Controller::Queue(queue) = self {
            *queue = queue.step(k, observations)?.1;
        }
        Ok(())
    }
}

/// One replication: the cumulative cost after each slot.
pub fn run_replication(config: &RunConfig, replication: u64) -> Result<Vec<f64>> {
    config.validate()?;
    let n = config.specs.len();
    let mut rngs: Vec<ChaCha8Rng> = (0..n as u64).map(|arm| stream(config.seed, replication, arm)).collect();
    let initial = config.initial_states();
    let mut world = WorldState::sample(&config.specs, &initial, &mut rngs)?;
    let mut controller = Controller::new(config, &initial, replication)?;
    let mut cumulative = 0.0;
    let mut out = Vec::with_capacity(config.horizon as usize);
    for _ in 0..config.horizon {
        let states = world.arm_states();
        let selection = controller.select(&config.specs, &states, config.k)?;
        let outcome = world.step(&config.specs, &selection, &mut rngs)?;
        controller.observe(config.k, &outcome.observations)?;
        cumulative += outcome.cost;
        out.push(cumulative);
    }
    Ok(out)
}

/// Running mean and sum of squared deviations per slot.
#[derive(Debug, Clone)]
struct Moments {
    count: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(len: usize) -> Self {
        Moments {
            count: 0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    fn push(&mut self, sample: &[f64]) {
        self.count += 1;
        let n = self.count as f64;
        for ((mean, m2), &x) in self.mean.iter_mut().zip(&mut self.m2).zip(sample) {
            let delta = x - *mean;
            *mean += delta / n;
            *m2 += delta * (x - *mean);
        }
    }

    fn merge(mut self, other: &Moments) -> Self {
        if other.count == 0 {
            return self;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let total = na + nb;
        for j in 0..self.mean.len() {
            let delta = other.mean[j] - self.mean[j];
            self.mean[j] += delta * nb / total;
            self.m2[j] += other.m2[j] + delta * delta * na * nb / total;
        }
        self.count += other.count;
        self
    }
}

/// Runs all replications (in parallel chunks, reduced in replication order).
pub fn run(config: &RunConfig) -> Result<CostTrajectory> {
    config.validate()?;
    let len = config.horizon as usize;
    let chunks: Vec<(u64, u64)> = (0..config.replications)
        .step_by(CHUNK)
        .map(|start| (start, (start + CHUNK as u64).min(config.replications)))
        .collect();
    let partial: Vec<Moments> = chunks
        .par_iter()
        .map(|&(start, end)| {
            let mut m = Moments::new(len);
            for rep in start..end {
                m.push(&run_replication(config, rep)?);
            }
            Ok(m)
        })
        .collect::<Result<_>>()?;
    let total = partial.iter().fold(Moments::new(len), |acc, m| acc.merge(m));
    let r = total.count as f64;
    let stderr = total
        .m2
        .iter()
        .map(|&m2| if total.count > 1 { (m2 / (r - 1.0) / r).sqrt() } else { 0.0 })
        .collect();
    Ok(CostTrajectory {
        policy: config.policy,
        mean: total.mean,
        stderr,
        replications: config.replications,
    })
}

/// Long-run behaviour of the relaxed policy in a single replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelaxedRun {
    pub mean_activations: f64,
    pub mean_cost: f64,
}

/// Runs the relaxed (average-budget) policy for `slots` slots.
pub fn run_relaxed(specs: &[ComponentSpec], plan: &RelaxedPlan, slots: u64, seed: u64) -> Result<RelaxedRun> {
    if slots < 1 {
        return Err(Error::TooSmall { what: "slots", min: 1, got: 0 });
    }
    let n = specs.len();
    let mut rngs: Vec<ChaCha8Rng> = (0..n as u64).map(|arm| stream(seed, 0, arm)).collect();
    let mut policy_rng = stream(seed, 0, POLICY_STREAM);
    let mut world = WorldState::sample(specs, &vec![ArmState::healthy_start(); n], &mut rngs)?;
    let (mut activations, mut cost) = (0u64, 0.0);
    for _ in 0..slots {
        let active = relaxed_select(specs, &world.arm_states(), plan, &mut policy_rng)?;
        activations += active.len() as u64;
        let selection = Selection::new(active, n)?;
        cost += world.step(specs, &selection, &mut rngs)?.cost;
    }
    Ok(RelaxedRun {
        mean_activations: activations as f64 / slots as f64,
        mean_cost: cost / slots as f64,
    })
}
