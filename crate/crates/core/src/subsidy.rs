//! Single-arm problem with a subsidy `λ` for passivity, and the relaxed
//! (average-budget) policy built on it.
//!
//! Under a nonnegative subsidy the optimal single-arm policy waits `t0*`
//! slots after a healthy observation and `t1* = t0* + 1` slots after an
//! abnormal one. With cost `c` its average reward is
//!
//! ```text
//! g(λ) = (λ (t0 - 1 + p(t0)) - c * sum_{k=1..t0} p(k)) / (t0 + p(t0))
//! ```
//!
//! maximized over `t0`. One activation happens per renewal cycle of mean
//! length `t0 + p(t0)`, which gives the activation rate. A negative subsidy
//! makes every state active.

use rand::Rng;
use serde::Serialize;

use crate::arm::{belief_abnormal, ArmState};
use crate::attack_model::ComponentSpec;
use crate::error::{Error, Result};
use crate::whittle::{whittle_index, IndexCurve};

/// Default bound on stopping times.
pub const DEFAULT_T_CAP: u32 = 10_000;

/// Search over stopping times ends once `p(t)` is this close to its limit.
pub const SATURATION_TOL: f64 = 1e-12;

/// Optimal single-arm stopping pair under a fixed subsidy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SubsidyPolicy {
    pub t0_star: u32,
    pub t1_star: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainResult {
    pub g: f64,
    pub t0_star: u32,
}

fn check_cap(t_cap: u32) -> Result<()> {
    if t_cap < 1 {
        return Err(Error::TooSmall {
            what: "t_cap",
            min: 1,
            got: 0,
        });
    }
    Ok(())
}

/// Largest stopping time worth searching.
fn search_limit(spec: &ComponentSpec, t_cap: u32) -> u32 {
    spec.process
        .saturation_time(SATURATION_TOL, u64::from(t_cap))
        .min(u64::from(t_cap)) as u32
}

/// Average reward of waiting `t0` slots after a healthy observation.
fn stopping_gain(spec: &ComponentSpec, lambda: f64, t0: u32, prefix: f64) -> f64 {
    let p_t0 = spec.process.marginal_p(u64::from(t0));
    let t0 = f64::from(t0);
    (lambda * (t0 - 1.0 + p_t0) - spec.cost * prefix) / (t0 + p_t0)
}

/// Smallest maximizing `t0` in `[1, t_cap]` (cut short at saturation).
pub fn optimal_stopping(spec: &ComponentSpec, lambda: f64, t_cap: u32) -> Result<SubsidyPolicy> {
    check_cap(t_cap)?;
    if lambda < 0.0 {
        return Ok(SubsidyPolicy {
            t0_star: 1,
            t1_star: 1,
        });
    }
    let mut prefix = 0.0;
    let mut best = (f64::NEG_INFINITY, 1);
    for t0 in 1..=search_limit(spec, t_cap) {
        prefix += spec.process.marginal_p(u64::from(t0));
        let g = stopping_gain(spec, lambda, t0, prefix);
        if g > best.0 {
            best = (g, t0);
        }
    }
    Ok(SubsidyPolicy {
        t0_star: best.1,
        t1_star: best.1 + 1,
    })
}

/// Maximum single-arm average reward `g(λ)`.
pub fn gain(spec: &ComponentSpec, lambda: f64, t_cap: u32) -> Result<GainResult> {
    let policy = optimal_stopping(spec, lambda, t_cap)?;
    if lambda < 0.0 {
        // Always active: a healthy observation costs p(1) next slot, an
        // abnormal one is followed by a certainly healthy slot.
        let p1 = spec.process.marginal_p(1);
        return Ok(GainResult {
            g: -spec.cost * p1 / (1.0 + p1),
            t0_star: 1,
        });
    }
    let prefix: f64 = (1..=policy.t0_star)
        .map(|k| spec.process.marginal_p(u64::from(k)))
        .sum();
    Ok(GainResult {
        g: stopping_gain(spec, lambda, policy.t0_star, prefix),
        t0_star: policy.t0_star,
    })
}

/// Long-run fraction of slots in which the single-arm optimal policy probes.
pub fn activation_rate(spec: &ComponentSpec, lambda: f64, t_cap: u32) -> Result<f64> {
    let policy = optimal_stopping(spec, lambda, t_cap)?;
    if lambda < 0.0 {
        return Ok(1.0);
    }
    let p = spec.process.marginal_p(u64::from(policy.t0_star));
    Ok(1.0 / (f64::from(policy.t0_star) + p))
}

/// `Σ_n g_n(λ) - (N - K) λ`; convex in `λ` and minimized at `λ*`.
pub fn lagrangian_dual(specs: &[ComponentSpec], k: usize, lambda: f64, t_cap: u32) -> Result<f64> {
    let mut total = 0.0;
    for spec in specs {
        total += gain(spec, lambda, t_cap)?.g;
    }
    Ok(total - (specs.len() - k) as f64 * lambda)
}

/// Optimal subsidy for the average-budget relaxation and the per-arm
/// randomization applied at states whose index equals it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelaxedPlan {
    pub lambda_star: f64,
    /// Probability of probing an arm sitting exactly at `λ*`; 0 for arms
    /// with no state at the boundary.
    pub mixing: Vec<f64>,
    /// Long-run activation rate of each arm under the mixed threshold policy.
    pub rates: Vec<f64>,
    /// Long-run average cost of each arm under the mixed threshold policy.
    pub costs: Vec<f64>,
    pub t0_star: Vec<u32>,
}

impl RelaxedPlan {
    pub fn total_rate(&self) -> f64 {
        self.rates.iter().sum()
    }

    pub fn average_cost(&self) -> f64 {
        self.costs.iter().sum()
    }
}

/// Renewal statistics of one arm under the threshold policy
/// "probe if W > b, probe with probability θ if W = b".
#[derive(Debug, Clone, Copy)]
struct ThresholdStats {
    rate: f64,
    cost: f64,
    touches_boundary: bool,
}

struct ArmCurve<'a> {
    spec: &'a ComponentSpec,
    curve: IndexCurve,
    beliefs: Vec<f64>,
}

impl<'a> ArmCurve<'a> {
    fn new(spec: &'a ComponentSpec, t_cap: u32) -> Self {
        // tabulate until the index is exactly constant, so the frozen tail
        // below agrees with the index computed state by state
        let last = spec
            .process
            .exact_saturation()
            .map_or(u64::from(t_cap), |s| s.min(u64::from(t_cap)))
            .max(u64::from(search_limit(spec, t_cap))) as u32
            + 1;
        let curve = IndexCurve::new(spec, last);
        let beliefs = (0..=last)
            .map(|lag| spec.process.marginal_p(u64::from(lag)))
            .collect();
        ArmCurve { spec, curve, beliefs }
    }

    fn last_lag(&self) -> u32 {
        self.curve.max_lag()
    }

    /// One cycle started right after an observation of state `i`: expected
    /// length, expected cost, probability of ending on an abnormal
    /// observation. `None` if the arm may never be probed again.
    fn cycle(&self, i: u8, b: f64, theta: f64, touched: &mut bool) -> Option<(f64, f64, f64)> {
        let alpha = |w: f64| {
            if w > b {
                1.0
            } else if w == b {
                theta
            } else {
                0.0
            }
        };
        let last = self.last_lag();
        let start = if i == 1 { 0 } else { 1 };
        let (mut survive, mut len, mut cost, mut rho) = (1.0f64, 0.0, 0.0, 0.0);
        for lag in start..=last {
            let w = self.curve.at_lag(lag).expect("tabulated");
            *touched |= w == b;
            let slot = f64::from(lag) + f64::from(i);
            let belief = self.beliefs[lag as usize];
            let a = alpha(w);
            cost += survive * self.spec.cost * belief;
            len += survive * a * slot;
            rho += survive * a * belief;
            survive *= 1.0 - a;
            if survive == 0.0 {
                return Some((len, cost, rho));
            }
        }
        // Past the last tabulated lag the index and belief are frozen.
        let a = alpha(self.curve.at_lag(last).expect("tabulated"));
        if a == 0.0 {
            return None;
        }
        let belief = self.beliefs[last as usize];
        let slot = f64::from(last) + f64::from(i);
        len += survive * (slot + 1.0 / a);
        cost += survive * self.spec.cost * belief * (1.0 - a) / a;
        rho += survive * belief;
        Some((len, cost, rho))
    }

    fn stats(&self, b: f64, theta: f64) -> ThresholdStats {
        let mut touches_boundary = false;
        let healthy = self.cycle(0, b, theta, &mut touches_boundary);
        let abnormal = self.cycle(1, b, theta, &mut touches_boundary);
        let (Some((len0, cost0, rho0)), Some((len1, cost1, rho1))) = (healthy, abnormal) else {
            // Never probed again: the component ends up abnormal for good.
            let limit = self.spec.process.limit();
            return ThresholdStats {
                rate: 0.0,
                cost: self.spec.cost * limit,
                touches_boundary,
            };
        };
        // Stationary share of cycles that start after an abnormal observation.
        let denom = 1.0 - rho1 + rho0;
        let share1 = if denom > 0.0 { rho0 / denom } else { 1.0 };
        let len = (1.0 - share1) * len0 + share1 * len1;
        let cost = (1.0 - share1) * cost0 + share1 * cost1;
        ThresholdStats {
            rate: 1.0 / len,
            cost: cost / len,
            touches_boundary,
        }
    }
}

fn total_rate(curves: &[ArmCurve<'_>], b: f64, theta: f64) -> f64 {
    curves.iter().map(|c| c.stats(b, theta).rate).sum()
}

/// Finds `λ* >= 0` at which the summed activation rates cross `k`, with
/// boundary randomization making the mixed total exactly `k`.
///
/// Candidate subsidies are the index values of all arms; the summed rate is
/// a nonincreasing step function of the subsidy, so a binary search over the
/// sorted candidates locates the jump and a bisection on the mixing
/// probability closes the gap.
pub fn solve_lambda_star(specs: &[ComponentSpec], k: usize, t_cap: u32) -> Result<RelaxedPlan> {
    check_cap(t_cap)?;
    let n = specs.len();
    if k == 0 || k >= n {
        return Err(Error::InvalidBudget { k, n });
    }
    let target = k as f64;
    let curves: Vec<ArmCurve<'_>> = specs.iter().map(|s| ArmCurve::new(s, t_cap)).collect();

    let mut candidates: Vec<f64> = std::iter::once(0.0)
        .chain(curves.iter().flat_map(|c| c.curve.values().iter().copied()))
        .filter(|w| *w >= 0.0)
        .collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    // First candidate whose lower (boundary-passive) rate is within budget.
    let idx = candidates.partition_point(|&b| total_rate(&curves, b, 0.0) > target);
    let lambda_star = candidates[idx.min(candidates.len() - 1)];

    let low = total_rate(&curves, lambda_star, 0.0);
    let theta = if low >= target - 1e-12 {
        0.0
    } else {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if total_rate(&curves, lambda_star, mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        0.5 * (lo + hi)
    };

    let mut mixing = Vec::with_capacity(n);
    let mut rates = Vec::with_capacity(n);
    let mut costs = Vec::with_capacity(n);
    let mut t0_star = Vec::with_capacity(n);
    for (curve, spec) in curves.iter().zip(specs) {
        let stats = curve.stats(lambda_star, theta);
        mixing.push(if stats.touches_boundary { theta } else { 0.0 });
        rates.push(stats.rate);
        costs.push(stats.cost);
        t0_star.push(optimal_stopping(spec, lambda_star, t_cap)?.t0_star);
    }
    Ok(RelaxedPlan {
        lambda_star,
        mixing,
        rates,
        costs,
        t0_star,
    })
}

/// Arms probed this slot by the relaxed policy: index above `λ*` always,
/// index equal to `λ*` with the plan's mixing probability.
pub fn relaxed_select<R: Rng + ?Sized>(
    specs: &[ComponentSpec],
    states: &[ArmState],
    plan: &RelaxedPlan,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if specs.len() != states.len() || plan.mixing.len() != specs.len() {
        return Err(Error::LengthMismatch {
            what: "relaxed plan arms",
            expected: specs.len(),
            got: states.len().min(plan.mixing.len()),
        });
    }
    let mut active = Vec::new();
    for (arm, (spec, &state)) in specs.iter().zip(states).enumerate() {
        let w = whittle_index(spec, state).value();
        let probe = if w > plan.lambda_star {
            true
        } else if w == plan.lambda_star {
            rng.gen::<f64>() < plan.mixing[arm]
        } else {
            false
        };
        if probe {
            active.push(arm);
        }
    }
    Ok(active)
}

/// Action values of the finite-horizon single-arm problem with subsidy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionValues {
    pub probe: f64,
    pub wait: f64,
}

impl ActionValues {
    pub fn gap(self) -> f64 {
        self.wait - self.probe
    }
}

/// Backward induction over explicit arm states `(i, t)` for a single arm
/// with subsidy `lambda`, `horizon` slots including the current one. Reward
/// per slot is `-c * Pr(abnormal)` plus `lambda` when passive.
pub fn single_arm_action_values(
    spec: &ComponentSpec,
    lambda: f64,
    state: ArmState,
    horizon: u32,
) -> Result<ActionValues> {
    let state = ArmState::new(state.i, state.t)?;
    if horizon < 1 {
        return Err(Error::TooSmall {
            what: "horizon",
            min: 1,
            got: 0,
        });
    }
    let t_max = (state.t + horizon + 1) as usize;
    let belief = |i: u8, t: usize| belief_abnormal(spec, ArmState { i, t: t as u32 });
    // value[i][t] with t in 1..=t_max; index t_max+1 stays 0 and is never reached
    let mut value = [vec![0.0f64; t_max + 2], vec![0.0f64; t_max + 2]];
    for _ in 1..horizon {
        let reset_healthy = value[0][1];
        let reset_abnormal = value[1][1];
        let mut next = [vec![0.0f64; t_max + 2], vec![0.0f64; t_max + 2]];
        for i in 0..2u8 {
            for t in 1..=t_max {
                let b = belief(i, t);
                let wait = lambda + value[i as usize][t + 1];
                let probe = b * reset_abnormal + (1.0 - b) * reset_healthy;
                next[i as usize][t] = -spec.cost * b + wait.max(probe);
            }
        }
        value = next;
    }
    let b = belief(state.i, state.t as usize);
    let immediate = -spec.cost * b;
    Ok(ActionValues {
        probe: immediate + b * value[1][1] + (1.0 - b) * value[0][1],
        wait: immediate + lambda + value[state.i as usize][state.t as usize + 1],
    })
}
