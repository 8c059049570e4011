//! Per-component attack processes.
//!
//! A component that was last reset `t` slots ago is abnormal with probability
//! `p(t)`. The sequence starts at `p(0) = 0` and is nondecreasing because the
//! abnormal state is absorbing while the component is not probed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Monotone abnormal-probability sequence `{p(t)}` of one component.
#[derive(Debug, Clone, PartialEq)]
pub enum AttackProcess {
    /// I.i.d. attacks succeeding with probability `q` in every slot:
    /// `p(t) = 1 - (1 - q)^t`.
    Markov { q: f64 },
    /// Tabulated `p(1), p(2), ...`; queries past the end clamp to the last value.
    Table { values: Vec<f64> },
}

impl AttackProcess {
    pub fn markov(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidProbability {
                what: "markov attack rate q (must lie in (0, 1))",
                value: q,
            });
        }
        Ok(AttackProcess::Markov { q })
    }

    pub fn table(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyTable);
        }
        let mut prev = 0.0;
        for (idx, &v) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidProbability {
                    what: "attack table entry",
                    value: v,
                });
            }
            if v < prev {
                return Err(Error::NonMonotoneTable {
                    t: idx + 1,
                    prev,
                    next: v,
                });
            }
            prev = v;
        }
        Ok(AttackProcess::Table { values })
    }

    /// `p(t)`, the probability of being abnormal `t` slots after a reset.
    pub fn marginal_p(&self, t: u64) -> f64 {
        if t == 0 {
            return 0.0;
        }
        match self {
            AttackProcess::Markov { q } => {
                let survive = 1.0 - q;
                let tail = match i32::try_from(t) {
                    Ok(n) => survive.powi(n),
                    Err(_) => survive.powf(t as f64),
                };
                1.0 - tail
            }
            AttackProcess::Table { values } => {
                let idx = usize::try_from(t).unwrap_or(usize::MAX).min(values.len());
                values[idx - 1]
            }
        }
    }

    /// Conditional probability of a healthy component turning abnormal on
    /// step `t` after a reset: `(p(t) - p(t-1)) / (1 - p(t-1))`.
    ///
    /// Returns 1 when `p(t-1) = 1`, and 0 for `t = 0`.
    pub fn hazard(&self, t: u64) -> f64 {
        if t == 0 {
            return 0.0;
        }
        match self {
            AttackProcess::Markov { q } => *q,
            AttackProcess::Table { .. } => {
                let prev = self.marginal_p(t - 1);
                if prev >= 1.0 {
                    return 1.0;
                }
                ((self.marginal_p(t) - prev) / (1.0 - prev)).clamp(0.0, 1.0)
            }
        }
    }

    /// Condition C1 on `[1, horizon]`: the increments `p(t+1) - p(t)` for
    /// `1 <= t <= horizon - 1` are positive and strictly decreasing.
    ///
    /// The Markov case holds analytically for every horizon; floating-point
    /// saturation of `p(t)` at 1 is not a violation.
    pub fn check_c1(&self, horizon: u64) -> bool {
        match self {
            AttackProcess::Markov { .. } => true,
            AttackProcess::Table { .. } => {
                let mut prev_inc = f64::INFINITY;
                for t in 1..horizon {
                    let inc = self.marginal_p(t + 1) - self.marginal_p(t);
                    if !(inc > 0.0 && inc < prev_inc) {
                        return false;
                    }
                    prev_inc = inc;
                }
                true
            }
        }
    }

    /// `lim p(t)` as `t` grows.
    pub fn limit(&self) -> f64 {
        match self {
            AttackProcess::Markov { .. } => 1.0,
            AttackProcess::Table { values } => *values.last().expect("validated non-empty"),
        }
    }

    /// First `t >= 1` at which `p(t)` is within `tol` of its limit, capped at `cap`.
    pub fn saturation_time(&self, tol: f64, cap: u64) -> u64 {
        let limit = self.limit();
        match self {
            AttackProcess::Table { values } => {
                let len = values.len() as u64;
                (1..=len.min(cap))
                    .find(|&t| limit - self.marginal_p(t) <= tol)
                    .unwrap_or(len.min(cap))
                    .max(1)
            }
            AttackProcess::Markov { q } => {
                // (1-q)^t <= tol  <=>  t >= ln(tol) / ln(1-q)
                let guess = (tol.ln() / (1.0 - q).ln()).ceil().max(1.0);
                let mut t = if guess >= cap as f64 { cap } else { guess as u64 };
                while t > 1 && limit - self.marginal_p(t - 1) <= tol {
                    t -= 1;
                }
                while t < cap && limit - self.marginal_p(t) > tol {
                    t += 1;
                }
                t
            }
        }
    }

    /// First `t >= 1` at which the computed `p(t)` equals its limit exactly.
    /// From there on the marginal is constant, and so is the index.
    pub fn exact_saturation(&self) -> Option<u64> {
        let limit = self.limit();
        match self {
            AttackProcess::Table { values } => {
                values.iter().position(|&v| v == limit).map(|j| j as u64 + 1)
            }
            AttackProcess::Markov { q } => {
                let log_survive = (1.0 - q).ln();
                if log_survive == 0.0 {
                    return None;
                }
                let guess = ((f64::EPSILON / 2.0).ln() / log_survive).ceil().max(1.0);
                if guess > 1e15 {
                    return None;
                }
                let mut t = guess as u64;
                while t > 1 && self.marginal_p(t - 1) == limit {
                    t -= 1;
                }
                while self.marginal_p(t) < limit {
                    t += 1;
                }
                Some(t)
            }
        }
    }

    /// True when every `p(t)` is zero.
    pub fn is_inert(&self) -> bool {
        self.limit() == 0.0
    }
}

/// An attack process together with the per-slot cost of being abnormal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComponentDescriptor", into = "ComponentDescriptor")]
pub struct ComponentSpec {
    pub process: AttackProcess,
    pub cost: f64,
}

impl ComponentSpec {
    pub fn new(process: AttackProcess, cost: f64) -> Result<Self> {
        if !(cost.is_finite() && cost >= 0.0) {
            return Err(Error::InvalidCost(cost));
        }
        Ok(ComponentSpec { process, cost })
    }

    pub fn markov(q: f64, cost: f64) -> Result<Self> {
        Self::new(AttackProcess::markov(q)?, cost)
    }

    pub fn table(values: Vec<f64>, cost: f64) -> Result<Self> {
        Self::new(AttackProcess::table(values)?, cost)
    }

    pub fn with_cost(&self, cost: f64) -> Result<Self> {
        Self::new(self.process.clone(), cost)
    }
}

/// JSON wire form of a component:
/// `{"kind":"markov","q":0.5,"cost":1.0}` or `{"kind":"table","p":[...],"cost":1.0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ComponentDescriptor {
    Markov { q: f64, cost: f64 },
    Table { p: Vec<f64>, cost: f64 },
}

impl TryFrom<ComponentDescriptor> for ComponentSpec {
    type Error = Error;

    fn try_from(desc: ComponentDescriptor) -> Result<Self> {
        match desc {
            ComponentDescriptor::Markov { q, cost } => ComponentSpec::markov(q, cost),
            ComponentDescriptor::Table { p, cost } => ComponentSpec::table(p, cost),
        }
    }
}

impl From<ComponentSpec> for ComponentDescriptor {
    fn from(spec: ComponentSpec) -> Self {
        match spec.process {
            AttackProcess::Markov { q } => ComponentDescriptor::Markov { q, cost: spec.cost },
            AttackProcess::Table { values } => ComponentDescriptor::Table {
                p: values,
                cost: spec.cost,
            },
        }
    }
}
