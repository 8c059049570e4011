//! Closed-form Whittle index.
//!
//! For an arm last observed healthy `t` slots ago,
//!
//! ```text
//! W(0, t) = c * ( p(t+1) (t + p(t)) / (1 + p(t+1) - p(t))  -  sum_{k=1..t} p(k) )
//! ```
//!
//! and an arm last observed abnormal lags one slot behind: `W(1, t) = W(0, t-1)`,
//! with `W(0, 0) = 0`. Both cases go through the same lag-indexed routine so the
//! identity holds bit for bit.

use serde::Serialize;

use crate::arm::ArmState;
use crate::attack_model::ComponentSpec;
use crate::error::{Error, Result};

/// A Whittle index value, in cost-per-slot units.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct IndexValue(pub f64);

impl IndexValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

#[inline]
fn closed_form(p_t: f64, p_next: f64, prefix: f64, t: u32, cost: f64) -> f64 {
    (p_next * (f64::from(t) + p_t) / (1.0 + p_next - p_t) - prefix) * cost
}

/// `W(0, lag)`; the index of any state depends only on its lag `t - i`.
pub fn index_at_lag(spec: &ComponentSpec, lag: u32) -> f64 {
    if lag == 0 {
        return 0.0;
    }
    let lag = effective_lag(spec, lag);
    let p = |k: u32| spec.process.marginal_p(u64::from(k));
    let mut prefix = 0.0;
    for k in 1..=lag {
        prefix += p(k);
    }
    closed_form(p(lag), p(lag + 1), prefix, lag, spec.cost)
}

/// Once `p` sits exactly at its limit `P`, `W(0, t) = c (P (t + P) - sum p)`
/// stops changing, so larger lags reuse the saturated one.
fn effective_lag(spec: &ComponentSpec, lag: u32) -> u32 {
    match spec.process.exact_saturation() {
        Some(sat) if sat < u64::from(lag) => sat as u32,
        _ => lag,
    }
}

/// Whittle index `W(i, t)` of an arm state.
pub fn whittle_index(spec: &ComponentSpec, state: ArmState) -> IndexValue {
    IndexValue(index_at_lag(spec, state.lag()))
}

/// Precomputed `W(0, lag)` for `lag = 0..=max_lag`, bitwise equal to
/// [`index_at_lag`]. Lags past the end fall back to the direct formula.
#[derive(Debug, Clone)]
pub struct IndexCurve {
    by_lag: Vec<f64>,
}

impl IndexCurve {
    pub fn new(spec: &ComponentSpec, max_lag: u32) -> Self {
        let p = |k: u32| spec.process.marginal_p(u64::from(k));
        let mut by_lag = Vec::with_capacity(max_lag as usize + 1);
        by_lag.push(0.0);
        let mut prefix = 0.0;
        for lag in 1..=max_lag {
            if effective_lag(spec, lag) < lag {
                let saturated = by_lag[lag as usize - 1];
                by_lag.push(saturated);
                continue;
            }
            prefix += p(lag);
            by_lag.push(closed_form(p(lag), p(lag + 1), prefix, lag, spec.cost));
        }
        IndexCurve { by_lag }
    }

    pub fn max_lag(&self) -> u32 {
        (self.by_lag.len() - 1) as u32
    }

    /// `W(0, lag)` if tabulated.
    pub fn at_lag(&self, lag: u32) -> Option<f64> {
        self.by_lag.get(lag as usize).copied()
    }

    pub fn values(&self) -> &[f64] {
        &self.by_lag
    }
}

/// True iff `W(0, t)` is strictly increasing on `0 <= t <= horizon`.
pub fn verify_strict_indexability(spec: &ComponentSpec, horizon: u32) -> Result<bool> {
    if horizon < 2 {
        return Err(Error::TooSmall {
            what: "indexability horizon",
            min: 2,
            got: u64::from(horizon),
        });
    }
    let curve = IndexCurve::new(spec, horizon);
    Ok(curve.values().windows(2).all(|w| w[1] > w[0]))
}

/// One row of an index table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndexRow {
    pub state: ArmState,
    pub index: IndexValue,
}

/// `W(0, t)` then `W(1, t)` for `t = 1..=horizon`.
pub fn index_table(spec: &ComponentSpec, horizon: u32) -> Result<Vec<IndexRow>> {
    if horizon < 1 {
        return Err(Error::TooSmall {
            what: "index table horizon",
            min: 1,
            got: 0,
        });
    }
    let curve = IndexCurve::new(spec, horizon);
    let rows = (0..=1u8)
        .flat_map(|i| (1..=horizon).map(move |t| ArmState { i, t }))
        .map(|state| IndexRow {
            state,
            index: IndexValue(curve.at_lag(state.lag()).expect("lag <= horizon")),
        })
        .collect();
    Ok(rows)
}
