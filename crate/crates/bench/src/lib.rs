//! Instances shared by the benchmarks.

use rmab_core::{ArmState, ComponentSpec};

/// Eight Markov components with mixed attack rates and costs.
pub fn mixed_markov() -> Vec<ComponentSpec> {
    [(0.2, 2.5), (0.3, 2.0), (0.3, 1.8), (0.5, 1.5), (0.6, 1.2), (0.7, 1.0), (0.7, 0.6), (0.8, 0.5)]
        .iter()
        .map(|&(q, c)| ComponentSpec::markov(q, c).expect("valid"))
        .collect()
}

/// Four table components with saturating attack curves.
pub fn small_tables() -> Vec<ComponentSpec> {
    [
        (vec![0.5, 0.7, 0.85, 0.95, 0.97, 0.975], 0.8),
        (vec![0.3, 0.4, 0.48, 0.54, 0.57, 0.59], 1.0),
        (vec![0.36, 0.46, 0.5, 0.53, 0.55, 0.56], 1.2),
        (vec![0.6, 0.78, 0.9, 0.96, 0.98, 0.99], 0.9),
    ]
    .into_iter()
    .map(|(p, c)| ComponentSpec::table(p, c).expect("valid"))
    .collect()
}

pub fn fresh(n: usize) -> Vec<ArmState> {
    vec![ArmState::healthy_start(); n]
}

/// Arm states spread over a range of lags.
pub fn staggered(n: usize) -> Vec<ArmState> {
    (0..n)
        .map(|j| ArmState {
            i: (j % 2) as u8,
            t: 1 + (3 * j % 11) as u32,
        })
        .collect()
}
