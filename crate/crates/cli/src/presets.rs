//! Built-in reference experiments.

use rmab_core::{ComponentSpec, PolicyKind};

use crate::config::{ExperimentConfig, Mode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    /// Whittle index curves of one component, t = 1..7.
    Fig2,
    /// Four heterogeneous components, one probe per slot, exact costs for T = 1..6.
    Fig3,
    /// Eight Markov components, two probes per slot, simulated over 500 slots.
    Fig4,
}

pub const FIG2_TABLE: [f64; 8] = [0.5, 0.7, 0.85, 0.95, 0.97, 0.975, 0.978, 0.98];
pub const FIG2_COST: f64 = 1.0;
pub const FIG2_HORIZON: u32 = 7;

pub const FIG3_TABLES: [[f64; 6]; 4] = [
    [0.5, 0.7, 0.85, 0.95, 0.97, 0.975],
    [0.3, 0.4, 0.48, 0.54, 0.57, 0.59],
    [0.36, 0.46, 0.5, 0.53, 0.55, 0.56],
    [0.6, 0.78, 0.9, 0.96, 0.98, 0.99],
];
pub const FIG3_COSTS: [f64; 4] = [0.8, 1.0, 1.2, 0.9];
pub const FIG3_K: usize = 1;
pub const FIG3_HORIZON: u32 = 6;

pub const FIG4_Q: [f64; 8] = [0.2, 0.3, 0.3, 0.5, 0.6, 0.7, 0.7, 0.8];
pub const FIG4_COSTS: [f64; 8] = [2.5, 2.0, 1.8, 1.5, 1.2, 1.0, 0.6, 0.5];
pub const FIG4_K: usize = 2;
pub const FIG4_HORIZON: u32 = 500;
pub const FIG4_REPLICATIONS: u64 = 2000;

fn base(components: Vec<ComponentSpec>, mode: Mode) -> ExperimentConfig {
    ExperimentConfig {
        components,
        network: None,
        k: None,
        horizon: None,
        policies: vec![PolicyKind::Whittle, PolicyKind::Myopic],
        replications: 1,
        seed: 0,
        initial: None,
        mode: Some(mode),
        guard: None,
    }
}

impl Preset {
    pub fn config(self) -> ExperimentConfig {
        match self {
            Preset::Fig2 => {
                let spec = ComponentSpec::table(FIG2_TABLE.to_vec(), FIG2_COST).expect("valid preset");
                ExperimentConfig {
                    horizon: Some(FIG2_HORIZON),
                    ..base(vec![spec], Mode::Index)
                }
            }
            Preset::Fig3 => {
                let specs = FIG3_TABLES
                    .iter()
                    .zip(FIG3_COSTS)
                    .map(|(p, c)| ComponentSpec::table(p.to_vec(), c).expect("valid preset"))
                    .collect();
                ExperimentConfig {
                    k: Some(FIG3_K),
                    horizon: Some(FIG3_HORIZON),
                    ..base(specs, Mode::Oracle)
                }
            }
            Preset::Fig4 => {
                let specs = FIG4_Q
                    .iter()
                    .zip(FIG4_COSTS)
                    .map(|(&q, c)| ComponentSpec::markov(q, c).expect("valid preset"))
                    .collect();
                ExperimentConfig {
                    k: Some(FIG4_K),
                    horizon: Some(FIG4_HORIZON),
                    replications: FIG4_REPLICATIONS,
                    ..base(specs, Mode::Simulate)
                }
            }
        }
    }
}
