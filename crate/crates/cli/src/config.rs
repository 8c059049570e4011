//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "components": [{"kind": "markov", "q": 0.2, "cost": 2.5},
//!                  {"kind": "table", "p": [0.5, 0.7], "cost": 1.0}],
//!   "k": 1,
//!   "horizon": 50,
//!   "policies": ["whittle", "myopic"],
//!   "replications": 1000,
//!   "seed": 0
//! }
//! ```
//!
//! A queueing experiment replaces `components` and `k` by `network`, and may
//! name the downstream command in `mode`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use rmab_core::{ArmState, ComponentSpec, PolicyKind, QueueNetworkSpec};

use crate::error::{CliError, Result};

/// Subcommands, also accepted as the `mode` field of a config.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Index,
    Simulate,
    Evaluate,
    Oracle,
    Subsidy,
    Queueing,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Index => "index",
            Mode::Simulate => "simulate",
            Mode::Evaluate => "evaluate",
            Mode::Oracle => "oracle",
            Mode::Subsidy => "subsidy",
            Mode::Queueing => "queueing",
        }
    }
}

fn default_policies() -> Vec<PolicyKind> {
    vec![PolicyKind::Whittle, PolicyKind::Myopic]
}

fn default_replications() -> u64 {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<ComponentSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<QueueNetworkSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u32>,
    #[serde(default = "default_policies")]
    pub policies: Vec<PolicyKind>,
    #[serde(default = "default_replications")]
    pub replications: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<ArmState>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    /// Bound on `reachable joint states * horizon` for exact computations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard: Option<u64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|source| CliError::Schema {
            path: origin.to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn k(&self) -> Result<usize> {
        self.k.ok_or_else(|| missing("k"))
    }

    pub fn horizon(&self) -> Result<u32> {
        match self.horizon {
            None => Err(missing("horizon")),
            Some(0) => Err(CliError::Validation("horizon must be at least 1".into())),
            Some(h) => Ok(h),
        }
    }

    pub fn guard(&self) -> u64 {
        self.guard.unwrap_or(rmab_core::DEFAULT_GUARD)
    }

    pub fn initial_states(&self) -> Result<Vec<ArmState>> {
        let n = self.components.len();
        match &self.initial {
            None => Ok(vec![ArmState::healthy_start(); n]),
            Some(states) if states.len() == n => {
                for s in states {
                    ArmState::new(s.i, s.t)?;
                }
                Ok(states.clone())
            }
            Some(states) => Err(CliError::Validation(format!(
                "initial has {} entries for {n} components",
                states.len()
            ))),
        }
    }

    pub fn require_components(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(CliError::Validation("components must not be empty".into()));
        }
        if self.network.is_some() {
            return Err(CliError::Validation(
                "network is only accepted by the queueing command".into(),
            ));
        }
        Ok(())
    }
}

fn missing(field: &str) -> CliError {
    CliError::Validation(format!("field `{field}` is required for this command"))
}

/// Command-line values that take precedence over the config.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub replications: Option<u64>,
    pub horizon: Option<u32>,
}

impl Overrides {
    pub fn apply(self, config: &mut ExperimentConfig) {
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(r) = self.replications {
            config.replications = r;
        }
        if let Some(h) = self.horizon {
            config.horizon = Some(h);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ExperimentConfig::from_json(
            r#"{"components":[{"kind":"markov","q":0.5,"cost":1.0}],"horizon":2}"#,
            "inline",
        )
        .unwrap();
        assert_eq!(c.policies, default_policies());
        assert_eq!(c.replications, 1000);
        assert_eq!(c.seed, 0);
        assert!(c.k().is_err());
        assert_eq!(c.horizon().unwrap(), 2);
    }

    #[test]
    fn schema_errors_carry_position() {
        let err = ExperimentConfig::from_json("{\n  \"components\": [],\n  \"bogus\": 1\n}", "x.json").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus") && msg.contains("line 3"), "{msg}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn invalid_component_rejected_at_load() {
        let err = ExperimentConfig::from_json(r#"{"components":[{"kind":"markov","q":1.5,"cost":1.0}]}"#, "x")
            .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_policy_rejected() {
        let err = ExperimentConfig::from_json(
            r#"{"components":[{"kind":"markov","q":0.5,"cost":1.0}],"policies":["greedy"]}"#,
            "x",
        )
        .unwrap_err();
        assert!(err.to_string().contains("greedy"));
    }

    #[test]
    fn overrides_win() {
        let mut c = ExperimentConfig::from_json(r#"{"components":[],"seed":4,"horizon":9}"#, "x").unwrap();
        Overrides {
            seed: Some(8),
            replications: Some(3),
            horizon: None,
        }
        .apply(&mut c);
        assert_eq!((c.seed, c.replications, c.horizon), (8, 3, Some(9)));
    }

    #[test]
    fn round_trip() {
        let c = ExperimentConfig::from_json(
            r#"{"components":[{"kind":"table","p":[0.1,0.2],"cost":2.0}],"k":1,"horizon":3,"initial":[{"i":1,"t":2}]}"#,
            "x",
        )
        .unwrap();
        assert_eq!(ExperimentConfig::from_json(&c.to_json(), "y").unwrap(), c);
    }
}
