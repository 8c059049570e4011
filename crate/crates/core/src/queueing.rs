//! Server allocation in a network of single-customer buffers, expressed as an
//! intrusion-detection instance: a full buffer plays the abnormal component,
//! serving plays probing, and the holding cost plays the component cost.

use serde::{Deserialize, Serialize};

use crate::attack_model::{AttackProcess, ComponentSpec};
use crate::error::{Error, Result};

/// Arrival process of one customer class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Arrival {
    /// One arrival attempt per slot, succeeding with probability `q`.
    Bernoulli { q: f64 },
    /// Probability that the buffer has filled `t` slots after being emptied.
    /// Must be nondecreasing; only meaningful when batch arrivals justify it.
    Table { p: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueueClass {
    pub arrival: Arrival,
    pub holding_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueueNetworkSpec {
    pub servers: usize,
    pub classes: Vec<QueueClass>,
}

impl Arrival {
    fn to_process(&self) -> Result<AttackProcess> {
        match *self {
            Arrival::Bernoulli { q: 0.0 } => AttackProcess::table(vec![0.0]),
            Arrival::Bernoulli { q: 1.0 } => AttackProcess::table(vec![1.0]),
            Arrival::Bernoulli { q } => AttackProcess::markov(q),
            Arrival::Table { ref p } => AttackProcess::table(p.clone()),
        }
    }
}

/// Translates the network into components and the per-slot probe budget.
pub fn to_rmab(spec: &QueueNetworkSpec) -> Result<(Vec<ComponentSpec>, usize)> {
    let n = spec.classes.len();
    if spec.servers == 0 || spec.servers >= n {
        return Err(Error::InvalidBudget { k: spec.servers, n });
    }
    let components = spec
        .classes
        .iter()
        .map(|class| ComponentSpec::new(class.arrival.to_process()?, class.holding_cost))
        .collect::<Result<Vec<_>>>()?;
    Ok((components, spec.servers))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arm::ArmState;
    use crate::policies::select_whittle;

    fn bernoulli(q: f64, cost: f64) -> QueueClass {
        QueueClass {
            arrival: Arrival::Bernoulli { q },
            holding_cost: cost,
        }
    }

    #[test]
    fn three_class_mapping() {
        let net = QueueNetworkSpec {
            servers: 1,
            classes: vec![bernoulli(0.2, 1.0), bernoulli(0.5, 1.0), bernoulli(0.8, 2.0)],
        };
        let (specs, k) = to_rmab(&net).unwrap();
        assert_eq!(k, 1);
        let direct = vec![
            ComponentSpec::markov(0.2, 1.0).unwrap(),
            ComponentSpec::markov(0.5, 1.0).unwrap(),
            ComponentSpec::markov(0.8, 2.0).unwrap(),
        ];
        assert_eq!(specs, direct);
        let states = [ArmState { i: 0, t: 2 }, ArmState { i: 1, t: 3 }, ArmState::healthy_start()];
        assert_eq!(
            select_whittle(&specs, &states, 1).unwrap(),
            select_whittle(&direct, &states, 1).unwrap()
        );
    }

    #[test]
    fn idle_class_is_inert() {
        let net = QueueNetworkSpec {
            servers: 1,
            classes: vec![bernoulli(0.0, 1.0), bernoulli(0.4, 1.0)],
        };
        let (specs, _) = to_rmab(&net).unwrap();
        assert!(specs[0].process.is_inert());
        assert_eq!(specs[0].process.marginal_p(40), 0.0);
    }

    #[test]
    fn always_arriving_class() {
        let net = QueueNetworkSpec {
            servers: 1,
            classes: vec![bernoulli(1.0, 1.0), bernoulli(0.4, 1.0)],
        };
        let (specs, _) = to_rmab(&net).unwrap();
        assert_eq!(specs[0].process.marginal_p(1), 1.0);
        assert_eq!(specs[0].process.marginal_p(0), 0.0);
    }

    #[test]
    fn rejects_too_many_servers() {
        let mut net = QueueNetworkSpec {
            servers: 2,
            classes: vec![bernoulli(0.2, 1.0), bernoulli(0.5, 1.0)],
        };
        assert!(matches!(to_rmab(&net), Err(Error::InvalidBudget { k: 2, n: 2 })));
        net.servers = 0;
        assert!(to_rmab(&net).is_err());
    }

    #[test]
    fn rejects_bad_probabilities() {
        let net = QueueNetworkSpec {
            servers: 1,
            classes: vec![bernoulli(1.2, 1.0), bernoulli(0.5, 1.0)],
        };
        assert!(to_rmab(&net).is_err());
    }

    #[test]
    fn json_descriptor() {
        let json = r#"{"servers":1,"classes":[{"arrival":{"kind":"bernoulli","q":0.2},"holding_cost":1.0},
            {"arrival":{"kind":"table","p":[0.1,0.3]},"holding_cost":2.5}]}"#;
        let net: QueueNetworkSpec = serde_json::from_str(json).unwrap();
        assert_eq!(net.classes[1].arrival, Arrival::Table { p: vec![0.1, 0.3] });
        let (specs, _) = to_rmab(&net).unwrap();
        assert_eq!(specs[1].cost, 2.5);
    }
}
