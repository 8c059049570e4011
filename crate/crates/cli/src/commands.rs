//! Subcommand implementations. Each returns the CSV document it produces.

use rmab_core::{
    dp_optimal, index_table, policy_evaluate_exact, run, select_myopic, select_whittle, solve_lambda_star, to_rmab,
    ComponentSpec, ExactEvaluation, PolicyKind, RunConfig, DEFAULT_T_CAP,
};

use crate::config::{ExperimentConfig, Mode};
use crate::error::{CliError, Result};

struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new(header: &[&str]) -> Result<Self> {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(header)?;
        Ok(Table { writer })
    }

    fn row(&mut self, fields: &[String]) -> Result<()> {
        self.writer.write_record(fields)?;
        Ok(())
    }

    fn finish(self) -> Result<String> {
        let bytes = self.writer.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Runs `command` on a fully resolved config.
pub fn execute(command: Mode, config: &ExperimentConfig) -> Result<String> {
    match command {
        Mode::Index => cmd_index(config),
        Mode::Simulate => cmd_simulate(config),
        Mode::Evaluate => cmd_evaluate(config),
        Mode::Oracle => cmd_oracle(config),
        Mode::Subsidy => cmd_subsidy(config),
        Mode::Queueing => cmd_queueing(config),
    }
}

/// `W(0, t)` then `W(1, t)` for `t = 1..=horizon`, per component.
pub fn cmd_index(config: &ExperimentConfig) -> Result<String> {
    config.require_components()?;
    let horizon = config.horizon()?;
    let mut out = Table::new(&["component", "state_i", "state_t", "index"])?;
    for (n, spec) in config.components.iter().enumerate() {
        for row in index_table(spec, horizon)? {
            out.row(&[
                n.to_string(),
                row.state.i.to_string(),
                row.state.t.to_string(),
                row.index.value().to_string(),
            ])?;
        }
    }
    out.finish()
}

/// Mean cumulative cost trajectories, one block per policy.
pub fn cmd_simulate(config: &ExperimentConfig) -> Result<String> {
    config.require_components()?;
    let mut out = Table::new(&["policy", "slot", "mean_cumulative_cost", "stderr"])?;
    for &policy in &config.policies {
        let run_config = RunConfig {
            specs: config.components.clone(),
            k: config.k()?,
            horizon: config.horizon()?,
            policy,
            replications: config.replications,
            seed: config.seed,
            initial: Some(config.initial_states()?),
        };
        let trajectory = run(&run_config)?;
        for (slot, (mean, se)) in trajectory.mean.iter().zip(&trajectory.stderr).enumerate() {
            out.row(&[policy.to_string(), (slot + 1).to_string(), mean.to_string(), se.to_string()])?;
        }
    }
    out.finish()
}

fn exact(config: &ExperimentConfig, policy: PolicyKind, horizon: u32) -> Result<ExactEvaluation> {
    let specs: &[ComponentSpec] = &config.components;
    let k = config.k()?;
    let initial = config.initial_states()?;
    let guard = config.guard();
    let evaluation = match policy {
        PolicyKind::Whittle => {
            policy_evaluate_exact(specs, &initial, k, horizon, guard, |s| select_whittle(specs, s, k))?
        }
        PolicyKind::Myopic => {
            policy_evaluate_exact(specs, &initial, k, horizon, guard, |s| select_myopic(specs, s, k))?
        }
        other => {
            return Err(CliError::Validation(format!(
                "exact evaluation supports the whittle and myopic policies, not {other}"
            )))
        }
    };
    Ok(evaluation)
}

/// Exact expected cost of each requested policy for every horizon up to the configured one.
pub fn cmd_evaluate(config: &ExperimentConfig) -> Result<String> {
    config.require_components()?;
    let horizon = config.horizon()?;
    let evaluations = config
        .policies
        .iter()
        .map(|&p| Ok((p, exact(config, p, horizon)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Table::new(&["horizon", "policy", "expected_cost"])?;
    for h in 1..=horizon as usize {
        for (policy, evaluation) in &evaluations {
            out.row(&[h.to_string(), policy.to_string(), evaluation.prefix(h).to_string()])?;
        }
    }
    out.finish()
}

fn relative_gap(cost: f64, optimal: f64) -> f64 {
    if optimal > 0.0 {
        (cost - optimal) / optimal
    } else {
        0.0
    }
}

/// Optimal cost and exact Whittle and myopic costs for `T = 1..=horizon`.
pub fn cmd_oracle(config: &ExperimentConfig) -> Result<String> {
    config.require_components()?;
    let horizon = config.horizon()?;
    let k = config.k()?;
    let initial = config.initial_states()?;
    let whittle = exact(config, PolicyKind::Whittle, horizon)?;
    let myopic = exact(config, PolicyKind::Myopic, horizon)?;
    let mut out = Table::new(&["horizon", "optimal", "whittle", "myopic", "whittle_gap", "myopic_gap"])?;
    for h in 1..=horizon {
        let optimal = dp_optimal(&config.components, &initial, k, h, config.guard())?.cost;
        let (w, m) = (whittle.prefix(h as usize), myopic.prefix(h as usize));
        out.row(&[
            h.to_string(),
            optimal.to_string(),
            w.to_string(),
            m.to_string(),
            relative_gap(w, optimal).to_string(),
            relative_gap(m, optimal).to_string(),
        ])?;
    }
    out.finish()
}

/// Optimal subsidy of the average-budget relaxation, arm by arm.
pub fn cmd_subsidy(config: &ExperimentConfig) -> Result<String> {
    config.require_components()?;
    let plan = solve_lambda_star(&config.components, config.k()?, DEFAULT_T_CAP)?;
    let mut out = Table::new(&["arm", "lambda_star", "t0_star", "activation_rate", "mixing_probability"])?;
    for arm in 0..config.components.len() {
        out.row(&[
            arm.to_string(),
            plan.lambda_star.to_string(),
            plan.t0_star[arm].to_string(),
            plan.rates[arm].to_string(),
            plan.mixing[arm].to_string(),
        ])?;
    }
    out.finish()
}

/// Maps the queueing network to components and runs the command named by
/// `mode` (simulate when absent) on the result.
pub fn cmd_queueing(config: &ExperimentConfig) -> Result<String> {
    let Some(network) = &config.network else {
        return Err(CliError::Validation("field `network` is required for queueing".into()));
    };
    if !config.components.is_empty() || config.k.is_some() {
        return Err(CliError::Validation(
            "queueing configs take components and k from `network`".into(),
        ));
    }
    let downstream = config.mode.unwrap_or(Mode::Simulate);
    if downstream == Mode::Queueing {
        return Err(CliError::Validation("mode of a queueing config names the downstream command".into()));
    }
    let (components, servers) = to_rmab(network)?;
    let mapped = ExperimentConfig {
        components,
        network: None,
        k: Some(servers),
        mode: Some(downstream),
        ..config.clone()
    };
    execute(downstream, &mapped)
}
