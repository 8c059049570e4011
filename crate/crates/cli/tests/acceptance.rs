//! Exit criteria. Each test prints one `PASS`/`FAIL` line before asserting.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rmab_cli::{cmd_oracle, cmd_simulate, Preset};
use rmab_core::sim::stream;
use rmab_core::{
    dp_optimal, optimal_stopping, queue_step, run_relaxed, select_myopic, select_whittle,
    single_arm_action_values, solve_lambda_star, verify_strict_indexability, whittle_exact, whittle_index, ArmState,
    ComponentSpec, ComponentState, QueueState, Selection, WorldState, DEFAULT_GUARD, DEFAULT_T_CAP,
};

fn report(id: u32, name: &str, pass: bool, detail: String) {
    println!("criterion {id:>2} {} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} failed: {detail}");
}

/// Table with strictly decreasing increments.
fn concave_table(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let first: f64 = rng.gen_range(0.05..0.5);
    let ratio: f64 = rng.gen_range(0.5..0.95);
    let scale = rng.gen_range(0.2..0.95) * (1.0 - first) * (1.0 - ratio) / (1.0 - ratio.powi(len as i32 - 1));
    let mut p = vec![first];
    for j in 1..len {
        p.push(p[j - 1] + scale * ratio.powi(j as i32 - 1));
    }
    p
}

fn c1_specs(count: usize, seed: u64) -> Vec<ComponentSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|j| {
            let cost = rng.gen_range(0.2..3.0);
            if j % 2 == 0 {
                ComponentSpec::markov(rng.gen_range(0.05..0.95), cost).unwrap()
            } else {
                ComponentSpec::table(concave_table(&mut rng, 40), cost).unwrap()
            }
        })
        .collect()
}

#[test]
fn criterion_01_closed_form_matches_dp() {
    let start = Instant::now();
    let specs = c1_specs(50, 1);
    let mut worst = 0.0f64;
    for spec in &specs {
        for i in 0..2u8 {
            for t in 1..=10u32 {
                let state = ArmState { i, t };
                let w = whittle_index(spec, state).value();
                let gap = single_arm_action_values(spec, w, state, 200).unwrap().gap().abs();
                worst = worst.max(gap);
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        1,
        "closed-form index makes the 200-slot DP indifferent",
        worst <= 1e-3 && elapsed <= Duration::from_secs(120),
        format!("worst gap {worst:.3e} over 50 specs (<= 1e-3), {elapsed:.1?}"),
    );
}

#[test]
fn criterion_02_index_identities() {
    let mut specs = c1_specs(50, 1);
    specs.push(Preset::Fig2.config().components[0].clone());
    let mut violations = 0;
    for spec in &specs {
        if whittle_index(spec, ArmState { i: 1, t: 1 }).value() != 0.0 || whittle_index(spec, ArmState::ORIGIN).value() != 0.0 {
            violations += 1;
        }
        for t in 1..=50 {
            let w1 = whittle_index(spec, ArmState { i: 1, t }).value();
            let w0 = whittle_index(spec, ArmState { i: 0, t: t - 1 }).value();
            if w1.to_bits() != w0.to_bits() {
                violations += 1;
            }
        }
    }
    report(
        2,
        "W(1,t) = W(0,t-1) and W(1,1) = W(0,0) = 0",
        violations == 0,
        format!("{violations} violations over {} specs, t <= 50", specs.len()),
    );
}

#[test]
fn criterion_03_indexability_monotonicity() {
    let specs = c1_specs(50, 1);
    let (mut stopping, mut strict, mut c1_specs_seen) = (0, 0, 0);
    for spec in &specs {
        let top = whittle_index(spec, ArmState { i: 0, t: 10 }).value() * 1.5;
        let mut prev = 0;
        for step in 0..200 {
            let lambda = top * f64::from(step) / 199.0;
            let t0 = optimal_stopping(spec, lambda, DEFAULT_T_CAP).unwrap().t0_star;
            if t0 < prev {
                stopping += 1;
            }
            prev = t0;
        }
        if spec.process.check_c1(10) {
            c1_specs_seen += 1;
            if !verify_strict_indexability(spec, 10).unwrap() {
                strict += 1;
            }
        }
    }
    report(
        3,
        "stopping time nondecreasing in subsidy, index strictly increasing under C1",
        stopping == 0 && strict == 0 && c1_specs_seen == specs.len(),
        format!("{stopping} stopping-time and {strict} strictness violations ({c1_specs_seen} C1 specs, 200-point grid)"),
    );
}

#[test]
fn criterion_04_homogeneous_optimality() {
    let mut details = Vec::new();
    let mut pass = true;
    for (n, k, q, horizon) in [(3usize, 1usize, 0.3, 6u32), (4, 2, 0.5, 5)] {
        let start = Instant::now();
        let specs = vec![ComponentSpec::markov(q, 1.0).unwrap(); n];
        let init = vec![ArmState::healthy_start(); n];
        let dp = dp_optimal(&specs, &init, k, horizon, DEFAULT_GUARD).unwrap().cost;
        let w = whittle_exact(&specs, &init, k, horizon, DEFAULT_GUARD).unwrap().total;
        let elapsed = start.elapsed();
        pass &= (dp - w).abs() <= 1e-9 && elapsed <= Duration::from_secs(60);
        details.push(format!("N={n} K={k} q={q} T={horizon}: |{w} - {dp}| = {:.1e} in {elapsed:.1?}", (w - dp).abs()));
    }
    report(4, "index policy optimal for identical components", pass, details.join("; "));
}

#[test]
fn criterion_05_homogeneous_equivalence() {
    let (n, k) = (6usize, 2usize);
    let mut mismatches = 0;
    let mut slots = 0;
    for (j, q) in [0.1, 0.3, 0.5, 0.8].into_iter().enumerate() {
        let specs = vec![ComponentSpec::markov(q, 1.0).unwrap(); n];
        let init = vec![ArmState::healthy_start(); n];
        let mut rngs: Vec<_> = (0..n as u64).map(|a| stream(j as u64, 0, a)).collect();
        let mut world = WorldState::sample(&specs, &init, &mut rngs).unwrap();
        let mut queue = QueueState::from_beliefs(&specs, &init).unwrap();
        for _ in 0..10_000 {
            let states = world.arm_states();
            let w = select_whittle(&specs, &states, k).unwrap();
            let m = select_myopic(&specs, &states, k).unwrap();
            let head = queue.head(k).unwrap();
            if w != m || w != head {
                mismatches += 1;
            }
            let obs = world.step(&specs, &w, &mut rngs).unwrap().observations;
            queue = queue_step(&queue, k, &obs).unwrap().1;
            slots += 1;
        }
    }
    report(
        5,
        "whittle, myopic and queue selections coincide (N=6, K=2)",
        mismatches == 0,
        format!("{mismatches} mismatches over {slots} slots"),
    );
}

fn parse_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn criterion_06_fig3_near_optimal() {
    let start = Instant::now();
    let csv = cmd_oracle(&Preset::Fig3.config()).unwrap();
    let elapsed = start.elapsed();
    let mut pass = elapsed <= Duration::from_secs(300);
    let mut gaps = Vec::new();
    for row in parse_rows(&csv) {
        let optimal: f64 = row[1].parse().unwrap();
        let whittle: f64 = row[2].parse().unwrap();
        let gap: f64 = row[4].parse().unwrap();
        pass &= whittle >= optimal - 1e-9 && gap <= 0.05;
        gaps.push(format!("T={}:{:.3}%", row[0], 100.0 * gap));
    }
    pass &= gaps.len() == 6;
    report(6, "fig3 index policy within 5% of optimal", pass, format!("gaps {} in {elapsed:.1?}", gaps.join(" ")));
}

#[test]
fn criterion_07_fig4_whittle_beats_myopic() {
    let start = Instant::now();
    let config = Preset::Fig4.config();
    assert_eq!((config.horizon, config.replications), (Some(500), 2000));
    let csv = cmd_simulate(&config).unwrap();
    let elapsed = start.elapsed();
    let last: BTreeMap<String, (f64, f64)> = parse_rows(&csv)
        .into_iter()
        .filter(|r| r[1] == "500")
        .map(|r| (r[0].clone(), (r[2].parse().unwrap(), r[3].parse().unwrap())))
        .collect();
    let (w, w_se) = last["whittle"];
    let (m, m_se) = last["myopic"];
    let z = 1.96;
    let separated = w + z * w_se < m - z * m_se;
    report(
        7,
        "fig4 index policy below myopic with disjoint 95% intervals",
        w < m && separated && elapsed <= Duration::from_secs(300),
        format!(
            "whittle {w:.2} [{:.2}, {:.2}] vs myopic {m:.2} [{:.2}, {:.2}] at T=500, {elapsed:.1?}",
            w - z * w_se,
            w + z * w_se,
            m - z * m_se,
            m + z * m_se
        ),
    );
}

#[test]
fn criterion_08_relaxed_contract() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut worst_rate, mut worst_sim) = (0.0f64, 0.0f64);
    for trial in 0..20u64 {
        let n = rng.gen_range(2..=8usize);
        let k = rng.gen_range(1..n);
        let specs: Vec<_> = c1_specs(n, rng.gen());
        let plan = solve_lambda_star(&specs, k, DEFAULT_T_CAP).unwrap();
        worst_rate = worst_rate.max((plan.total_rate() - k as f64).abs());
        let run = run_relaxed(&specs, &plan, 100_000, trial).unwrap();
        worst_sim = worst_sim.max((run.mean_activations - k as f64).abs() / k as f64);
    }
    report(
        8,
        "relaxed plan activates K arms on average",
        worst_rate <= 1e-6 && worst_sim <= 0.01,
        format!("worst |sum rate - K| {worst_rate:.1e}, worst simulated relative error {:.3}%", 100.0 * worst_sim),
    );
}

#[test]
fn criterion_09_simulator_marginals() {
    let spec = vec![ComponentSpec::markov(0.3, 1.0).unwrap()];
    let reps = 100_000u64;
    let mut abnormal = [0u64; 10];
    let idle = Selection::new(vec![], 1).unwrap();
    for rep in 0..reps {
        let mut rngs = vec![stream(0, rep, 0)];
        let mut world = WorldState::sample(&spec, &[ArmState::healthy_start()], &mut rngs).unwrap();
        for count in abnormal.iter_mut() {
            if world.status()[0] == ComponentState::Abnormal {
                *count += 1;
            }
            world.step(&spec, &idle, &mut rngs).unwrap();
        }
    }
    let mut worst = 0.0f64;
    for (j, &count) in abnormal.iter().enumerate() {
        let p = spec[0].process.marginal_p(j as u64 + 1);
        let se = (p * (1.0 - p) / reps as f64).sqrt();
        worst = worst.max((count as f64 / reps as f64 - p).abs() / se);
    }
    report(
        9,
        "unprobed arm matches the attack marginal",
        worst <= 3.0,
        format!("largest deviation {worst:.2} standard errors over t = 1..10"),
    );
}

fn run_cli(args: &[&str], out: &Path) -> (i32, Vec<u8>) {
    let status = Command::new(env!("CARGO_BIN_EXE_rmab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .status()
        .expect("binary runs");
    (status.code().unwrap_or(-1), std::fs::read(out).unwrap_or_default())
}

#[test]
fn criterion_10_cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let path = dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        path.to_str().unwrap().to_string()
    };
    let components = r#"[{"kind":"markov","q":0.3,"cost":1.5},{"kind":"table","p":[0.2,0.35,0.45,0.5],"cost":1.0},
        {"kind":"markov","q":0.6,"cost":0.7}]"#;
    let all = write(
        "all.json",
        &format!(r#"{{"components":{components},"k":1,"horizon":6,"policies":["whittle","myopic","queue","random"],"replications":300,"seed":17}}"#),
    );
    let exact = write("exact.json", &format!(r#"{{"components":{components},"k":1,"horizon":6}}"#));
    let queue = write(
        "queue.json",
        r#"{"network":{"servers":1,"classes":[{"arrival":{"kind":"bernoulli","q":0.2},"holding_cost":1.0},
        {"arrival":{"kind":"bernoulli","q":0.5},"holding_cost":1.0},{"arrival":{"kind":"bernoulli","q":0.8},"holding_cost":2.0}]},
        "horizon":40,"replications":200,"seed":3}"#,
    );
    let invocations: Vec<Vec<&str>> = vec![
        vec!["index", "--config", &all],
        vec!["simulate", "--config", &all],
        vec!["evaluate", "--config", &exact],
        vec!["oracle", "--config", &exact],
        vec!["subsidy", "--config", &all],
        vec!["queueing", "--config", &queue],
        vec!["index", "--preset", "fig2"],
        vec!["oracle", "--preset", "fig3"],
        vec!["simulate", "--preset", "fig4", "--replications", "20", "--horizon", "50", "--seed", "5"],
    ];
    let mut failures = Vec::new();
    for (j, args) in invocations.iter().enumerate() {
        let runs: Vec<_> = (0..2).map(|r| run_cli(args, &dir.path().join(format!("out{j}_{r}.csv")))).collect();
        let ok = runs.iter().all(|(code, bytes)| *code == 0 && !bytes.is_empty()) && runs[0].1 == runs[1].1;
        if !ok {
            failures.push(args.join(" "));
        }
    }
    report(
        10,
        "repeated CLI invocations are byte-identical",
        failures.is_empty(),
        format!("{} invocations run twice, mismatches: {failures:?}", invocations.len()),
    );
}
