//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test --release -p reward-learning --test acceptance -- --nocapture`.
//! Criteria run one at a time so their wall-time budgets are measured alone.

mod common;

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use reward_learning::env::CupEnv;
use reward_learning::experiments::{
    self, demo_grid, run_crossover, run_dependence_study, run_simulation_suite, ExperimentConfig, ExperimentId,
    Method,
};
use reward_learning::inference::{double_mh_posterior, mh_posterior, InnerConfig, MhConfig, Prior};
use reward_learning::metrics::belief_error;
use reward_learning::normalizer::{belief_two_hypothesis, NormalizerStrategy, Rationality};
use reward_learning::{Dataset, RewardParams};

use common::two_way_posterior;

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(criterion: &str, passed: bool, elapsed: Duration, budget: Duration, detail: &str) {
    let in_time = elapsed <= budget;
    let verdict = if passed && in_time { "PASS" } else { "FAIL" };
    println!(
        "{verdict} {criterion}: {detail} [{:.2}s, budget {:.0}s]",
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    assert!(passed, "{criterion}: {detail}");
    assert!(in_time, "{criterion}: took {elapsed:?}, budget {budget:?}");
}

fn config(name: &str) -> ExperimentConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    ExperimentConfig::load(&path).unwrap()
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn beta(b: f64) -> Rationality {
    Rationality::new(b).unwrap()
}

/// Closed-form cup normalizers `log ∫ exp(β r(s, θ)) ds` over `[0, π/2]`.
fn cup_log_z(horizontal: bool, b: f64) -> f64 {
    if horizontal {
        -5.0 * b + ((1.0 - (-5.0 * b * FRAC_PI_2).exp()) / (5.0 * b)).ln()
    } else {
        ((1.0 - (-b * FRAC_PI_2).exp()) / b).ln()
    }
}

#[test]
fn working_example_exactness() {
    let _g = serial();
    let start = Instant::now();
    let env = CupEnv::new(10_000);
    let xi = CupEnv::demo(0.0).unwrap();
    let exact = belief_two_hypothesis(&xi, beta(1.0), NormalizerStrategy::ExactQuadrature, &env).unwrap();
    let ignore = belief_two_hypothesis(&xi, beta(1.0), NormalizerStrategy::Ignore, &env).unwrap();
    let elapsed = start.elapsed();
    // closed form at ξ = 0: r(0, 0) = −5, r(0, π/2) = −π/2
    let oracle = two_way_posterior(-5.0 - cup_log_z(true, 1.0), -FRAC_PI_2 - cup_log_z(false, 1.0));
    let oracle_ignore = two_way_posterior(-5.0, -FRAC_PI_2);
    let passed = (exact - 0.950).abs() <= 0.005
        && (ignore - 0.031).abs() <= 0.005
        && (exact - oracle).abs() <= 1e-3
        && (ignore - oracle_ignore).abs() <= 1e-12;
    report(
        "working-example exactness",
        passed,
        elapsed,
        Duration::from_secs(1),
        &format!("P(θ=0|ξ=0) = {exact:.4} (closed form {oracle:.4}), Ignore = {ignore:.4}"),
    );
}

#[test]
fn maximum_strategy_converges_in_beta() {
    let _g = serial();
    let start = Instant::now();
    let env = CupEnv::default();
    let demos: Vec<_> = demo_grid(11).into_iter().map(|a| CupEnv::demo(a).unwrap()).collect();
    let betas = [1.0, 2.0, 5.0, 10.0, 20.0];
    let per_beta: Vec<Vec<f64>> = betas
        .iter()
        .map(|b| {
            demos
                .iter()
                .map(|xi| belief_error(NormalizerStrategy::Maximum, xi, beta(*b), &env).unwrap())
                .collect()
        })
        .collect();
    let elapsed = start.elapsed();
    let means: Vec<f64> = per_beta.iter().map(|e| e.iter().sum::<f64>() / e.len() as f64).collect();
    let worst_at_20 = per_beta[4].iter().cloned().fold(0.0, f64::max);
    let monotone = means.windows(2).all(|w| w[1] <= w[0] + 1e-6);
    report(
        "maximum-strategy convergence",
        monotone && worst_at_20 < 0.01,
        elapsed,
        Duration::from_secs(5),
        &format!("grid-mean errors {means:.5?}, worst demo at β=20 {worst_at_20:.5}"),
    );
}

#[test]
fn sampling_beats_maximum_only_at_low_beta() {
    let _g = serial();
    let cfg = config("crossover.toml");
    assert_eq!(cfg.working_example.runs, 100);
    assert_eq!(cfg.working_example.crossover_samples, 10);
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let out = run_crossover(&cfg, dir.path()).unwrap();
    let elapsed = start.elapsed();
    let text = std::fs::read_to_string(dir.path().join("crossover.csv")).unwrap();
    let mean = |strategy: &str, b: &str| -> f64 {
        text.lines()
            .map(|l| l.split(',').collect::<Vec<_>>())
            .find(|f| f[1] == strategy && f[2] == b && f[4] == "all")
            .map(|f| f[6].parse().unwrap())
            .unwrap()
    };
    let (s_lo, m_lo, s_hi, m_hi) = (mean("sample", "0.5"), mean("maximum", "0.5"), mean("sample", "5"), mean("maximum", "5"));
    assert_eq!(out.checks.len(), 2);
    report(
        "sampling/maximum crossover",
        s_lo < m_lo && m_hi < s_hi,
        elapsed,
        Duration::from_secs(30),
        &format!("β=0.5: sample {s_lo:.4} < maximum {m_lo:.4}; β=5: maximum {m_hi:.4} < sample {s_hi:.4}"),
    );
}

#[test]
fn normalizer_matters_only_off_the_sphere() {
    let _g = serial();
    let cfg = config("normalizer_gap.toml");
    assert_eq!(cfg.teachers, 20);
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let out = run_simulation_suite(&cfg, dir.path(), workers()).unwrap();
    let elapsed = start.elapsed();
    let err = |env: &str, m: Method| out.summary(env, 5.0, m, "independent").unwrap().mean_error;
    let sphere_gap = (err("sphere", Method::Ignore) - err("sphere", Method::Exact)).abs();
    let path_gap = err("path", Method::Ignore) - err("path", Method::Exact);
    let failures: usize = out.summaries.iter().map(|s| s.failures).sum();
    report(
        "normalizer gap (sphere vs path)",
        sphere_gap < 0.02 && path_gap > 0.05 && failures == 0,
        elapsed,
        Duration::from_secs(120),
        &format!("sphere |Ignore − Exact| = {sphere_gap:.4}, path Ignore − Exact = {path_gap:.4} at β=5"),
    );
}

#[test]
fn sampler_stationary_probability_matches_closed_form() {
    let _g = serial();
    let env = CupEnv::default();
    let data = Dataset::independent(vec![CupEnv::demo(0.0).unwrap()]).unwrap();
    let prior = Prior::Discrete(CupEnv::hypotheses());
    let cfg = MhConfig {
        iterations: 11_000,
        burn_in: 1000,
        seed: 11,
        ..MhConfig::default()
    };
    assert_eq!(cfg.kept_samples(), 10_000);
    let oracle = two_way_posterior(-5.0 - cup_log_z(true, 1.0), -FRAC_PI_2 - cup_log_z(false, 1.0));
    let share = |s: &[RewardParams]| {
        let h = CupEnv::horizontal();
        s.iter().filter(|x| **x == h).count() as f64 / s.len() as f64
    };
    let start = Instant::now();
    let mh = mh_posterior(&data, beta(1.0), NormalizerStrategy::ExactQuadrature, &env, &cfg, &prior).unwrap();
    let dmh = double_mh_posterior(&data, beta(1.0), &env, &cfg, &InnerConfig::default(), &prior).unwrap();
    let elapsed = start.elapsed();
    let (p_mh, p_dmh) = (share(&mh.samples), share(&dmh.samples));
    report(
        "sampler stationary probability",
        (p_mh - oracle).abs() <= 0.03 && (p_dmh - oracle).abs() <= 0.03,
        elapsed,
        Duration::from_secs(60),
        &format!("MH {p_mh:.4}, Double MH {p_dmh:.4}, closed form {oracle:.4}"),
    );
}

#[test]
fn double_mh_is_most_accurate_on_paths() {
    let _g = serial();
    let cfg = config("simulation_suite.toml");
    assert_eq!((cfg.teachers, cfg.k, cfg.betas.as_slice()), (20, 3, &[5.0, 25.0][..]));
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let out = run_simulation_suite(&cfg, dir.path(), workers()).unwrap();
    let elapsed = start.elapsed();
    let mut passed = true;
    let mut detail = Vec::new();
    for b in [5.0, 25.0] {
        let err = |m: Method| out.summary("path", b, m, "independent").unwrap().mean_error;
        let (ig, sa, ma, dm) = (err(Method::Ignore), err(Method::Sample), err(Method::Maximum), err(Method::DoubleMh));
        passed &= dm < sa && dm < ma && ig > sa && ig > ma && ig > dm;
        detail.push(format!("β={b}: ignore {ig:.4}, sample {sa:.4}, maximum {ma:.4}, double-mh {dm:.4}"));
    }
    report("independent-teacher ordering", passed, elapsed, Duration::from_secs(600), &detail.join("; "));
}

#[test]
fn dependent_double_mh_has_lowest_error_and_regret() {
    let _g = serial();
    let cfg = config("dependence_study.toml");
    assert_eq!(cfg.teachers, 20);
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let out = run_dependence_study(&cfg, dir.path(), workers()).unwrap();
    let elapsed = start.elapsed();
    let b = cfg.betas[0];
    let best = out.summary("path", b, Method::DoubleMh, "dependent").unwrap();
    let others: Vec<_> = out
        .summaries
        .iter()
        .filter(|s| !(s.method == Method::DoubleMh && s.dependence == "dependent"))
        .collect();
    assert_eq!(others.len(), 7);
    let passed = others
        .iter()
        .all(|o| best.mean_error < o.mean_error && best.mean_regret < o.mean_regret);
    let runner_up_error = others.iter().map(|o| o.mean_error).fold(f64::INFINITY, f64::min);
    let runner_up_regret = others.iter().map(|o| o.mean_regret).fold(f64::INFINITY, f64::min);
    report(
        "dependent-correction ordering",
        passed,
        elapsed,
        Duration::from_secs(600),
        &format!(
            "dependent double-mh error {:.4} (next {runner_up_error:.4}), regret {:.4} (next {runner_up_regret:.4})",
            best.mean_error, best.mean_regret
        ),
    );
}

fn small(id: ExperimentId) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default_for(id);
    cfg.teachers = 3;
    cfg.betas = vec![5.0];
    cfg.mh.iterations = 300;
    cfg.mh.burn_in = 100;
    cfg.inner.iterations = 50;
    cfg.working_example.runs = 10;
    cfg
}

fn csv_bytes(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let bytes = std::fs::read(&p).unwrap();
            (p.file_name().unwrap().into(), bytes)
        })
        .collect()
}

#[test]
fn reruns_are_byte_identical() {
    let _g = serial();
    let start = Instant::now();
    let mut compared = 0;
    let mut identical = true;
    for id in ExperimentId::ALL {
        let cfg = small(id);
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        experiments::run(&cfg, a.path(), 1).unwrap();
        experiments::run(&cfg, b.path(), 2).unwrap();
        let (fa, fb) = (csv_bytes(a.path()), csv_bytes(b.path()));
        assert!(!fa.is_empty());
        compared += fa.len();
        identical &= fa == fb;
    }
    report(
        "determinism",
        identical,
        start.elapsed(),
        Duration::from_secs(600),
        &format!("{compared} CSVs identical across reruns with 1 and 2 workers"),
    );
}

#[test]
fn runtime_report_is_written() {
    let _g = serial();
    let mut cfg = small(ExperimentId::SimulationSuite);
    cfg.mh.iterations = 2000;
    cfg.mh.burn_in = 500;
    cfg.inner = InnerConfig::default();
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    run_simulation_suite(&cfg, dir.path(), 1).unwrap();
    let text = std::fs::read_to_string(dir.path().join("timing.txt")).unwrap();
    let ratios: Vec<&str> = text.lines().filter(|l| l.starts_with("double-mh /")).collect();
    let passed = ratios.len() == 3 && text.contains("double-mh (independent):");
    report(
        "runtime report",
        passed,
        start.elapsed(),
        Duration::from_secs(120),
        &format!("recorded, not asserted: {}", ratios.join("; ")),
    );
}

#[test]
fn working_example_sweeps_pass_their_checks() {
    let _g = serial();
    let cfg = config("working_example.toml");
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let out = experiments::run(&cfg, dir.path(), 1).unwrap();
    let failed: Vec<_> = out.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    assert_eq!(out.checks.len(), 5);
    report(
        "working-example sweeps",
        failed.is_empty(),
        start.elapsed(),
        Duration::from_secs(30),
        &format!("{} checks, failed: {failed:?}", out.checks.len()),
    );
}
