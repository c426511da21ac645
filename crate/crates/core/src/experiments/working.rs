//! Belief-error sweeps on the two-hypothesis cup task.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use super::config::{EnvConfig, ExperimentConfig};
use super::{float_field, mean_and_se, write_csv, Check, RunReport, BELIEF_HEADER};
use crate::env::CupEnv;
use crate::error::Result;
use crate::model::Trajectory;
use crate::normalizer::{belief_with, Normalizer, NormalizerStrategy, Rationality};

/// Rationality of the mean-sampling sweep.
pub const SAMPLE_SWEEP_BETA: f64 = 1.0;

/// Tolerance of the Ignore-at-`ξ = 0` check against `0.950 − 0.031`.
const IGNORE_ROW_TOL: f64 = 0.005;
const IGNORE_ROW_EXPECTED: f64 = 0.919;
/// Slack on the monotone Maximum sweep.
const MONOTONE_SLACK: f64 = 1e-6;
/// Below this `β` mean sampling is expected to beat Maximum, above it the
/// reverse.
pub const CROSSOVER_BETA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    /// Ignore and Maximum against `β`.
    Beta,
    /// Mean sampling against `N` at `β = 1`.
    Samples,
    /// Mean sampling against Maximum at a few `β`.
    Crossover,
}

impl Sweep {
    pub fn name(self) -> &'static str {
        match self {
            Sweep::Beta => "beta",
            Sweep::Samples => "samples",
            Sweep::Crossover => "crossover",
        }
    }
}

/// One CSV row. `demo_angle = None` is the average over the demo grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefRow {
    pub sweep: Sweep,
    pub strategy: &'static str,
    pub beta: f64,
    pub samples: Option<usize>,
    pub demo_angle: Option<f64>,
    pub runs: usize,
    pub mean: f64,
    pub std_error: f64,
}

impl BeliefRow {
    fn fields(&self) -> Vec<String> {
        vec![
            self.sweep.name().to_string(),
            self.strategy.to_string(),
            float_field(self.beta),
            self.samples.map(|n| n.to_string()).unwrap_or_default(),
            self.demo_angle.map(float_field).unwrap_or_else(|| "all".into()),
            self.runs.to_string(),
            float_field(self.mean),
            float_field(self.std_error),
        ]
    }
}

fn cup_env(cfg: &ExperimentConfig) -> CupEnv {
    cfg.environments
        .iter()
        .find_map(|e| match e {
            EnvConfig::Cup { resolution } => Some(CupEnv::new(*resolution)),
            _ => None,
        })
        .unwrap_or_default()
}

/// `n` evenly spaced demonstration angles covering `[0, π/2]`.
pub fn demo_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| FRAC_PI_2 * i as f64 / (n - 1) as f64).collect()
}

/// Belief errors of one strategy at one `β`, one entry per demo.
fn errors_per_demo(env: &CupEnv, beta: f64, strategy: NormalizerStrategy, demos: &[Trajectory]) -> Result<Vec<f64>> {
    let beta = Rationality::new(beta)?;
    let exact = Normalizer::for_trajectories(env, beta, NormalizerStrategy::ExactQuadrature)?;
    let approx = Normalizer::for_trajectories(env, beta, strategy)?;
    demos
        .iter()
        .map(|xi| Ok((belief_with(&exact, xi, env)? - belief_with(&approx, xi, env)?).abs()))
        .collect()
}

/// Rows for a strategy evaluated over `runs` seeds (`errors[run][demo]`):
/// one row per demo plus the grid average.
fn summarize(
    sweep: Sweep,
    strategy: &'static str,
    beta: f64,
    samples: Option<usize>,
    angles: &[f64],
    errors: &[Vec<f64>],
) -> Vec<BeliefRow> {
    let row = |demo_angle, values: &[f64]| {
        let (mean, std_error) = mean_and_se(values);
        BeliefRow {
            sweep,
            strategy,
            beta,
            samples,
            demo_angle,
            runs: errors.len(),
            mean,
            std_error,
        }
    };
    let mut rows: Vec<BeliefRow> = angles
        .iter()
        .enumerate()
        .map(|(d, a)| row(Some(*a), &errors.iter().map(|run| run[d]).collect::<Vec<_>>()))
        .collect();
    let per_run: Vec<f64> = errors
        .iter()
        .map(|run| run.iter().sum::<f64>() / run.len() as f64)
        .collect();
    rows.push(row(None, &per_run));
    rows
}

fn strategy_rows(
    cfg: &ExperimentConfig,
    env: &CupEnv,
    sweep: Sweep,
    beta: f64,
    strategy: NormalizerStrategy,
    angles: &[f64],
    demos: &[Trajectory],
) -> Result<Vec<BeliefRow>> {
    let (samples, errors) = match strategy {
        NormalizerStrategy::MeanSampling { samples, .. } => {
            let errors = (0..cfg.working_example.runs as u64)
                .map(|run| {
                    let seed = cfg.seed.wrapping_add(run);
                    errors_per_demo(env, beta, NormalizerStrategy::MeanSampling { samples, seed }, demos)
                })
                .collect::<Result<Vec<_>>>()?;
            (Some(samples), errors)
        }
        _ => (None, vec![errors_per_demo(env, beta, strategy, demos)?]),
    };
    Ok(summarize(sweep, strategy.label(), beta, samples, angles, &errors))
}

fn crossover_rows(cfg: &ExperimentConfig, env: &CupEnv, angles: &[f64], demos: &[Trajectory]) -> Result<Vec<BeliefRow>> {
    let we = &cfg.working_example;
    let mut rows = Vec::new();
    for &beta in &we.crossover_betas {
        let sample = NormalizerStrategy::MeanSampling {
            samples: we.crossover_samples,
            seed: 0,
        };
        for strategy in [sample, NormalizerStrategy::Maximum] {
            rows.extend(strategy_rows(cfg, env, Sweep::Crossover, beta, strategy, angles, demos)?);
        }
    }
    Ok(rows)
}

/// All sweeps of the working example.
pub fn working_example_rows(cfg: &ExperimentConfig) -> Result<Vec<BeliefRow>> {
    let env = cup_env(cfg);
    let we = &cfg.working_example;
    let angles = demo_grid(we.demos);
    let demos = angles.iter().map(|a| CupEnv::demo(*a)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for strategy in [NormalizerStrategy::Ignore, NormalizerStrategy::Maximum] {
        for &beta in &we.betas {
            rows.extend(strategy_rows(cfg, &env, Sweep::Beta, beta, strategy, &angles, &demos)?);
        }
    }
    for &samples in &we.sample_sizes {
        let strategy = NormalizerStrategy::MeanSampling { samples, seed: 0 };
        rows.extend(strategy_rows(cfg, &env, Sweep::Samples, SAMPLE_SWEEP_BETA, strategy, &angles, &demos)?);
    }
    rows.extend(crossover_rows(cfg, &env, &angles, &demos)?);
    Ok(rows)
}

fn grid_mean(rows: &[BeliefRow], sweep: Sweep, strategy: &str, beta: f64, samples: Option<usize>) -> Option<f64> {
    rows.iter()
        .find(|r| {
            r.sweep == sweep
                && r.strategy == strategy
                && r.beta == beta
                && r.demo_angle.is_none()
                && (samples.is_none() || r.samples == samples)
        })
        .map(|r| r.mean)
}

/// Checks over the rows of [`working_example_rows`]. Comparisons whose
/// inputs were not swept are skipped.
pub fn working_example_checks(rows: &[BeliefRow]) -> Vec<Check> {
    let mut checks = Vec::new();
    if let Some(r) = rows.iter().find(|r| {
        r.sweep == Sweep::Beta && r.strategy == "ignore" && r.beta == 1.0 && r.demo_angle == Some(0.0)
    }) {
        checks.push(Check::new(
            "ignore-belief-error-at-demo-0",
            (r.mean - IGNORE_ROW_EXPECTED).abs() <= IGNORE_ROW_TOL,
            format!("{:.4} (expected {IGNORE_ROW_EXPECTED} ± {IGNORE_ROW_TOL})", r.mean),
        ));
    }

    let max_sweep: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.sweep == Sweep::Beta && r.strategy == "maximum" && r.demo_angle.is_none())
        .map(|r| (r.beta, r.mean))
        .collect();
    if max_sweep.len() >= 2 {
        let mut sorted = max_sweep.clone();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let monotone = sorted.windows(2).all(|w| w[1].1 <= w[0].1 + MONOTONE_SLACK);
        let listing: Vec<String> = sorted.iter().map(|(b, e)| format!("β={b}: {e:.5}")).collect();
        checks.push(Check::new("maximum-error-nonincreasing-in-beta", monotone, listing.join(", ")));
    }

    let sizes: Vec<(usize, f64)> = rows
        .iter()
        .filter(|r| r.sweep == Sweep::Samples && r.demo_angle.is_none())
        .filter_map(|r| Some((r.samples?, r.mean)))
        .collect();
    if let (Some(lo), Some(hi)) = (sizes.iter().min_by_key(|s| s.0), sizes.iter().max_by_key(|s| s.0)) {
        if lo.0 != hi.0 {
            checks.push(Check::new(
                "sample-error-shrinks-with-n",
                hi.1 < lo.1,
                format!("N={}: {:.5}, N={}: {:.5}", lo.0, lo.1, hi.0, hi.1),
            ));
        }
    }

    for r in rows.iter().filter(|r| r.sweep == Sweep::Crossover && r.strategy == "sample" && r.demo_angle.is_none()) {
        let Some(max) = grid_mean(rows, Sweep::Crossover, "maximum", r.beta, None) else {
            continue;
        };
        let (name, passed, winner) = if r.beta < CROSSOVER_BETA {
            ("sample-beats-maximum-at-low-beta", r.mean < max, "sample")
        } else {
            ("maximum-beats-sample-at-high-beta", max < r.mean, "maximum")
        };
        checks.push(Check::new(
            format!("{name} (β={})", r.beta),
            passed,
            format!("sample {:.5}, maximum {max:.5}; expected {winner} lower", r.mean),
        ));
    }
    checks
}

fn write_rows(path: &Path, rows: &[BeliefRow]) -> Result<()> {
    let header: Vec<String> = BELIEF_HEADER.iter().map(|s| s.to_string()).collect();
    let body: Vec<Vec<String>> = rows.iter().map(BeliefRow::fields).collect();
    write_csv(path, &header, &body)
}

/// Writes `working_example.csv` with the β, N and crossover sweeps.
pub fn run_working_example(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunReport> {
    let rows = working_example_rows(cfg)?;
    let path = out_dir.join("working_example.csv");
    write_rows(&path, &rows)?;
    Ok(RunReport {
        files: vec![path],
        checks: working_example_checks(&rows),
    })
}

/// Writes `crossover.csv` with only the crossover sweep.
pub fn run_crossover(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunReport> {
    let env = cup_env(cfg);
    let angles = demo_grid(cfg.working_example.demos);
    let demos = angles.iter().map(|a| CupEnv::demo(*a)).collect::<Result<Vec<_>>>()?;
    let rows = crossover_rows(cfg, &env, &angles, &demos)?;
    let path = out_dir.join("crossover.csv");
    write_rows(&path, &rows)?;
    Ok(RunReport {
        files: vec![path],
        checks: working_example_checks(&rows),
    })
}
