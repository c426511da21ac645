//! Teacher-by-method simulation suites on continuous environments.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{EnvConfig, ExperimentConfig, Method};
use super::{float_field, mean_and_se, write_csv, write_text, Check, RunReport, AGGREGATE_HEADER, RECORD_HEADER};
use crate::env::{DatasetSpace, Environment};
use crate::error::{Error, Result};
use crate::inference::{double_mh_posterior_in, mh_posterior_in, posterior_mean, Chain, MhConfig, Prior};
use crate::metrics::{regret, theta_error, EvalRecord};
use crate::model::Dataset;
use crate::normalizer::Rationality;
use crate::teacher::{generate_dataset, TeacherMode, TeacherSpec};

/// Mixed into the teacher seed to seed learner chains, so a chain never
/// replays the draw that produced the teacher's `θ`.
pub const CHAIN_SEED_SALT: u64 = 0x6a09_e667_f3bc_c908;
/// Mixed into the teacher seed to seed the mean-sampling draws.
pub const SAMPLE_SEED_SALT: u64 = 0xbb67_ae85_84ca_a73b;

/// Spherical environments should show no Ignore-vs-Exact gap above this.
const SPHERE_GAP_TOL: f64 = 0.02;
/// On paths at `β = 5` the Ignore-vs-Exact gap should exceed this.
const PATH_GAP_MIN: f64 = 0.05;
const PATH_GAP_BETA: f64 = 5.0;

const INDEPENDENT: &str = "independent";
const DEPENDENT: &str = "dependent";

/// One (teacher, method, learner dependence) evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRow {
    pub environment: String,
    /// `theta_hat` is empty and `error`/`regret` are NaN on failure.
    pub record: EvalRecord,
    pub method: Method,
    pub acceptance_rate: f64,
    pub failure: Option<String>,
}

/// Mean ± standard error over the teachers of one group.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub environment: String,
    pub beta: f64,
    pub method: Method,
    pub dependence: &'static str,
    pub teachers: usize,
    pub failures: usize,
    pub mean_error: f64,
    pub se_error: f64,
    pub mean_regret: f64,
    pub se_regret: f64,
    pub seconds_per_iteration: f64,
}

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub rows: Vec<SuiteRow>,
    pub summaries: Vec<Summary>,
    pub report: RunReport,
}

impl SuiteOutcome {
    pub fn summary(&self, environment: &str, beta: f64, method: Method, dependence: &str) -> Option<&Summary> {
        self.summaries.iter().find(|s| {
            s.environment == environment && s.beta == beta && s.method == method && s.dependence == dependence
        })
    }
}

struct Teacher {
    env: usize,
    beta: f64,
    spec: TeacherSpec,
    data: Result<Dataset, String>,
}

struct Job {
    teacher: usize,
    method: Method,
    dependent_learner: bool,
}

fn env_labels(cfgs: &[EnvConfig]) -> Vec<String> {
    cfgs.iter()
        .enumerate()
        .map(|(i, c)| {
            if cfgs.iter().filter(|o| o.label() == c.label()).count() > 1 {
                format!("{}-{i}", c.label())
            } else {
                c.label().to_string()
            }
        })
        .collect()
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))
}

fn half_width(cfg: &ExperimentConfig, env: &dyn Environment) -> f64 {
    cfg.half_width.unwrap_or_else(|| DatasetSpace::default_half_width(env))
}

fn learn(
    cfg: &ExperimentConfig,
    method: Method,
    teacher_seed: u64,
    data: &Dataset,
    beta: Rationality,
    env: &dyn Environment,
    space: Option<&DatasetSpace>,
) -> Result<Chain> {
    let mh = MhConfig {
        seed: cfg.mh.seed.wrapping_add(teacher_seed) ^ CHAIN_SEED_SALT,
        ..cfg.mh
    };
    let prior = Prior::for_env(env);
    match method.strategy(cfg.samples, teacher_seed ^ SAMPLE_SEED_SALT) {
        Some(strategy) => mh_posterior_in(data, beta, strategy, env, &mh, &prior, space),
        None => double_mh_posterior_in(data, beta, env, &mh, &cfg.inner, &prior, space),
    }
}

fn run_jobs(cfg: &ExperimentConfig, workers: usize, mode: Option<f64>) -> Result<Vec<SuiteRow>> {
    let envs = cfg.environments.iter().map(EnvConfig::build).collect::<Result<Vec<_>>>()?;
    let labels = env_labels(&cfg.environments);
    let pool = pool(workers)?;

    let mut teachers = Vec::new();
    for (e, env) in envs.iter().enumerate() {
        for &beta in &cfg.betas {
            for t in 0..cfg.teachers as u64 {
                let mode = match mode {
                    None => TeacherMode::Independent,
                    Some(lambda) => TeacherMode::Dependent {
                        half_width: half_width(cfg, env.as_ref()),
                        penalty_weight: lambda,
                    },
                };
                let spec = TeacherSpec::random(env.as_ref(), Rationality::new(beta)?, cfg.k, mode, cfg.seed.wrapping_add(t))?;
                teachers.push((e, beta, spec));
            }
        }
    }
    let teachers: Vec<Teacher> = pool.install(|| {
        teachers
            .into_par_iter()
            .map(|(e, beta, spec)| {
                let data = generate_dataset(&spec, envs[e].as_ref(), &mut spec.rng()).map_err(|err| err.to_string());
                Teacher { env: e, beta, spec, data }
            })
            .collect()
    });

    let learners: &[bool] = if mode.is_some() { &[false, true] } else { &[false] };
    let mut jobs = Vec::new();
    for t in 0..teachers.len() {
        for &method in &cfg.methods {
            for &dependent_learner in learners {
                jobs.push(Job {
                    teacher: t,
                    method,
                    dependent_learner,
                });
            }
        }
    }

    let mut rows: Vec<SuiteRow> = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let teacher = &teachers[job.teacher];
                let env = envs[teacher.env].as_ref();
                run_job(cfg, job, teacher, env, &labels[teacher.env])
            })
            .collect()
    });
    // collect() keeps job order already; sorting pins it independent of how jobs were queued
    rows.sort_by(|a, b| {
        let key = |r: &SuiteRow| {
            let env = labels.iter().position(|l| *l == r.environment);
            let beta = cfg.betas.iter().position(|b| *b == r.record.beta);
            (env, beta, r.record.teacher_seed, r.method, r.record.dependence == DEPENDENT)
        };
        key(a).cmp(&key(b))
    });
    Ok(rows)
}

fn run_job(cfg: &ExperimentConfig, job: &Job, teacher: &Teacher, env: &dyn Environment, label: &str) -> SuiteRow {
    let spec = &teacher.spec;
    let mut row = SuiteRow {
        environment: label.to_string(),
        record: EvalRecord {
            teacher_seed: spec.seed,
            method: job.method.name().to_string(),
            dependence: if job.dependent_learner { DEPENDENT } else { INDEPENDENT }.to_string(),
            beta: teacher.beta,
            theta_true: spec.theta.as_slice().to_vec(),
            theta_hat: Vec::new(),
            error: f64::NAN,
            regret: f64::NAN,
            seconds_per_iteration: f64::NAN,
        },
        method: job.method,
        acceptance_rate: f64::NAN,
        failure: None,
    };
    let result = (|| -> Result<()> {
        let data = teacher.data.as_ref().map_err(|e| Error::Contract(format!("teacher data: {e}")))?;
        let (data, space) = if job.dependent_learner {
            let space = DatasetSpace::for_dataset(env, data, half_width(cfg, env))?;
            (data.clone(), Some(space))
        } else {
            (data.as_independent(), None)
        };
        let start = Instant::now();
        let chain = learn(cfg, job.method, spec.seed, &data, spec.beta, env, space.as_ref())?;
        row.record.seconds_per_iteration = start.elapsed().as_secs_f64() / cfg.mh.iterations as f64;
        row.acceptance_rate = chain.acceptance_rate();
        let estimate = posterior_mean(&chain)?;
        row.record.error = theta_error(&spec.theta, &estimate)?;
        row.record.regret = regret(&spec.theta, &estimate, env)?;
        row.record.theta_hat = estimate.into_vec();
        Ok(())
    })();
    if let Err(e) = result {
        row.record.error = f64::NAN;
        row.record.regret = f64::NAN;
        row.record.theta_hat.clear();
        row.failure = Some(e.to_string());
    }
    row
}

fn summarize(rows: &[SuiteRow]) -> Vec<Summary> {
    let mut groups: BTreeMap<(usize, usize), Vec<&SuiteRow>> = BTreeMap::new();
    // first-appearance order of (env, β) and (method, dependence) keeps output sorted like the records
    let mut settings: Vec<(&str, f64)> = Vec::new();
    let mut learners: Vec<(Method, &str)> = Vec::new();
    for r in rows {
        let s = (r.environment.as_str(), r.record.beta);
        let l = (r.method, r.record.dependence.as_str());
        let si = settings.iter().position(|x| *x == s).unwrap_or_else(|| {
            settings.push(s);
            settings.len() - 1
        });
        let li = learners.iter().position(|x| *x == l).unwrap_or_else(|| {
            learners.push(l);
            learners.len() - 1
        });
        groups.entry((si, li)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((si, li), members)| {
            let ok: Vec<&&SuiteRow> = members.iter().filter(|r| r.failure.is_none()).collect();
            let errors: Vec<f64> = ok.iter().map(|r| r.record.error).collect();
            let regrets: Vec<f64> = ok.iter().map(|r| r.record.regret).collect();
            let times: Vec<f64> = ok.iter().map(|r| r.record.seconds_per_iteration).collect();
            let (mean_error, se_error) = mean_and_se(&errors);
            let (mean_regret, se_regret) = mean_and_se(&regrets);
            let (environment, beta) = settings[si];
            let (method, dependence) = learners[li];
            Summary {
                environment: environment.to_string(),
                beta,
                method,
                dependence: if dependence == DEPENDENT { DEPENDENT } else { INDEPENDENT },
                teachers: ok.len(),
                failures: members.len() - ok.len(),
                mean_error,
                se_error,
                mean_regret,
                se_regret,
                seconds_per_iteration: mean_and_se(&times).0,
            }
        })
        .collect()
}

fn write_records(path: &Path, rows: &[SuiteRow]) -> Result<()> {
    let dim = rows.iter().map(|r| r.record.theta_true.len()).max().unwrap_or(0);
    let mut header: Vec<String> = RECORD_HEADER.iter().map(|s| s.to_string()).collect();
    header.extend((0..dim).map(|i| format!("theta_true_{i}")));
    header.extend((0..dim).map(|i| format!("theta_hat_{i}")));
    header.extend(["error", "regret", "acceptance_rate", "status"].map(String::from));
    let pad = |v: &[f64]| -> Vec<String> { (0..dim).map(|i| v.get(i).map(|x| float_field(*x)).unwrap_or_default()).collect() };
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let rec = &r.record;
            let mut f = vec![
                rec.teacher_seed.to_string(),
                r.environment.clone(),
                rec.method.clone(),
                rec.dependence.clone(),
                float_field(rec.beta),
            ];
            f.extend(pad(&rec.theta_true));
            f.extend(pad(&rec.theta_hat));
            f.push(float_field(rec.error));
            f.push(float_field(rec.regret));
            f.push(float_field(r.acceptance_rate));
            f.push(match &r.failure {
                None => "ok".into(),
                Some(e) => format!("error: {e}"),
            });
            f
        })
        .collect();
    write_csv(path, &header, &body)
}

fn write_aggregate(path: &Path, summaries: &[Summary]) -> Result<()> {
    let header: Vec<String> = AGGREGATE_HEADER.iter().map(|s| s.to_string()).collect();
    let body: Vec<Vec<String>> = summaries
        .iter()
        .map(|s| {
            vec![
                s.environment.clone(),
                float_field(s.beta),
                s.method.name().to_string(),
                s.dependence.to_string(),
                s.teachers.to_string(),
                s.failures.to_string(),
                float_field(s.mean_error),
                float_field(s.se_error),
                float_field(s.mean_regret),
                float_field(s.se_regret),
            ]
        })
        .collect();
    write_csv(path, &header, &body)
}

/// Plain-text wall-time report: seconds per outer iteration per learner,
/// and the Double MH cost relative to each baseline.
pub fn timing_report(summaries: &[Summary]) -> String {
    let mut per_learner: BTreeMap<(Method, &str), Vec<f64>> = BTreeMap::new();
    for s in summaries.iter().filter(|s| s.seconds_per_iteration.is_finite()) {
        per_learner.entry((s.method, s.dependence)).or_default().push(s.seconds_per_iteration);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mut out = String::from("# seconds per outer MH iteration, averaged over teachers and settings\n");
    for ((method, dependence), v) in &per_learner {
        let _ = writeln!(out, "{method} ({dependence}): {:.3e} s", mean(v));
    }
    for dependence in [INDEPENDENT, DEPENDENT] {
        let Some(dmh) = per_learner.get(&(Method::DoubleMh, dependence)) else {
            continue;
        };
        for ((method, dep), v) in &per_learner {
            if *dep == dependence && *method != Method::DoubleMh {
                let _ = writeln!(out, "double-mh / {method} ({dependence}): {:.2}x", mean(dmh) / mean(v));
            }
        }
    }
    out
}

fn write_outputs(out_dir: &Path, rows: &[SuiteRow], summaries: &[Summary]) -> Result<Vec<std::path::PathBuf>> {
    let records = out_dir.join("records.csv");
    let aggregate = out_dir.join("aggregate.csv");
    let timing = out_dir.join("timing.txt");
    write_records(&records, rows)?;
    write_aggregate(&aggregate, summaries)?;
    write_text(&timing, &timing_report(summaries))?;
    Ok(vec![records, aggregate, timing])
}

fn lower(a: &Summary, b: &Summary, metric: fn(&Summary) -> f64) -> bool {
    metric(a) < metric(b)
}

fn simulation_checks(cfg: &ExperimentConfig, summaries: &[Summary]) -> Vec<Check> {
    let mut checks = Vec::new();
    let labels = env_labels(&cfg.environments);
    for (env_cfg, label) in cfg.environments.iter().zip(&labels) {
        for &beta in &cfg.betas {
            let get = |m: Method| {
                summaries
                    .iter()
                    .find(|s| s.environment == *label && s.beta == beta && s.method == m && s.teachers > 0)
            };
            let at = format!("{label}, β={beta}");
            let Some(dmh) = get(Method::DoubleMh) else { continue };
            for m in [Method::Ignore, Method::Sample, Method::Maximum] {
                if let Some(other) = get(m) {
                    checks.push(Check::new(
                        format!("double-mh-error-below-{m} ({at})"),
                        lower(dmh, other, |s| s.mean_error),
                        format!("{:.4} vs {:.4}", dmh.mean_error, other.mean_error),
                    ));
                }
            }
            if let Some(ignore) = get(Method::Ignore) {
                let rivals: Vec<&Summary> = [Method::Sample, Method::Maximum, Method::DoubleMh]
                    .into_iter()
                    .filter_map(get)
                    .collect();
                if rivals.len() == 3 {
                    let worst = rivals.iter().all(|r| r.mean_error < ignore.mean_error);
                    let listing: Vec<String> =
                        rivals.iter().map(|r| format!("{} {:.4}", r.method, r.mean_error)).collect();
                    checks.push(Check::new(
                        format!("ignore-error-is-largest ({at})"),
                        worst,
                        format!("ignore {:.4}; {}", ignore.mean_error, listing.join(", ")),
                    ));
                }
            }
        }
        for &beta in &cfg.betas {
            let get = |m: Method| {
                summaries
                    .iter()
                    .find(|s| s.environment == *label && s.beta == beta && s.method == m && s.teachers > 0)
            };
            let (Some(ignore), Some(exact)) = (get(Method::Ignore), get(Method::Exact)) else {
                continue;
            };
            let gap = ignore.mean_error - exact.mean_error;
            let at = format!("{label}, β={beta}");
            match env_cfg {
                EnvConfig::Sphere { .. } => checks.push(Check::new(
                    format!("ignore-matches-exact-on-sphere ({at})"),
                    gap.abs() < SPHERE_GAP_TOL,
                    format!("|gap| {:.4} (tolerance {SPHERE_GAP_TOL})", gap.abs()),
                )),
                EnvConfig::Path { .. } if beta == PATH_GAP_BETA => checks.push(Check::new(
                    format!("ignore-trails-exact-on-path ({at})"),
                    gap > PATH_GAP_MIN,
                    format!("gap {gap:.4} (minimum {PATH_GAP_MIN})"),
                )),
                _ => {}
            }
        }
    }
    checks
}

fn dependence_checks(cfg: &ExperimentConfig, summaries: &[Summary]) -> Vec<Check> {
    let mut checks = Vec::new();
    for label in env_labels(&cfg.environments) {
        for &beta in &cfg.betas {
            let group: Vec<&Summary> = summaries
                .iter()
                .filter(|s| s.environment == label && s.beta == beta && s.teachers > 0)
                .collect();
            let find = |dep: &str| group.iter().find(|s| s.method == Method::DoubleMh && s.dependence == dep);
            let at = format!("{label}, β={beta}");
            let Some(dep) = find(DEPENDENT) else { continue };
            if let Some(ind) = find(INDEPENDENT) {
                checks.push(Check::new(
                    format!("dependent-double-mh-error-not-above-independent ({at})"),
                    dep.mean_error <= ind.mean_error,
                    format!("{:.4} vs {:.4}", dep.mean_error, ind.mean_error),
                ));
            }
            for (metric, f) in [("error", (|s: &Summary| s.mean_error) as fn(&Summary) -> f64), ("regret", |s| s.mean_regret)] {
                let others: Vec<&&Summary> = group
                    .iter()
                    .filter(|s| !(s.method == Method::DoubleMh && s.dependence == DEPENDENT))
                    .collect();
                let best = others.iter().all(|o| lower(dep, o, f));
                let runner_up = others.iter().min_by(|a, b| f(a).total_cmp(&f(b)));
                let detail = match runner_up {
                    Some(r) => format!("{:.4}; next best {} ({}) {:.4}", f(dep), r.method, r.dependence, f(r)),
                    None => format!("{:.4}", f(dep)),
                };
                checks.push(Check::new(format!("dependent-double-mh-lowest-{metric} ({at})"), best, detail));
            }
        }
    }
    checks
}

/// Independent teachers, every configured method, one row per
/// (environment, β, teacher, method).
pub fn run_simulation_suite(cfg: &ExperimentConfig, out_dir: &Path, workers: usize) -> Result<SuiteOutcome> {
    let rows = run_jobs(cfg, workers, None)?;
    let summaries = summarize(&rows);
    let files = write_outputs(out_dir, &rows, &summaries)?;
    let checks = simulation_checks(cfg, &summaries);
    Ok(SuiteOutcome {
        rows,
        summaries,
        report: RunReport { files, checks },
    })
}

/// Dependent-correction teachers; every method is learned both as if the
/// corrections were independent and with the dependent model.
pub fn run_dependence_study(cfg: &ExperimentConfig, out_dir: &Path, workers: usize) -> Result<SuiteOutcome> {
    let rows = run_jobs(cfg, workers, Some(cfg.penalty_weight))?;
    let summaries = summarize(&rows);
    let files = write_outputs(out_dir, &rows, &summaries)?;
    let checks = dependence_checks(cfg, &summaries);
    Ok(SuiteOutcome {
        rows,
        summaries,
        report: RunReport { files, checks },
    })
}
