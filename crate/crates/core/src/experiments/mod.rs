//! Seeded experiment suites that write CSV results.
//!
//! Every CSV is a deterministic function of the config: runs are dispatched
//! to a worker pool and merged by (teacher seed, method) before writing, and
//! wall times go only to the plain-text timing report.

mod config;
mod suite;
mod working;

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::output::fmt_float;

pub use config::{EnvConfig, ExperimentConfig, ExperimentId, Method, WorkingExampleConfig};
pub use suite::{run_dependence_study, run_simulation_suite, SuiteOutcome, SuiteRow, Summary};
pub use working::{demo_grid, run_crossover, run_working_example, working_example_checks, working_example_rows, BeliefRow, Sweep, CROSSOVER_BETA};

/// Header of `records.csv` before the per-coordinate θ columns.
pub const RECORD_HEADER: [&str; 5] = ["teacher_seed", "environment", "method", "dependence", "beta"];

/// Header of `aggregate.csv`.
pub const AGGREGATE_HEADER: [&str; 10] = [
    "environment",
    "beta",
    "method",
    "dependence",
    "teachers",
    "failures",
    "mean_error",
    "se_error",
    "mean_regret",
    "se_regret",
];

/// Header of `working_example.csv` and `crossover.csv`.
pub const BELIEF_HEADER: [&str; 8] = [
    "sweep",
    "strategy",
    "beta",
    "samples",
    "demo_angle",
    "runs",
    "mean_belief_error",
    "std_error",
];

/// A named comparison. With `--assert`, any failed check fails the run.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Files written and checks evaluated by one experiment run.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub checks: Vec<Check>,
}

impl RunReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Runs `cfg.experiment`, writing into `out_dir` with `workers` threads.
pub fn run(cfg: &ExperimentConfig, out_dir: &Path, workers: usize) -> Result<RunReport> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    match cfg.experiment {
        ExperimentId::WorkingExample => run_working_example(cfg, out_dir),
        ExperimentId::Crossover => run_crossover(cfg, out_dir),
        ExperimentId::SimulationSuite => Ok(run_simulation_suite(cfg, out_dir, workers)?.report),
        ExperimentId::DependenceStudy => Ok(run_dependence_study(cfg, out_dir, workers)?.report),
    }
}

/// Mean and standard error (`s / √n`); the error is 0 for a single value.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

fn float_field(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        fmt_float(x)
    }
}

pub(crate) fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_standard_error() {
        let (m, se) = mean_and_se(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        // s² = 5/3, se = sqrt(5/12)
        assert!((se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_and_se(&[7.0]), (7.0, 0.0));
        assert!(mean_and_se(&[]).0.is_nan());
    }

    #[test]
    fn csv_writer_uses_unix_newlines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        write_csv(&path, &["a".into(), "b".into()], &[vec!["1".into(), float_field(0.5)]]).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "a,b\n1,0.5\n");
    }

    #[test]
    fn io_errors_name_the_path() {
        let err = write_text(Path::new("/nonexistent-dir/x.txt"), "").unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x.txt"));
    }
}
