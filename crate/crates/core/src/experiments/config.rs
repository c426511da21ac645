//! Experiment configuration, read from TOML.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::env::{CupEnv, Environment, FeatureScaling, PathEnv, PathFeature, SphereEnv};
use crate::error::{Error, Result};
use crate::inference::{InnerConfig, MhConfig};
use crate::normalizer::NormalizerStrategy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    WorkingExample,
    Crossover,
    SimulationSuite,
    DependenceStudy,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 4] = [
        ExperimentId::WorkingExample,
        ExperimentId::Crossover,
        ExperimentId::SimulationSuite,
        ExperimentId::DependenceStudy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::WorkingExample => "working-example",
            ExperimentId::Crossover => "crossover",
            ExperimentId::SimulationSuite => "simulation-suite",
            ExperimentId::DependenceStudy => "dependence-study",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|id| id.name() == name).ok_or_else(|| {
            let known: Vec<_> = Self::ALL.iter().map(|id| id.name()).collect();
            Error::Config(format!(
                "unknown experiment `{name}`; expected one of: {}",
                known.join(", ")
            ))
        })
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A reward-learning method compared in the suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Ignore,
    Sample,
    Maximum,
    Exact,
    DoubleMh,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Ignore => "ignore",
            Method::Sample => "sample",
            Method::Maximum => "maximum",
            Method::Exact => "exact",
            Method::DoubleMh => "double-mh",
        }
    }

    /// The normalizer this method plugs into MH; `None` for Double MH.
    pub fn strategy(self, samples: usize, seed: u64) -> Option<NormalizerStrategy> {
        match self {
            Method::Ignore => Some(NormalizerStrategy::Ignore),
            Method::Sample => Some(NormalizerStrategy::MeanSampling { samples, seed }),
            Method::Maximum => Some(NormalizerStrategy::Maximum),
            Method::Exact => Some(NormalizerStrategy::ExactQuadrature),
            Method::DoubleMh => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Environment selection and parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EnvConfig {
    Cup {
        #[serde(default = "cup_resolution")]
        resolution: usize,
    },
    Sphere {
        #[serde(default = "unit")]
        radius: f64,
        #[serde(default = "cup_resolution")]
        resolution: usize,
    },
    Path {
        #[serde(default = "two")]
        waypoint_dim: usize,
        #[serde(default = "five")]
        waypoints: usize,
        #[serde(default = "path_features")]
        features: Vec<PathFeature>,
        #[serde(default)]
        scaling: FeatureScaling,
        #[serde(default)]
        resolution: Option<usize>,
    },
}

fn cup_resolution() -> usize {
    CupEnv::DEFAULT_RESOLUTION
}
fn unit() -> f64 {
    1.0
}
fn two() -> usize {
    2
}
fn five() -> usize {
    5
}
fn path_features() -> Vec<PathFeature> {
    vec![PathFeature::Goal, PathFeature::Height]
}

impl EnvConfig {
    pub fn label(&self) -> &'static str {
        match self {
            EnvConfig::Cup { .. } => "cup",
            EnvConfig::Sphere { .. } => "sphere",
            EnvConfig::Path { .. } => "path",
        }
    }

    pub fn build(&self) -> Result<Box<dyn Environment>> {
        Ok(match self {
            EnvConfig::Cup { resolution } => {
                check_resolution(*resolution)?;
                Box::new(CupEnv::new(*resolution))
            }
            EnvConfig::Sphere { radius, resolution } => {
                check_resolution(*resolution)?;
                Box::new(SphereEnv::new(*radius, *resolution).map_err(|e| Error::Config(e.to_string()))?)
            }
            EnvConfig::Path {
                waypoint_dim,
                waypoints,
                features,
                scaling,
                resolution,
            } => {
                let mut b = PathEnv::builder()
                    .waypoint_dim(*waypoint_dim)
                    .waypoints(*waypoints)
                    .features(features.clone())
                    .scaling(*scaling);
                if let Some(r) = resolution {
                    check_resolution(*r)?;
                    b = b.resolution(*r);
                }
                Box::new(b.build()?)
            }
        })
    }
}

fn check_resolution(r: usize) -> Result<()> {
    if r < 2 {
        return Err(Error::Config(format!("quadrature resolution must be >= 2, got {r}")));
    }
    Ok(())
}

/// Sweeps of the two-hypothesis cup example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkingExampleConfig {
    /// Rationality levels for the Ignore and Maximum sweeps.
    pub betas: Vec<f64>,
    /// Sample sizes for the mean-sampling sweep (at `β = 1`).
    pub sample_sizes: Vec<usize>,
    /// Seeded repetitions per mean-sampling setting.
    pub runs: usize,
    /// Number of evenly spaced demonstration angles in `[0, π/2]`.
    pub demos: usize,
    pub crossover_betas: Vec<f64>,
    /// Mean-sampling size in the crossover table.
    pub crossover_samples: usize,
}

impl Default for WorkingExampleConfig {
    fn default() -> Self {
        Self {
            betas: vec![0.5, 1.0, 2.0, 5.0, 10.0, 20.0],
            sample_sizes: vec![1, 10, 100, 1000, 10_000],
            runs: 100,
            demos: 11,
            crossover_betas: vec![0.5, 5.0],
            crossover_samples: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_environments")]
    pub environments: Vec<EnvConfig>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_betas")]
    pub betas: Vec<f64>,
    /// `N` for mean sampling.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Trajectories per teacher.
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_teachers")]
    pub teachers: usize,
    /// Teacher `t` uses seed `seed + t`.
    #[serde(default)]
    pub seed: u64,
    /// Correction half-width for dependent data (defaults to the full box).
    #[serde(default)]
    pub half_width: Option<f64>,
    #[serde(default = "unit")]
    pub penalty_weight: f64,
    #[serde(default)]
    pub mh: MhConfig,
    #[serde(default)]
    pub inner: InnerConfig,
    #[serde(default)]
    pub working_example: WorkingExampleConfig,
}

fn default_environments() -> Vec<EnvConfig> {
    vec![EnvConfig::Path {
        waypoint_dim: 2,
        waypoints: 5,
        features: path_features(),
        scaling: FeatureScaling::default(),
        resolution: None,
    }]
}
fn default_methods() -> Vec<Method> {
    vec![Method::Ignore, Method::Sample, Method::Maximum, Method::DoubleMh]
}
fn default_betas() -> Vec<f64> {
    vec![5.0, 25.0]
}
fn default_samples() -> usize {
    10
}
fn default_k() -> usize {
    3
}
fn default_teachers() -> usize {
    20
}

impl ExperimentConfig {
    /// Defaults for `id`, as if the config file named only the experiment.
    pub fn default_for(id: ExperimentId) -> Self {
        Self::from_toml_str(&format!("experiment = \"{id}\"")).expect("defaults are valid")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |msg: String| Err(Error::Config(msg));
        if self.methods.is_empty() {
            return cfg_err("`methods` must list at least one method".into());
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return cfg_err(format!("method `{m}` listed twice"));
            }
        }
        if self.environments.is_empty() {
            return cfg_err("`environments` must define at least one environment".into());
        }
        for env in &self.environments {
            env.build()?;
        }
        if self.teachers == 0 {
            return cfg_err("`teachers` must be >= 1".into());
        }
        if self.k == 0 {
            return cfg_err("`k` must be >= 1".into());
        }
        if self.samples == 0 {
            return cfg_err("`samples` must be >= 1".into());
        }
        if self.betas.is_empty() || self.betas.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return cfg_err("`betas` must be a nonempty list of finite values > 0".into());
        }
        if let Some(hw) = self.half_width {
            if !(hw.is_finite() && hw >= 0.0) {
                return cfg_err("`half_width` must be >= 0".into());
            }
        }
        if !(self.penalty_weight.is_finite() && self.penalty_weight >= 0.0) {
            return cfg_err("`penalty_weight` must be >= 0".into());
        }
        self.mh.validate()?;
        self.inner.validate()?;
        let we = &self.working_example;
        if we.runs == 0 || we.demos < 2 || we.crossover_samples == 0 {
            return cfg_err("working_example needs runs >= 1, demos >= 2, crossover_samples >= 1".into());
        }
        if we.sample_sizes.contains(&0) {
            return cfg_err("working_example.sample_sizes must be >= 1".into());
        }
        if we.betas.iter().chain(&we.crossover_betas).any(|b| !(b.is_finite() && *b >= 0.0)) {
            return cfg_err("working_example betas must be finite and >= 0".into());
        }
        Ok(())
    }

    /// Where outputs go when no directory is given on the command line.
    pub fn output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("results").join(self.experiment.name()))
    }
}
