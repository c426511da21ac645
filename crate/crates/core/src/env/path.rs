use serde::{Deserialize, Serialize};

use super::{Environment, RewardSupport, StateBox, MAX_FEATURES};
use crate::error::{contract, Error, Result};
use crate::model::Trajectory;

/// Per-waypoint cost terms of a [`PathEnv`]. Each is affinely mapped onto
/// `[−1, 0]` over the waypoint box (0 is best).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathFeature {
    /// Squared distance to the goal.
    Goal,
    /// Height above the table (last waypoint coordinate).
    Height,
    /// Squared distance from the start position.
    Travel,
}

/// Where the `[−1, 0]` feature range applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureScaling {
    /// Each waypoint's features lie in `[−1, 0]`; trajectory totals in `[−T, 0]`.
    #[default]
    PerState,
    /// Trajectory totals lie in `[−1, 0]` (waypoint features are averaged).
    PerTrajectory,
}

/// Waypoint paths in a 1-D or 2-D workspace with trade-off features, an
/// analytic stand-in for tabletop pushing/closing/pouring tasks.
#[derive(Debug, Clone)]
pub struct PathEnv {
    bounds: StateBox,
    waypoints: usize,
    features: Vec<PathFeature>,
    goal: Vec<f64>,
    start: Vec<f64>,
    resolution: usize,
    scaling: FeatureScaling,
    // per-feature multiplier applied after the raw cost
    scale: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct PathEnvBuilder {
    waypoint_dim: usize,
    waypoints: usize,
    features: Vec<PathFeature>,
    lo: f64,
    hi: f64,
    goal: Option<Vec<f64>>,
    start: Option<Vec<f64>>,
    resolution: Option<usize>,
    scaling: FeatureScaling,
}

impl Default for PathEnvBuilder {
    fn default() -> Self {
        Self {
            waypoint_dim: 2,
            waypoints: 5,
            features: vec![PathFeature::Goal, PathFeature::Height],
            lo: 0.0,
            hi: 1.0,
            goal: None,
            start: None,
            resolution: None,
            scaling: FeatureScaling::default(),
        }
    }
}

impl PathEnvBuilder {
    pub fn waypoint_dim(mut self, dim: usize) -> Self {
        self.waypoint_dim = dim;
        self
    }

    pub fn waypoints(mut self, n: usize) -> Self {
        self.waypoints = n;
        self
    }

    pub fn features(mut self, features: Vec<PathFeature>) -> Self {
        self.features = features;
        self
    }

    /// Same bounds on every waypoint axis.
    pub fn bounds(mut self, lo: f64, hi: f64) -> Self {
        self.lo = lo;
        self.hi = hi;
        self
    }

    pub fn goal(mut self, goal: Vec<f64>) -> Self {
        self.goal = Some(goal);
        self
    }

    pub fn start(mut self, start: Vec<f64>) -> Self {
        self.start = Some(start);
        self
    }

    pub fn resolution(mut self, resolution: usize) -> Self {
        self.resolution = Some(resolution);
        self
    }

    pub fn scaling(mut self, scaling: FeatureScaling) -> Self {
        self.scaling = scaling;
        self
    }

    pub fn build(self) -> Result<PathEnv> {
        let w = self.waypoint_dim;
        if !(1..=2).contains(&w) {
            return Err(Error::Config(format!("waypoint_dim must be 1 or 2, got {w}")));
        }
        if self.waypoints == 0 {
            return Err(Error::Config("a path needs at least one waypoint".into()));
        }
        if !(2..=3).contains(&self.features.len()) {
            return Err(Error::Config(format!(
                "path environments use 2 or 3 features, got {}",
                self.features.len()
            )));
        }
        if self.features.len() > MAX_FEATURES {
            return Err(contract("too many features"));
        }
        for (i, f) in self.features.iter().enumerate() {
            if self.features[..i].contains(f) {
                return Err(Error::Config(format!("feature {f:?} listed twice")));
            }
        }
        if self.lo.partial_cmp(&self.hi) != Some(std::cmp::Ordering::Less) {
            return Err(Error::Config("path bounds need lo < hi".into()));
        }
        let bounds = StateBox::new(vec![self.lo; w], vec![self.hi; w])?;
        let span = self.hi - self.lo;
        let goal = self
            .goal
            .unwrap_or_else(|| vec![self.lo + 0.8 * span; w]);
        let start = self.start.unwrap_or_else(|| vec![self.lo; w]);
        for (name, p) in [("goal", &goal), ("start", &start)] {
            if !bounds.contains(p) {
                return Err(Error::Config(format!("{name} {p:?} is outside the path bounds")));
            }
        }
        let farthest = |p: &[f64]| -> f64 {
            p.iter()
                .map(|x| (x - self.lo).max(self.hi - x).powi(2))
                .sum()
        };
        let per_traj = match self.scaling {
            FeatureScaling::PerState => 1.0,
            FeatureScaling::PerTrajectory => 1.0 / self.waypoints as f64,
        };
        let scale = self
            .features
            .iter()
            .map(|f| {
                let range = match f {
                    PathFeature::Goal => farthest(&goal),
                    PathFeature::Height => span,
                    PathFeature::Travel => farthest(&start),
                };
                per_traj / range
            })
            .collect();
        let resolution = self
            .resolution
            .unwrap_or(if w == 1 { 10_000 } else { 200 });
        Ok(PathEnv {
            bounds,
            waypoints: self.waypoints,
            features: self.features,
            goal,
            start,
            resolution,
            scaling: self.scaling,
            scale,
        })
    }
}

impl PathEnv {
    pub fn builder() -> PathEnvBuilder {
        PathEnvBuilder::default()
    }

    pub fn features(&self) -> &[PathFeature] {
        &self.features
    }

    pub fn goal(&self) -> &[f64] {
        &self.goal
    }

    pub fn start(&self) -> &[f64] {
        &self.start
    }

    pub fn scaling(&self) -> FeatureScaling {
        self.scaling
    }
}

impl Default for PathEnv {
    fn default() -> Self {
        Self::builder().build().expect("default path environment")
    }
}

impl Environment for PathEnv {
    fn name(&self) -> &str {
        "path"
    }

    fn state_box(&self) -> &StateBox {
        &self.bounds
    }

    fn horizon(&self) -> usize {
        self.waypoints
    }

    fn feature_dim(&self) -> usize {
        self.features.len()
    }

    #[inline]
    fn add_state_features(&self, p: &[f64], out: &mut [f64]) {
        for (k, f) in self.features.iter().enumerate() {
            let cost = match f {
                PathFeature::Goal => p.iter().zip(&self.goal).map(|(a, b)| (a - b) * (a - b)).sum(),
                PathFeature::Height => p[p.len() - 1] - self.bounds.lo()[p.len() - 1],
                PathFeature::Travel => p.iter().zip(&self.start).map(|(a, b)| (a - b) * (a - b)).sum(),
            };
            out[k] -= cost * self.scale[k];
        }
    }

    fn quadrature_resolution(&self) -> usize {
        self.resolution
    }

    fn initial_trajectory(&self) -> Trajectory {
        Trajectory::from_states(vec![self.start.clone(); self.waypoints]).expect("valid start")
    }

    fn reward_support(&self) -> RewardSupport {
        RewardSupport::PositiveOrthant
    }

    fn dynamics(&self) -> &str {
        "end-effector waypoints: s(t+1) = s(t) + a(t)"
    }
}
