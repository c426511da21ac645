//! Analytic environments and the samplers that move through their
//! trajectory and dataset spaces.
//!
//! Every environment has a linear reward over per-state features,
//! `r(s, θ) = θ · φ(s)`, on an axis-aligned box of states. Trajectories are
//! free waypoint sequences inside that box; dynamics are descriptive only.

mod cup;
mod grid;
mod path;
pub(crate) mod sampling;
mod sphere;

use std::fmt;

pub use cup::CupEnv;
pub use grid::StateGrid;
pub use path::{FeatureScaling, PathEnv, PathEnvBuilder, PathFeature};
pub use sampling::{
    optimal_state, optimal_trajectory, perturb_trajectory, reflect_into, sample_dependent_dataset,
    sample_uniform_trajectory, DatasetSpace,
};
pub use sphere::SphereEnv;
pub(crate) use sampling::optimal_state_on;

use crate::error::{check_dim, contract, Result};
use crate::model::Trajectory;

/// Upper bound on the feature dimension of any environment.
pub const MAX_FEATURES: usize = 8;

/// Slack allowed when checking that a state lies inside its box.
const BOUNDS_SLACK: f64 = 1e-12;

/// Closed axis-aligned box `[lo_i, hi_i]` of admissible states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl StateBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        if lo.is_empty() {
            return Err(contract("a state box needs at least one dimension"));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l.is_finite() && h.is_finite() && l <= h)) {
            return Err(contract("state box bounds must be finite with lo <= hi"));
        }
        Ok(Self { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn contains(&self, state: &[f64]) -> bool {
        state.len() == self.dim()
            && state
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(x, (l, h))| *x >= l - BOUNDS_SLACK && *x <= h + BOUNDS_SLACK)
    }

    /// Lebesgue measure, treating zero-width axes as points.
    pub fn log_volume(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.width(i))
            .filter(|w| *w > 0.0)
            .map(f64::ln)
            .sum()
    }
}

/// Which unit vectors are admissible reward parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewardSupport {
    /// The whole unit sphere.
    Sphere,
    /// Unit vectors with nonnegative entries (features are costs to trade off).
    PositiveOrthant,
}

/// A desk-scale task with a linear reward over per-state features.
pub trait Environment: fmt::Debug + Send + Sync {
    fn name(&self) -> &str;

    fn state_box(&self) -> &StateBox;

    /// Number of states per trajectory.
    fn horizon(&self) -> usize;

    fn feature_dim(&self) -> usize;

    /// Adds `φ(state)` to `out` (`out.len() == feature_dim()`).
    fn add_state_features(&self, state: &[f64], out: &mut [f64]);

    /// Quadrature points per state axis.
    fn quadrature_resolution(&self) -> usize;

    /// The robot's motion before any human correction.
    fn initial_trajectory(&self) -> Trajectory;

    fn reward_support(&self) -> RewardSupport;

    /// Human-readable description of the (deterministic) dynamics. Learning
    /// only ever sees state sequences.
    fn dynamics(&self) -> &str {
        "free waypoints: s(t+1) = s(t) + a(t)"
    }

    /// Exact maximizer of `θ · φ(s)` when one is known in closed form.
    fn closed_form_argmax(&self, _theta: &[f64]) -> Option<Vec<f64>> {
        None
    }

    fn state_dim(&self) -> usize {
        self.state_box().dim()
    }

    fn state_features(&self, state: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.feature_dim()];
        self.add_state_features(state, &mut out);
        out
    }

    fn validate_state(&self, state: &[f64]) -> Result<()> {
        check_dim(self.state_dim(), state.len())?;
        if !self.state_box().contains(state) {
            return Err(contract(format!(
                "state {state:?} lies outside the bounds of {}",
                self.name()
            )));
        }
        Ok(())
    }

    fn validate_trajectory(&self, xi: &Trajectory) -> Result<()> {
        check_dim(self.state_dim(), xi.state_dim())?;
        if xi.len() != self.horizon() {
            return Err(contract(format!(
                "trajectory has {} states, {} expects {}",
                xi.len(),
                self.name(),
                self.horizon()
            )));
        }
        for s in xi.states() {
            self.validate_state(s)?;
        }
        Ok(())
    }
}
