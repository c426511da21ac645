use std::f64::consts::TAU;

use super::{Environment, RewardSupport, StateBox};
use crate::error::{contract, Result};
use crate::model::Trajectory;

/// One-parameter trajectories whose features trace a circle of radius `σ`,
/// `Φ(ξ_t) = (σ cos t, σ sin t)`. The normalizer is the same for every `θ`.
#[derive(Debug, Clone)]
pub struct SphereEnv {
    radius: f64,
    bounds: StateBox,
    resolution: usize,
}

impl SphereEnv {
    pub const DEFAULT_RESOLUTION: usize = 10_000;

    pub fn new(radius: f64, resolution: usize) -> Result<Self> {
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(contract(format!("sphere radius must be >= 0, got {radius}")));
        }
        Ok(Self {
            radius,
            bounds: StateBox::new(vec![0.0], vec![TAU])?,
            resolution,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

impl Default for SphereEnv {
    fn default() -> Self {
        Self::new(1.0, Self::DEFAULT_RESOLUTION).expect("unit radius")
    }
}

impl Environment for SphereEnv {
    fn name(&self) -> &str {
        "sphere"
    }

    fn state_box(&self) -> &StateBox {
        &self.bounds
    }

    fn horizon(&self) -> usize {
        1
    }

    fn feature_dim(&self) -> usize {
        2
    }

    #[inline]
    fn add_state_features(&self, state: &[f64], out: &mut [f64]) {
        let (sin, cos) = state[0].sin_cos();
        out[0] += self.radius * cos;
        out[1] += self.radius * sin;
    }

    fn quadrature_resolution(&self) -> usize {
        self.resolution
    }

    fn initial_trajectory(&self) -> Trajectory {
        Trajectory::single(vec![0.0]).expect("static trajectory")
    }

    fn reward_support(&self) -> RewardSupport {
        RewardSupport::Sphere
    }

    fn dynamics(&self) -> &str {
        "one-parameter family indexed by t"
    }

    fn closed_form_argmax(&self, theta: &[f64]) -> Option<Vec<f64>> {
        Some(vec![theta[1].atan2(theta[0]).rem_euclid(TAU)])
    }
}
