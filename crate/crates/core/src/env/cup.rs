use std::f64::consts::FRAC_PI_2;

use super::{Environment, RewardSupport, StateBox};
use crate::error::Result;
use crate::model::{RewardParams, Trajectory};

/// Carrying a cup at a single angle `s ∈ [0, π/2]`.
///
/// The reward `−5 cos θ (s + 1) − sin θ (π/2 − s)` is linear in the unit
/// vector `(cos θ, sin θ)` with features `φ(s) = (−5(s + 1), −(π/2 − s))`.
#[derive(Debug, Clone)]
pub struct CupEnv {
    bounds: StateBox,
    resolution: usize,
}

impl CupEnv {
    pub const DEFAULT_RESOLUTION: usize = 10_000;

    pub fn new(resolution: usize) -> Self {
        Self {
            bounds: StateBox::new(vec![0.0], vec![FRAC_PI_2]).expect("static bounds"),
            resolution,
        }
    }

    /// `θ = 0` (hold the cup horizontally).
    pub fn horizontal() -> RewardParams {
        RewardParams::from_angle(0.0)
    }

    /// `θ = π/2` (hold the cup vertically).
    pub fn vertical() -> RewardParams {
        RewardParams::from_angle(FRAC_PI_2)
    }

    /// The two hypotheses of the working example, `[θ = 0, θ = π/2]`.
    pub fn hypotheses() -> Vec<RewardParams> {
        vec![Self::horizontal(), Self::vertical()]
    }

    /// A one-state trajectory holding the cup at `angle`.
    pub fn demo(angle: f64) -> Result<Trajectory> {
        Trajectory::single(vec![angle])
    }
}

impl Default for CupEnv {
    fn default() -> Self {
        Self::new(Self::DEFAULT_RESOLUTION)
    }
}

impl Environment for CupEnv {
    fn name(&self) -> &str {
        "cup"
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
        let s = state[0];
        out[0] += -5.0 * (s + 1.0);
        out[1] += -(FRAC_PI_2 - s);
    }

    fn quadrature_resolution(&self) -> usize {
        self.resolution
    }

    fn initial_trajectory(&self) -> Trajectory {
        Trajectory::single(vec![0.0]).expect("static trajectory")
    }

    fn reward_support(&self) -> RewardSupport {
        RewardSupport::PositiveOrthant
    }

    fn dynamics(&self) -> &str {
        "static orientation: s(t+1) = s(t)"
    }
}
