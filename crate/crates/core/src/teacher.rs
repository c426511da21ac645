//! Simulated noisily rational teachers.
//!
//! Teachers draw their trajectories from `P(ξ | θ) ∝ exp(β R(ξ, θ))` with a
//! long Metropolis-Hastings chain, so the noise in a dataset reflects `β`
//! and not sampler error.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::sampling::perturb_in_place;
use crate::env::{sample_uniform_trajectory, DatasetSpace, Environment};
use crate::error::{check_dim, contract, Error, Result};
use crate::inference::{inner_chain, InnerConfig, Prior};
use crate::model::{squared_distance, trajectory_reward_unchecked, Dataset, RewardParams, Trajectory};
use crate::normalizer::Rationality;

/// MH steps behind every teacher draw.
pub const TEACHER_BURN_IN: usize = 2000;

/// Per-coordinate proposal std of teacher chains, as a fraction of the
/// state-axis width.
pub const TEACHER_STEP_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum TeacherMode {
    /// Every trajectory is a fresh draw from `P(ξ | θ)`.
    Independent,
    /// Sequential corrections of the robot's initial trajectory, each drawn
    /// with reward `R(ξ, θ) − λ ‖ξ − ξ_prev‖²` and kept within `half_width`
    /// of the initial trajectory.
    Dependent { half_width: f64, penalty_weight: f64 },
}

impl TeacherMode {
    pub fn dependent(half_width: f64) -> Self {
        TeacherMode::Dependent {
            half_width,
            penalty_weight: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TeacherSpec {
    pub theta: RewardParams,
    pub beta: Rationality,
    pub k: usize,
    pub mode: TeacherMode,
    pub seed: u64,
}

impl TeacherSpec {
    /// A teacher whose `θ` is drawn uniformly from the environment's prior
    /// support using `seed`.
    pub fn random(env: &dyn Environment, beta: Rationality, k: usize, mode: TeacherMode, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let theta = Prior::for_env(env).sample(env.feature_dim(), &mut rng)?;
        let spec = Self {
            theta,
            beta,
            k,
            mode,
            seed,
        };
        spec.validate(env)?;
        Ok(spec)
    }

    pub fn validate(&self, env: &dyn Environment) -> Result<()> {
        check_dim(env.feature_dim(), self.theta.dim())?;
        if self.k == 0 {
            return Err(Error::Config("teachers provide at least one trajectory".into()));
        }
        if let TeacherMode::Dependent {
            half_width,
            penalty_weight,
        } = self.mode
        {
            if !(half_width.is_finite() && half_width >= 0.0) {
                return Err(Error::Config("correction half-width must be >= 0".into()));
            }
            if !(penalty_weight.is_finite() && penalty_weight >= 0.0) {
                return Err(Error::Config("penalty weight must be >= 0".into()));
            }
        }
        Ok(())
    }

    /// The RNG this teacher's dataset is drawn with.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        // stream 0 drew θ
        rng.set_stream(1);
        rng
    }
}

fn teacher_chain_config() -> InnerConfig {
    InnerConfig {
        iterations: TEACHER_BURN_IN,
        step_fraction: TEACHER_STEP_FRACTION,
        ..InnerConfig::default()
    }
}

/// One trajectory from `P(ξ | θ_true)`: an MH chain of
/// [`TEACHER_BURN_IN`] steps from a uniform start.
pub fn sample_teacher_trajectory<R: Rng + ?Sized>(spec: &TeacherSpec, env: &dyn Environment, rng: &mut R) -> Result<Trajectory> {
    spec.validate(env)?;
    let start = Dataset::independent(vec![sample_uniform_trajectory(env, rng)])?;
    Ok(inner_chain(&start, spec.theta.as_slice(), spec.beta.get(), env, &teacher_chain_config(), rng))
}

/// A full teacher dataset of `spec.k` trajectories. Needs `β > 0`.
pub fn generate_dataset<R: Rng + ?Sized>(spec: &TeacherSpec, env: &dyn Environment, rng: &mut R) -> Result<Dataset> {
    spec.validate(env)?;
    if spec.beta.get() <= 0.0 {
        return Err(Error::Config("teacher rationality must be > 0".into()));
    }
    match spec.mode {
        TeacherMode::Independent => {
            let draws = (0..spec.k)
                .map(|_| sample_teacher_trajectory(spec, env, rng))
                .collect::<Result<_>>()?;
            Dataset::independent(draws)
        }
        TeacherMode::Dependent {
            half_width,
            penalty_weight,
        } => {
            let initial = env.initial_trajectory();
            let space = DatasetSpace::new(env, initial.clone(), spec.k, half_width)?;
            let mut prev = initial.clone();
            let mut corrections = Vec::with_capacity(spec.k);
            for _ in 0..spec.k {
                let next = correct(&prev, spec, penalty_weight, env, &space, rng);
                corrections.push(next.clone());
                prev = next;
            }
            let data = Dataset::dependent(initial, corrections)?;
            if !space.contains(&data) {
                return Err(contract("teacher corrections left their dataset space"));
            }
            Ok(data)
        }
    }
}

/// One correction of `prev`: MH from `prev` targeting
/// `exp(β [R(ξ, θ) − λ ‖ξ − prev‖²])` inside the dataset space.
fn correct<R: Rng + ?Sized>(
    prev: &Trajectory,
    spec: &TeacherSpec,
    weight: f64,
    env: &dyn Environment,
    space: &DatasetSpace,
    rng: &mut R,
) -> Trajectory {
    let theta = spec.theta.as_slice();
    let beta = spec.beta.get();
    let bounds = env.state_box();
    let std: Vec<f64> = (0..bounds.dim())
        .map(|a| TEACHER_STEP_FRACTION * bounds.width(a))
        .collect();
    let score = |xi: &Trajectory| {
        trajectory_reward_unchecked(xi, theta, env) - weight * squared_distance(xi.coords(), prev.coords())
    };
    let mut xi = prev.clone();
    let mut current = score(&xi);
    let mut candidate = xi.clone();
    for _ in 0..TEACHER_BURN_IN {
        candidate.coords_mut().copy_from_slice(xi.coords());
        perturb_in_place(&mut candidate, &std, |t| space.waypoint_box(t), rng);
        let s = score(&candidate);
        let u: f64 = rng.random();
        if u.ln() < beta * (s - current) {
            std::mem::swap(&mut xi, &mut candidate);
            current = s;
        }
    }
    xi
}
