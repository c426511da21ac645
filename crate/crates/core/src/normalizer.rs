//! The noisily rational (Boltzmann) human model and its normalizer
//! `Z(θ) = ∫ exp(β R(ξ, θ)) dξ`.
//!
//! Four ways of handling `Z` are provided: ignore it, estimate it from
//! uniform samples, replace it with its largest integrand, or integrate it
//! on a grid. The grid version is a test oracle for low-dimensional spaces.
//! Everything is kept in log space so `β = 25` stays finite.

use std::cell::Cell;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::sampling::{golden_max, refine_coordinates};
use crate::env::{
    optimal_state_on, sample_uniform_trajectory, CupEnv, DatasetSpace, Environment, StateBox,
    StateGrid,
};
use crate::error::{check_dim, contract, Error, Result};
use crate::model::{
    dataset_features, displacement_penalty, dot, features_unchecked, squared_distance,
    state_reward_unchecked, trajectory_reward, RewardParams, Trajectory,
};

thread_local! {
    static EVALUATIONS: Cell<u64> = const { Cell::new(0) };
}

/// Number of normalizer evaluations performed on the current thread.
pub fn normalizer_evaluations() -> u64 {
    EVALUATIONS.with(Cell::get)
}

fn count_evaluation() {
    EVALUATIONS.with(|c| c.set(c.get() + 1));
}

/// Human rationality `β ∈ [0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Rationality(f64);

impl Rationality {
    pub fn new(beta: f64) -> Result<Self> {
        if beta.is_finite() && beta >= 0.0 {
            Ok(Self(beta))
        } else {
            Err(contract(format!("rationality must be finite and >= 0, got {beta}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Rationality {
    type Error = Error;

    fn try_from(beta: f64) -> Result<Self> {
        Self::new(beta)
    }
}

impl From<Rationality> for f64 {
    fn from(b: Rationality) -> f64 {
        b.0
    }
}

impl fmt::Display for Rationality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizerStrategy {
    /// `Z(θ) = 1`.
    Ignore,
    /// Mean of `exp(β R)` over `samples` uniform draws made with `seed`.
    MeanSampling { samples: usize, seed: u64 },
    /// `Z(θ) = max_ξ exp(β R(ξ, θ))`.
    Maximum,
    /// Midpoint quadrature over the environment's grid.
    ExactQuadrature,
}

impl NormalizerStrategy {
    pub fn label(&self) -> &'static str {
        match self {
            NormalizerStrategy::Ignore => "ignore",
            NormalizerStrategy::MeanSampling { .. } => "sample",
            NormalizerStrategy::Maximum => "maximum",
            NormalizerStrategy::ExactQuadrature => "exact",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            NormalizerStrategy::MeanSampling { samples: 0, .. } => {
                Err(Error::Config("mean sampling needs at least one sample".into()))
            }
            _ => Ok(()),
        }
    }
}

/// `log Z(θ)` together with how and where it was computed.
#[derive(Debug, Clone, PartialEq)]
pub struct LogNormalizer {
    pub value: f64,
    pub strategy: NormalizerStrategy,
    pub theta: RewardParams,
}

/// Numerically stable `log Σ exp(v)`.
pub fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Resolution used for grid work over dependent-dataset spaces, where cost
/// grows with the square of the per-waypoint grid size.
fn dataset_resolution(env: &dyn Environment) -> usize {
    let cap = match env.state_dim() {
        1 => 400,
        2 => 40,
        _ => 12,
    };
    env.quadrature_resolution().min(cap)
}

/// A normalizer with its strategy-specific state prepared once (grids,
/// fixed sample sets), evaluated for many `θ`.
pub struct Normalizer<'a> {
    env: &'a dyn Environment,
    beta: f64,
    strategy: NormalizerStrategy,
    prepared: Prepared,
}

enum Prepared {
    Ignore,
    TrajectoryExact(StateGrid),
    TrajectoryMean { features: Vec<f64> },
    TrajectoryMax(StateGrid),
    DatasetExact { space: DatasetSpace, grids: Vec<StateGrid> },
    DatasetMean { features: Vec<f64>, penalties: Vec<f64> },
    DatasetMax { space: DatasetSpace, groups: Vec<usize> },
}

impl<'a> Normalizer<'a> {
    /// Normalizer over single trajectories `ξ ∈ Ξ`.
    pub fn for_trajectories(
        env: &'a dyn Environment,
        beta: Rationality,
        strategy: NormalizerStrategy,
    ) -> Result<Self> {
        strategy.validate()?;
        let prepared = match strategy {
            NormalizerStrategy::Ignore => Prepared::Ignore,
            NormalizerStrategy::ExactQuadrature => {
                Prepared::TrajectoryExact(StateGrid::new(env, env.quadrature_resolution())?)
            }
            NormalizerStrategy::Maximum => {
                Prepared::TrajectoryMax(StateGrid::new(env, env.quadrature_resolution())?)
            }
            NormalizerStrategy::MeanSampling { samples, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Prepared::TrajectoryMean {
                    features: draw_trajectory_features(env, samples, &mut rng),
                }
            }
        };
        Ok(Self {
            env,
            beta: beta.get(),
            strategy,
            prepared,
        })
    }

    /// Normalizer over dependent datasets `D ∈ 𝔻`.
    pub fn for_datasets(
        env: &'a dyn Environment,
        beta: Rationality,
        strategy: NormalizerStrategy,
        space: DatasetSpace,
    ) -> Result<Self> {
        strategy.validate()?;
        let prepared = match strategy {
            NormalizerStrategy::Ignore => Prepared::Ignore,
            NormalizerStrategy::ExactQuadrature => {
                let res = dataset_resolution(env);
                let grids = space
                    .waypoint_boxes()
                    .iter()
                    .map(|b| StateGrid::over_box(env, b, res))
                    .collect::<Result<_>>()?;
                Prepared::DatasetExact { space, grids }
            }
            NormalizerStrategy::Maximum => {
                let groups = waypoint_groups(&space);
                Prepared::DatasetMax { space, groups }
            }
            NormalizerStrategy::MeanSampling { samples, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let (features, penalties) = draw_dataset_features(env, &space, samples, &mut rng);
                Prepared::DatasetMean { features, penalties }
            }
        };
        Ok(Self {
            env,
            beta: beta.get(),
            strategy,
            prepared,
        })
    }

    pub fn strategy(&self) -> NormalizerStrategy {
        self.strategy
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `log Z(θ)` under the prepared strategy.
    pub fn log_z(&self, theta: &RewardParams) -> Result<f64> {
        check_dim(self.env.feature_dim(), theta.dim())?;
        count_evaluation();
        let th = theta.as_slice();
        let beta = self.beta;
        let env = self.env;
        let horizon = env.horizon() as f64;
        let value = match &self.prepared {
            Prepared::Ignore => 0.0,
            Prepared::TrajectoryExact(grid) => horizon * grid.log_integral(th, beta),
            Prepared::TrajectoryMax(grid) => {
                if beta == 0.0 {
                    0.0
                } else {
                    let s = optimal_state_on(theta, env, grid)?;
                    beta * horizon * state_reward_unchecked(&s, th, env)
                }
            }
            Prepared::TrajectoryMean { features } => {
                let d = th.len();
                log_mean_exp(features.chunks_exact(d).map(|phi| beta * dot(th, phi)))
            }
            Prepared::DatasetMean { features, penalties } => {
                let d = th.len();
                log_mean_exp(
                    features
                        .chunks_exact(d)
                        .zip(penalties)
                        .map(|(phi, pen)| beta * (dot(th, phi) - pen)),
                )
            }
            Prepared::DatasetExact { space, grids } => grids
                .iter()
                .zip(space.initial().states())
                .map(|(grid, anchor)| chain_log_integral(grid, anchor, th, beta, space.corrections()))
                .sum(),
            Prepared::DatasetMax { space, groups } => {
                if beta == 0.0 {
                    0.0
                } else {
                    beta * max_dataset_reward(env, space, groups, theta)
                }
            }
        };
        if value.is_nan() {
            return Err(contract(format!("normalizer evaluated to NaN at {theta:?}")));
        }
        Ok(value)
    }

    /// `log Z(θ)` wrapped with its provenance.
    pub fn evaluate(&self, theta: &RewardParams) -> Result<LogNormalizer> {
        Ok(LogNormalizer {
            value: self.log_z(theta)?,
            strategy: self.strategy,
            theta: theta.clone(),
        })
    }
}

fn log_mean_exp(values: impl Iterator<Item = f64>) -> f64 {
    let values: Vec<f64> = values.collect();
    let n = values.len() as f64;
    log_sum_exp(values) - n.ln()
}

fn draw_trajectory_features<R: Rng + ?Sized>(env: &dyn Environment, n: usize, rng: &mut R) -> Vec<f64> {
    let mut features = Vec::with_capacity(n * env.feature_dim());
    for _ in 0..n {
        let xi = sample_uniform_trajectory(env, rng);
        features.extend(features_unchecked(&xi, env));
    }
    features
}

fn draw_dataset_features<R: Rng + ?Sized>(
    env: &dyn Environment,
    space: &DatasetSpace,
    n: usize,
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    let mut features = Vec::with_capacity(n * env.feature_dim());
    let mut penalties = Vec::with_capacity(n);
    for _ in 0..n {
        let d = space.sample(rng);
        features.extend(dataset_features(&d, env));
        penalties.push(displacement_penalty(&d));
    }
    (features, penalties)
}

/// `log ∫ exp(β Σ_i [θ·φ(p_i) − ‖p_i − p_{i−1}‖²]) dp_1…dp_K` for one
/// waypoint index, by a forward recursion over the grid (`p_0 = anchor`).
fn chain_log_integral(grid: &StateGrid, anchor: &[f64], theta: &[f64], beta: f64, k: usize) -> f64 {
    let n = grid.len();
    let node_reward: Vec<f64> = grid.rewards(theta).iter().map(|r| beta * r).collect();
    let mut alpha: Vec<f64> = (0..n)
        .map(|p| node_reward[p] - beta * squared_distance(grid.node(p), anchor) + grid.log_cell())
        .collect();
    let mut terms = vec![0.0; n];
    for _ in 1..k {
        let next: Vec<f64> = (0..n)
            .map(|p| {
                let np = grid.node(p);
                for (q, t) in terms.iter_mut().enumerate() {
                    *t = alpha[q] - beta * squared_distance(np, grid.node(q));
                }
                node_reward[p] + log_sum_exp(terms.iter().copied()) + grid.log_cell()
            })
            .collect();
        alpha = next;
    }
    log_sum_exp(alpha)
}

/// Waypoint indices whose optimization problems coincide share a group
/// (same anchor, same box); returns the representative index per waypoint.
fn waypoint_groups(space: &DatasetSpace) -> Vec<usize> {
    let initial = space.initial();
    (0..initial.len())
        .map(|t| {
            (0..t)
                .find(|&u| {
                    initial.state(u) == initial.state(t) && space.waypoint_box(u) == space.waypoint_box(t)
                })
                .unwrap_or(t)
        })
        .collect()
}

/// `max_{D ∈ 𝔻} R(D, θ)`: independent per waypoint index, each solved by
/// coordinate ascent with golden-section line searches.
fn max_dataset_reward(
    env: &dyn Environment,
    space: &DatasetSpace,
    groups: &[usize],
    theta: &RewardParams,
) -> f64 {
    let mut solved: Vec<Option<f64>> = vec![None; groups.len()];
    let mut total = 0.0;
    for &rep in groups {
        let value = match solved[rep] {
            Some(v) => v,
            None => {
                let v = max_chain_reward(env, space.waypoint_box(rep), space.initial().state(rep), theta, space.corrections());
                solved[rep] = Some(v);
                v
            }
        };
        total += value;
    }
    total
}

fn chain_objective(env: &dyn Environment, anchor: &[f64], theta: &[f64], points: &[f64]) -> f64 {
    let dim = anchor.len();
    let mut prev = anchor;
    let mut total = 0.0;
    for p in points.chunks_exact(dim) {
        total += state_reward_unchecked(p, theta, env) - squared_distance(p, prev);
        prev = p;
    }
    total
}

fn max_chain_reward(env: &dyn Environment, bounds: &StateBox, anchor: &[f64], theta: &RewardParams, k: usize) -> f64 {
    let dim = anchor.len();
    let th = theta.as_slice();
    // start every correction at the best single state inside the box
    let mut start = anchor.to_vec();
    for axis in 0..dim {
        let (lo, hi) = (bounds.lo()[axis], bounds.hi()[axis]);
        if hi > lo {
            let (arg, _) = golden_max(
                |v| {
                    let mut s = start.clone();
                    s[axis] = v;
                    state_reward_unchecked(&s, th, env)
                },
                lo,
                hi,
                1e-10,
            );
            start[axis] = arg;
        }
    }
    let mut x: Vec<f64> = (0..k).flat_map(|_| start.iter().copied()).collect();
    let lo: Vec<f64> = (0..k).flat_map(|_| bounds.lo().iter().copied()).collect();
    let hi: Vec<f64> = (0..k).flat_map(|_| bounds.hi().iter().copied()).collect();
    let radius: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| h - l).collect();
    refine_coordinates(|p| chain_objective(env, anchor, th, p), &mut x, &radius, &lo, &hi, 200)
}

/// `log Z(θ)` by midpoint quadrature over every trajectory in `Ξ`.
pub fn z_exact(theta: &RewardParams, beta: Rationality, env: &dyn Environment) -> Result<LogNormalizer> {
    Normalizer::for_trajectories(env, beta, NormalizerStrategy::ExactQuadrature)?.evaluate(theta)
}

/// `log (1/N Σ exp(β R(ξ_j, θ)))` over `n` uniform trajectories drawn from `rng`.
pub fn z_mean<R: Rng + ?Sized>(
    theta: &RewardParams,
    beta: Rationality,
    env: &dyn Environment,
    n: usize,
    rng: &mut R,
) -> Result<LogNormalizer> {
    if n == 0 {
        return Err(Error::Config("mean sampling needs at least one sample".into()));
    }
    check_dim(env.feature_dim(), theta.dim())?;
    count_evaluation();
    let features = draw_trajectory_features(env, n, rng);
    let th = theta.as_slice();
    let value = log_mean_exp(features.chunks_exact(th.len()).map(|phi| beta.get() * dot(th, phi)));
    Ok(LogNormalizer {
        value,
        strategy: NormalizerStrategy::MeanSampling { samples: n, seed: 0 },
        theta: theta.clone(),
    })
}

/// `β · max_ξ R(ξ, θ)`.
pub fn z_max(theta: &RewardParams, beta: Rationality, env: &dyn Environment) -> Result<LogNormalizer> {
    Normalizer::for_trajectories(env, beta, NormalizerStrategy::Maximum)?.evaluate(theta)
}

/// Dataset-space counterpart of [`z_exact`]; forward recursion over the
/// per-waypoint grids of `space`.
pub fn z_exact_dataset(
    theta: &RewardParams,
    beta: Rationality,
    env: &dyn Environment,
    space: &DatasetSpace,
) -> Result<LogNormalizer> {
    Normalizer::for_datasets(env, beta, NormalizerStrategy::ExactQuadrature, space.clone())?.evaluate(theta)
}

/// Dataset-space counterpart of [`z_mean`].
pub fn z_mean_dataset<R: Rng + ?Sized>(
    theta: &RewardParams,
    beta: Rationality,
    env: &dyn Environment,
    space: &DatasetSpace,
    n: usize,
    rng: &mut R,
) -> Result<LogNormalizer> {
    if n == 0 {
        return Err(Error::Config("mean sampling needs at least one sample".into()));
    }
    check_dim(env.feature_dim(), theta.dim())?;
    count_evaluation();
    let (features, penalties) = draw_dataset_features(env, space, n, rng);
    let th = theta.as_slice();
    let b = beta.get();
    let value = log_mean_exp(
        features
            .chunks_exact(th.len())
            .zip(&penalties)
            .map(|(phi, pen)| b * (dot(th, phi) - pen)),
    );
    Ok(LogNormalizer {
        value,
        strategy: NormalizerStrategy::MeanSampling { samples: n, seed: 0 },
        theta: theta.clone(),
    })
}

/// Dataset-space counterpart of [`z_max`].
pub fn z_max_dataset(
    theta: &RewardParams,
    beta: Rationality,
    env: &dyn Environment,
    space: &DatasetSpace,
) -> Result<LogNormalizer> {
    Normalizer::for_datasets(env, beta, NormalizerStrategy::Maximum, space.clone())?.evaluate(theta)
}

/// `log P(ξ | θ) = β R(ξ, θ) − log Z(θ)` with `Z` from `strategy`.
pub fn log_likelihood(
    xi: &Trajectory,
    theta: &RewardParams,
    beta: Rationality,
    strategy: NormalizerStrategy,
    env: &dyn Environment,
) -> Result<f64> {
    let reward = trajectory_reward(xi, theta, env)?;
    let log_z = Normalizer::for_trajectories(env, beta, strategy)?.log_z(theta)?;
    Ok(beta.get() * reward - log_z)
}

/// Posterior probability that `θ = 0` (horizontal cup) after seeing `ξ`,
/// with a uniform prior over `{0, π/2}` and `Z` from `strategy`.
pub fn belief_two_hypothesis(
    xi: &Trajectory,
    beta: Rationality,
    strategy: NormalizerStrategy,
    env: &CupEnv,
) -> Result<f64> {
    let normalizer = Normalizer::for_trajectories(env, beta, strategy)?;
    belief_with(&normalizer, xi, env)
}

/// Same as [`belief_two_hypothesis`] with an already prepared normalizer.
pub fn belief_with(normalizer: &Normalizer<'_>, xi: &Trajectory, env: &CupEnv) -> Result<f64> {
    let b = normalizer.beta();
    let [h0, h1] = [CupEnv::horizontal(), CupEnv::vertical()];
    let l0 = b * trajectory_reward(xi, &h0, env)? - normalizer.log_z(&h0)?;
    let l1 = b * trajectory_reward(xi, &h1, env)? - normalizer.log_z(&h1)?;
    // 1 / (1 + exp(l1 - l0)), stable for either sign
    let diff = l1 - l0;
    Ok(if diff > 0.0 {
        let e = (-diff).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + diff.exp())
    })
}

/// Whether `log Z(θ)` (exact quadrature) varies by at most `tol` across the
/// given parameters.
pub fn check_spherical_invariance(
    env: &dyn Environment,
    thetas: &[RewardParams],
    beta: Rationality,
    tol: f64,
) -> Result<bool> {
    let normalizer = Normalizer::for_trajectories(env, beta, NormalizerStrategy::ExactQuadrature)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for theta in thetas {
        let v = normalizer.log_z(theta)?;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok(thetas.is_empty() || hi - lo <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{PathEnv, SphereEnv};
    use crate::model::Dataset;
    use std::f64::consts::FRAC_PI_2;

    fn beta(b: f64) -> Rationality {
        Rationality::new(b).unwrap()
    }

    #[test]
    fn rationality_rejects_negative_and_nan() {
        assert!(Rationality::new(-1.0).is_err());
        assert!(Rationality::new(f64::NAN).is_err());
        assert!(Rationality::new(f64::INFINITY).is_err());
        assert!(Rationality::new(0.0).is_ok());
    }

    #[test]
    fn exact_cup_normalizers_match_closed_form() {
        let env = CupEnv::default();
        let z0 = z_exact(&CupEnv::horizontal(), beta(1.0), &env).unwrap().value.exp();
        let z1 = z_exact(&CupEnv::vertical(), beta(1.0), &env).unwrap().value.exp();
        let closed0 = (-5f64).exp() * (1.0 - (-5.0 * FRAC_PI_2).exp()) / 5.0;
        let closed1 = 1.0 - (-FRAC_PI_2).exp();
        assert!((z0 / closed0 - 1.0).abs() < 1e-7);
        assert!((z1 / closed1 - 1.0).abs() < 1e-7);
    }

    #[test]
    fn zero_beta_normalizer_is_measure() {
        let env = PathEnv::builder().waypoint_dim(1).waypoints(3).bounds(0.0, 2.0).build().unwrap();
        for theta in [vec![1.0, 0.0], vec![0.3, 0.9]] {
            let t = RewardParams::new(theta).unwrap();
            let v = z_exact(&t, beta(0.0), &env).unwrap().value;
            assert!((v - 3.0 * 2f64.ln()).abs() < 1e-9);
            assert_eq!(z_max(&t, beta(0.0), &env).unwrap().value, 0.0);
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            assert_eq!(z_mean(&t, beta(0.0), &env, 7, &mut rng).unwrap().value, 0.0);
        }
    }

    #[test]
    fn cup_maximum_normalizers() {
        let env = CupEnv::default();
        let up = z_max(&CupEnv::vertical(), beta(1.0), &env).unwrap().value;
        let flat = z_max(&CupEnv::horizontal(), beta(1.0), &env).unwrap().value;
        assert!(up.abs() < 1e-8, "{up}");
        assert!((flat + 5.0).abs() < 1e-8, "{flat}");
    }

    #[test]
    fn mean_sampling_converges_to_exact_over_volume() {
        let env = CupEnv::default();
        let theta = RewardParams::from_angle(0.6);
        let exact = z_exact(&theta, beta(2.0), &env).unwrap().value - FRAC_PI_2.ln();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let v = z_mean(&theta, beta(2.0), &env, 200_000, &mut rng).unwrap().value;
        assert!((v - exact).abs() < 0.01, "{v} vs {exact}");
    }

    #[test]
    fn mean_sampling_is_seed_deterministic() {
        let env = CupEnv::default();
        let theta = RewardParams::from_angle(0.6);
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            z_mean(&theta, beta(1.0), &env, 10, &mut rng).unwrap().value
        };
        assert_eq!(draw(7), draw(7));
        assert_ne!(draw(7), draw(8));
        let s = NormalizerStrategy::MeanSampling { samples: 10, seed: 7 };
        let prepared = Normalizer::for_trajectories(&env, beta(1.0), s).unwrap();
        assert_eq!(prepared.log_z(&theta).unwrap(), draw(7));
    }

    #[test]
    fn ignore_likelihood_is_scaled_reward() {
        let env = CupEnv::default();
        let xi = CupEnv::demo(0.4).unwrap();
        let theta = RewardParams::from_angle(0.9);
        let ll = log_likelihood(&xi, &theta, beta(2.5), NormalizerStrategy::Ignore, &env).unwrap();
        let r = trajectory_reward(&xi, &theta, &env).unwrap();
        assert_eq!(ll, 2.5 * r);
    }

    #[test]
    fn exact_likelihood_at_horizontal_demo() {
        let env = CupEnv::default();
        let xi = CupEnv::demo(0.0).unwrap();
        let ll = log_likelihood(&xi, &CupEnv::horizontal(), beta(1.0), NormalizerStrategy::ExactQuadrature, &env).unwrap();
        let closed = -5.0 - ((-5f64).exp() * (1.0 - (-5.0 * FRAC_PI_2).exp()) / 5.0).ln();
        assert!((ll - closed).abs() < 1e-6);
        assert!((ll - 1.610).abs() < 1e-3);
    }

    #[test]
    fn uniform_likelihood_at_zero_beta() {
        let env = CupEnv::default();
        let ll = log_likelihood(&CupEnv::demo(1.1).unwrap(), &CupEnv::vertical(), beta(0.0), NormalizerStrategy::ExactQuadrature, &env).unwrap();
        assert!((ll + FRAC_PI_2.ln()).abs() < 1e-9);
    }

    #[test]
    fn working_example_beliefs() {
        let env = CupEnv::default();
        let xi = CupEnv::demo(0.0).unwrap();
        let exact = belief_two_hypothesis(&xi, beta(1.0), NormalizerStrategy::ExactQuadrature, &env).unwrap();
        let ignore = belief_two_hypothesis(&xi, beta(1.0), NormalizerStrategy::Ignore, &env).unwrap();
        assert!((exact - 0.950).abs() < 5e-4, "{exact}");
        assert!((ignore - 0.031).abs() < 5e-4, "{ignore}");
        for s in [NormalizerStrategy::ExactQuadrature, NormalizerStrategy::Ignore, NormalizerStrategy::Maximum] {
            let b = belief_two_hypothesis(&CupEnv::demo(0.7).unwrap(), beta(0.0), s, &env).unwrap();
            assert!((b - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_normalizer_is_invariant() {
        let env = SphereEnv::default();
        let thetas: Vec<_> = (0..50).map(|i| RewardParams::from_angle(i as f64 * 0.37)).collect();
        for b in [0.5, 1.0, 5.0] {
            assert!(check_spherical_invariance(&env, &thetas, beta(b), 1e-3).unwrap());
        }
        let path = PathEnv::builder().waypoint_dim(1).waypoints(2).build().unwrap();
        let quarter: Vec<_> = (0..10).map(|i| RewardParams::from_angle(i as f64 * 0.17)).collect();
        assert!(!check_spherical_invariance(&path, &quarter, beta(1.0), 1e-3).unwrap());
        assert!(check_spherical_invariance(&path, &quarter, beta(0.0), 1e-3).unwrap());
    }

    #[test]
    fn dataset_exact_matches_brute_force_grid() {
        // 1 correction of a 2-waypoint 1-D path: 𝔻 is a square
        let env = PathEnv::builder().waypoint_dim(1).waypoints(2).build().unwrap();
        let initial = Trajectory::from_flat(1, vec![0.2, 0.5]).unwrap();
        let space = DatasetSpace::new(&env, initial.clone(), 1, 0.3).unwrap();
        let theta = RewardParams::new(vec![0.8, 0.6]).unwrap();
        let b = 3.0;
        let got = z_exact_dataset(&theta, beta(b), &env, &space).unwrap().value;

        let m = 600;
        let (a0, a1) = ((0.2f64 - 0.3).max(0.0), 0.5);
        let (c0, c1) = (0.2, 0.8);
        let (ha, hc) = ((a1 - a0) / m as f64, (c1 - c0) / m as f64);
        let mut terms = Vec::new();
        for i in 0..m {
            for j in 0..m {
                let xi = Trajectory::from_flat(1, vec![a0 + (i as f64 + 0.5) * ha, c0 + (j as f64 + 0.5) * hc]).unwrap();
                let d = Dataset::dependent(initial.clone(), vec![xi]).unwrap();
                terms.push(b * crate::model::dataset_reward_dependent(&d, &theta, &env).unwrap());
            }
        }
        let brute = log_sum_exp(terms) + (ha * hc).ln();
        assert!((got - brute).abs() < 1e-4, "{got} vs {brute}");
    }

    #[test]
    fn dataset_max_dominates_samples() {
        let env = PathEnv::builder().waypoint_dim(2).waypoints(3).build().unwrap();
        let space = DatasetSpace::new(&env, env.initial_trajectory(), 3, 0.5).unwrap();
        let theta = RewardParams::new(vec![0.7, 0.3]).unwrap();
        let best = z_max_dataset(&theta, beta(1.0), &env, &space).unwrap().value;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..2000 {
            let d = space.sample(&mut rng);
            let r = crate::model::dataset_reward_dependent(&d, &theta, &env).unwrap();
            assert!(r <= best + 1e-9);
        }
    }

    #[test]
    fn counter_tracks_evaluations() {
        let env = CupEnv::default();
        let n = Normalizer::for_trajectories(&env, beta(1.0), NormalizerStrategy::Ignore).unwrap();
        let before = normalizer_evaluations();
        n.log_z(&CupEnv::vertical()).unwrap();
        n.log_z(&CupEnv::vertical()).unwrap();
        assert_eq!(normalizer_evaluations() - before, 2);
    }
}
