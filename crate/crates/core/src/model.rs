//! Reward parameters, trajectories, datasets and the cumulative reward of a
//! trajectory under a linear reward `r(s, θ) = θ · φ(s)`.

use std::fmt;

use crate::env::{Environment, MAX_FEATURES};
use crate::error::{check_dim, contract, Error, Result};

/// Tolerance on `‖θ‖ = 1` for continuous reward parameters.
pub const UNIT_NORM_TOL: f64 = 1e-9;

/// Unknown reward weights `θ`, always a unit vector in `R^d`.
///
/// Finite hypothesis spaces are expressed as a list of `RewardParams`
/// (see [`crate::inference::Prior::Discrete`]); the chain state is still the
/// weight vector itself.
#[derive(Clone, PartialEq)]
pub struct RewardParams {
    weights: Vec<f64>,
}

impl RewardParams {
    /// Normalizes `weights` onto the unit sphere.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(contract("reward parameters need at least one dimension"));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(contract("reward parameters must be finite"));
        }
        let norm = norm(&weights);
        if norm < 1e-300 {
            return Err(contract("cannot normalize a zero reward vector"));
        }
        Ok(Self {
            weights: weights.into_iter().map(|w| w / norm).collect(),
        })
    }

    /// Accepts `weights` only if they already have unit norm.
    pub fn from_unit(weights: Vec<f64>) -> Result<Self> {
        let n = norm(&weights);
        if weights.is_empty() || (n - 1.0).abs() > UNIT_NORM_TOL {
            return Err(contract(format!("expected a unit vector, got norm {n}")));
        }
        Ok(Self { weights })
    }

    /// The 2-D unit vector `(cos a, sin a)`.
    pub fn from_angle(angle: f64) -> Self {
        Self {
            weights: vec![angle.cos(), angle.sin()],
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.weights
    }

    /// Angle of a 2-D parameter vector, in `(-π, π]`.
    pub fn angle(&self) -> f64 {
        self.weights[1].atan2(self.weights[0])
    }

    pub fn dot(&self, features: &[f64]) -> f64 {
        dot(&self.weights, features)
    }

    pub fn norm(&self) -> f64 {
        norm(&self.weights)
    }
}

impl fmt::Debug for RewardParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("RewardParams").field(&self.weights).finish()
    }
}

/// A fixed-length sequence of states, stored flat (`horizon × state_dim`).
#[derive(Clone, PartialEq)]
pub struct Trajectory {
    state_dim: usize,
    coords: Vec<f64>,
}

impl Trajectory {
    pub fn from_states(states: Vec<Vec<f64>>) -> Result<Self> {
        let state_dim = states
            .first()
            .map(Vec::len)
            .ok_or_else(|| contract("a trajectory needs at least one state"))?;
        if state_dim == 0 {
            return Err(contract("states need at least one coordinate"));
        }
        let mut coords = Vec::with_capacity(state_dim * states.len());
        for s in &states {
            check_dim(state_dim, s.len())?;
            coords.extend_from_slice(s);
        }
        Ok(Self { state_dim, coords })
    }

    pub fn from_flat(state_dim: usize, coords: Vec<f64>) -> Result<Self> {
        if state_dim == 0 || coords.is_empty() || !coords.len().is_multiple_of(state_dim) {
            return Err(contract(format!(
                "{} coordinates do not form whole states of dimension {state_dim}",
                coords.len()
            )));
        }
        Ok(Self { state_dim, coords })
    }

    /// A single-state trajectory.
    pub fn single(state: Vec<f64>) -> Result<Self> {
        Self::from_states(vec![state])
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.state_dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn state(&self, t: usize) -> &[f64] {
        &self.coords[t * self.state_dim..(t + 1) * self.state_dim]
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.state_dim)
    }

    /// All coordinates, state after state.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.coords
    }

    /// Appends the states of `other`.
    pub fn concat(&self, other: &Trajectory) -> Result<Trajectory> {
        check_dim(self.state_dim, other.state_dim)?;
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        Ok(Trajectory {
            state_dim: self.state_dim,
            coords,
        })
    }

    /// Squared Euclidean distance between the flattened state sequences.
    pub fn squared_distance(&self, other: &Trajectory) -> Result<f64> {
        if self.state_dim != other.state_dim || self.coords.len() != other.coords.len() {
            return Err(contract(format!(
                "trajectory shapes differ ({}x{} vs {}x{})",
                self.len(),
                self.state_dim,
                other.len(),
                other.state_dim
            )));
        }
        Ok(squared_distance(&self.coords, &other.coords))
    }
}

impl fmt::Debug for Trajectory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.states()).finish()
    }
}

/// Cumulative features `Φ(ξ) = Σ_s φ(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Dependence {
    /// Every trajectory is a separate draw given `θ`.
    Independent,
    /// Each trajectory corrects its predecessor, starting from the robot's
    /// `initial` motion.
    Dependent { initial: Trajectory },
}

impl Dependence {
    pub fn is_dependent(&self) -> bool {
        matches!(self, Dependence::Dependent { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Dependence::Independent => "independent",
            Dependence::Dependent { .. } => "dependent",
        }
    }
}

/// `K ≥ 1` human trajectories plus how they relate to one another.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    trajectories: Vec<Trajectory>,
    dependence: Dependence,
}

impl Dataset {
    pub fn independent(trajectories: Vec<Trajectory>) -> Result<Self> {
        Self::build(trajectories, Dependence::Independent)
    }

    /// Corrections `ξ_1 … ξ_K` applied on top of the robot's `initial` motion.
    pub fn dependent(initial: Trajectory, corrections: Vec<Trajectory>) -> Result<Self> {
        for c in &corrections {
            if c.len() != initial.len() || c.state_dim() != initial.state_dim() {
                return Err(contract(
                    "corrections must have the same shape as the initial trajectory",
                ));
            }
        }
        Self::build(corrections, Dependence::Dependent { initial })
    }

    fn build(trajectories: Vec<Trajectory>, dependence: Dependence) -> Result<Self> {
        let first = trajectories
            .first()
            .ok_or_else(|| contract("a dataset needs at least one trajectory"))?;
        let dim = first.state_dim();
        if trajectories.iter().any(|t| t.state_dim() != dim) {
            return Err(contract("all trajectories must share one state dimension"));
        }
        Ok(Self {
            trajectories,
            dependence,
        })
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn dependence(&self) -> &Dependence {
        &self.dependence
    }

    /// The robot's initial trajectory for dependent datasets.
    pub fn initial(&self) -> Option<&Trajectory> {
        match &self.dependence {
            Dependence::Dependent { initial } => Some(initial),
            Dependence::Independent => None,
        }
    }

    /// The same trajectories viewed as independent demonstrations.
    pub fn as_independent(&self) -> Dataset {
        Dataset {
            trajectories: self.trajectories.clone(),
            dependence: Dependence::Independent,
        }
    }

    /// A copy with the trajectories replaced, keeping the dependence mode.
    pub fn with_trajectories(&self, trajectories: Vec<Trajectory>) -> Result<Dataset> {
        match &self.dependence {
            Dependence::Independent => Dataset::independent(trajectories),
            Dependence::Dependent { initial } => Dataset::dependent(initial.clone(), trajectories),
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check_theta(theta: &RewardParams, env: &dyn Environment) -> Result<()> {
    check_dim(env.feature_dim(), theta.dim())
}

/// `r(s, θ) = θ · φ(s)`.
pub fn state_reward(state: &[f64], theta: &RewardParams, env: &dyn Environment) -> Result<f64> {
    check_theta(theta, env)?;
    env.validate_state(state)?;
    Ok(state_reward_unchecked(state, theta.as_slice(), env))
}

#[inline]
pub(crate) fn state_reward_unchecked(state: &[f64], theta: &[f64], env: &dyn Environment) -> f64 {
    let mut phi = [0.0; MAX_FEATURES];
    let phi = &mut phi[..theta.len()];
    env.add_state_features(state, phi);
    dot(theta, phi)
}

/// `R(ξ, θ) = Σ_{s∈ξ} r(s, θ)`.
pub fn trajectory_reward(xi: &Trajectory, theta: &RewardParams, env: &dyn Environment) -> Result<f64> {
    check_theta(theta, env)?;
    env.validate_trajectory(xi)?;
    Ok(trajectory_reward_unchecked(xi, theta.as_slice(), env))
}

#[inline]
pub(crate) fn trajectory_reward_unchecked(xi: &Trajectory, theta: &[f64], env: &dyn Environment) -> f64 {
    let mut phi = [0.0; MAX_FEATURES];
    let phi = &mut phi[..theta.len()];
    for s in xi.states() {
        env.add_state_features(s, phi);
    }
    dot(theta, phi)
}

/// `Φ(ξ)`, the elementwise sum of per-state features.
pub fn feature_vector(xi: &Trajectory, env: &dyn Environment) -> Result<FeatureVector> {
    env.validate_trajectory(xi)?;
    Ok(FeatureVector(features_unchecked(xi, env)))
}

pub(crate) fn features_unchecked(xi: &Trajectory, env: &dyn Environment) -> Vec<f64> {
    let mut phi = vec![0.0; env.feature_dim()];
    for s in xi.states() {
        env.add_state_features(s, &mut phi);
    }
    phi
}

/// `Σ_i R(ξ_i, θ)` for conditionally independent demonstrations.
pub fn dataset_reward_independent(
    data: &Dataset,
    theta: &RewardParams,
    env: &dyn Environment,
) -> Result<f64> {
    if data.dependence().is_dependent() {
        return Err(contract(
            "dataset_reward_independent needs an independent dataset",
        ));
    }
    data.trajectories()
        .iter()
        .map(|xi| trajectory_reward(xi, theta, env))
        .sum()
}

/// `Σ_{i=1}^K R(ξ_i, θ) − ‖ξ_i − ξ_{i−1}‖²` with `ξ_0` the robot's initial
/// trajectory. `ξ_0` contributes no reward of its own.
pub fn dataset_reward_dependent(
    data: &Dataset,
    theta: &RewardParams,
    env: &dyn Environment,
) -> Result<f64> {
    let initial = data
        .initial()
        .ok_or_else(|| contract("dataset_reward_dependent needs a dependent dataset"))?;
    check_theta(theta, env)?;
    env.validate_trajectory(initial)?;
    let mut prev = initial;
    let mut total = 0.0;
    for xi in data.trajectories() {
        env.validate_trajectory(xi)?;
        total += trajectory_reward_unchecked(xi, theta.as_slice(), env) - xi.squared_distance(prev)?;
        prev = xi;
    }
    Ok(total)
}

/// Sum of squared displacements between consecutive trajectories of a
/// dependent dataset (the `θ`-independent part of its reward).
pub(crate) fn displacement_penalty(data: &Dataset) -> f64 {
    let Some(initial) = data.initial() else {
        return 0.0;
    };
    let mut prev = initial;
    let mut total = 0.0;
    for xi in data.trajectories() {
        total += squared_distance(xi.coords(), prev.coords());
        prev = xi;
    }
    total
}

/// Summed features over all trajectories of a dataset.
pub(crate) fn dataset_features(data: &Dataset, env: &dyn Environment) -> Vec<f64> {
    let mut phi = vec![0.0; env.feature_dim()];
    for xi in data.trajectories() {
        for s in xi.states() {
            env.add_state_features(s, &mut phi);
        }
    }
    phi
}

/// `β·R(D, θ)` for either dependence mode.
pub(crate) fn dataset_reward(data: &Dataset, theta: &RewardParams, env: &dyn Environment) -> Result<f64> {
    match data.dependence() {
        Dependence::Independent => dataset_reward_independent(data, theta, env),
        Dependence::Dependent { .. } => dataset_reward_dependent(data, theta, env),
    }
}

impl From<FeatureVector> for Vec<f64> {
    fn from(f: FeatureVector) -> Self {
        f.0
    }
}

impl TryFrom<Vec<f64>> for RewardParams {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        RewardParams::new(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{CupEnv, PathEnv, PathFeature};
    use std::f64::consts::FRAC_PI_2;

    fn cup() -> CupEnv {
        CupEnv::default()
    }

    #[test]
    fn cup_reward_at_horizontal() {
        let r = state_reward(&[0.0], &RewardParams::from_angle(0.0), &cup()).unwrap();
        assert!((r + 5.0).abs() < 1e-12);
    }

    #[test]
    fn cup_reward_matches_closed_form() {
        let env = cup();
        for &a in &[0.0, 0.3, 1.0, FRAC_PI_2] {
            for &s in &[0.0, 0.7, FRAC_PI_2] {
                let closed = -5.0 * a.cos() * (s + 1.0) - a.sin() * (FRAC_PI_2 - s);
                let r = state_reward(&[s], &RewardParams::from_angle(a), &env).unwrap();
                assert!((r - closed).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn vertical_cup_trajectory_has_zero_reward() {
        let xi = Trajectory::single(vec![FRAC_PI_2]).unwrap();
        let r = trajectory_reward(&xi, &RewardParams::from_angle(FRAC_PI_2), &cup()).unwrap();
        assert!(r.abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let theta = RewardParams::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            state_reward(&[0.0], &theta, &cup()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn out_of_bounds_state_is_rejected() {
        let theta = RewardParams::from_angle(0.0);
        assert!(state_reward(&[2.0], &theta, &cup()).is_err());
    }

    #[test]
    fn empty_trajectory_cannot_be_built() {
        assert!(Trajectory::from_states(vec![]).is_err());
        assert!(Trajectory::from_flat(1, vec![]).is_err());
    }

    #[test]
    fn two_cup_demos_independent_reward() {
        let env = cup();
        let d = Dataset::independent(vec![
            Trajectory::single(vec![0.0]).unwrap(),
            Trajectory::single(vec![FRAC_PI_2]).unwrap(),
        ])
        .unwrap();
        let r = dataset_reward_independent(&d, &RewardParams::from_angle(0.0), &env).unwrap();
        // -5 + -5(π/2 + 1)
        assert!((r - (-17.853981633974485)).abs() < 1e-9, "{r}");
    }

    #[test]
    fn independent_reward_rejects_dependent_data() {
        let xi = Trajectory::single(vec![0.0]).unwrap();
        let d = Dataset::dependent(xi.clone(), vec![xi]).unwrap();
        assert!(dataset_reward_independent(&d, &RewardParams::from_angle(0.0), &cup()).is_err());
        assert!(dataset_reward_dependent(&d.as_independent(), &RewardParams::from_angle(0.0), &cup()).is_err());
    }

    #[test]
    fn dependent_reward_hand_expansion() {
        let env = PathEnv::builder()
            .waypoint_dim(1)
            .waypoints(2)
            .features(vec![PathFeature::Goal, PathFeature::Height])
            .build()
            .unwrap();
        let theta = RewardParams::new(vec![0.6, 0.8]).unwrap();
        let t = |a: f64, b: f64| Trajectory::from_flat(1, vec![a, b]).unwrap();
        let x0 = t(0.0, 0.1);
        let xs = [t(0.2, 0.5), t(0.3, 0.9), t(0.35, 0.6)];
        let d = Dataset::dependent(x0.clone(), xs.to_vec()).unwrap();

        let r = |x: &Trajectory| trajectory_reward(x, &theta, &env).unwrap();
        let sq = |a: &Trajectory, b: &Trajectory| {
            a.coords()
                .iter()
                .zip(b.coords())
                .map(|(p, q)| (p - q).powi(2))
                .sum::<f64>()
        };
        let expected = (r(&xs[0]) - sq(&xs[0], &x0))
            + (r(&xs[1]) - sq(&xs[1], &xs[0]))
            + (r(&xs[2]) - sq(&xs[2], &xs[1]));
        let got = dataset_reward_dependent(&d, &theta, &env).unwrap();
        assert!((got - expected).abs() < 1e-12);

        // order matters for the dependent reward
        let swapped = Dataset::dependent(x0, vec![xs[2].clone(), xs[0].clone(), xs[1].clone()]).unwrap();
        let other = dataset_reward_dependent(&swapped, &theta, &env).unwrap();
        assert!((other - got).abs() > 1e-3);
    }

    #[test]
    fn identical_consecutive_corrections_have_no_penalty() {
        let env = cup();
        let xi = Trajectory::single(vec![0.4]).unwrap();
        let theta = RewardParams::from_angle(0.7);
        let d = Dataset::dependent(xi.clone(), vec![xi.clone()]).unwrap();
        let got = dataset_reward_dependent(&d, &theta, &env).unwrap();
        assert_eq!(got, trajectory_reward(&xi, &theta, &env).unwrap());
    }

    #[test]
    fn doubling_displacement_quadruples_penalty() {
        let env = cup();
        let theta = RewardParams::from_angle(0.7);
        let x0 = Trajectory::single(vec![0.5]).unwrap();
        let near = Trajectory::single(vec![0.6]).unwrap();
        let far = Trajectory::single(vec![0.7]).unwrap();
        let pen = |x: &Trajectory| {
            let d = Dataset::dependent(x0.clone(), vec![x.clone()]).unwrap();
            trajectory_reward(x, &theta, &env).unwrap() - dataset_reward_dependent(&d, &theta, &env).unwrap()
        };
        assert!((pen(&far) - 4.0 * pen(&near)).abs() < 1e-12);
    }

    #[test]
    fn mismatched_correction_shape_is_rejected() {
        let x0 = Trajectory::from_flat(1, vec![0.0, 0.0]).unwrap();
        let x1 = Trajectory::single(vec![0.0]).unwrap();
        assert!(Dataset::dependent(x0, vec![x1]).is_err());
    }

    #[test]
    fn reward_params_normalize() {
        let p = RewardParams::new(vec![3.0, 4.0]).unwrap();
        assert!((p.norm() - 1.0).abs() < 1e-12);
        assert!(RewardParams::new(vec![0.0, 0.0]).is_err());
        assert!(RewardParams::from_unit(vec![0.6, 0.7]).is_err());
    }
}
