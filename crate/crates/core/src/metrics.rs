//! Evaluation quantities for learned reward parameters.

use serde::Serialize;

use crate::env::{optimal_trajectory, CupEnv, Environment};
use crate::error::{check_dim, contract, Result};
use crate::model::{trajectory_reward, RewardParams, Trajectory};
use crate::normalizer::{belief_two_hypothesis, NormalizerStrategy, Rationality};

/// Negative slack tolerated before a regret is reported as an argmax bug.
pub const REGRET_SLACK: f64 = 1e-9;

/// `‖θ − θ̂‖`.
pub fn theta_error(truth: &RewardParams, estimate: &RewardParams) -> Result<f64> {
    check_dim(truth.dim(), estimate.dim())?;
    Ok(truth
        .as_slice()
        .iter()
        .zip(estimate.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

/// Gap between the exact-normalizer belief in `θ = 0` and the belief
/// under `strategy`, on the cup task.
pub fn belief_error(strategy: NormalizerStrategy, xi: &Trajectory, beta: Rationality, env: &CupEnv) -> Result<f64> {
    let exact = belief_two_hypothesis(xi, beta, NormalizerStrategy::ExactQuadrature, env)?;
    let approx = belief_two_hypothesis(xi, beta, strategy, env)?;
    Ok((exact - approx).abs())
}

/// `R(ξ*, θ) − R(ξ̂, θ)` where `ξ*` and `ξ̂` are optimal under `θ` and `θ̂`.
pub fn regret(truth: &RewardParams, estimate: &RewardParams, env: &dyn Environment) -> Result<f64> {
    check_dim(truth.dim(), estimate.dim())?;
    let best = optimal_trajectory(truth, env)?;
    let learned = optimal_trajectory(estimate, env)?;
    let gap = trajectory_reward(&best, truth, env)? - trajectory_reward(&learned, truth, env)?;
    if gap < -REGRET_SLACK {
        return Err(contract(format!(
            "negative regret {gap}: the optimal trajectory for the true reward was not optimal"
        )));
    }
    Ok(gap.max(0.0))
}

/// One evaluated (teacher, method) run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRecord {
    pub teacher_seed: u64,
    pub method: String,
    pub dependence: String,
    pub beta: f64,
    pub theta_true: Vec<f64>,
    pub theta_hat: Vec<f64>,
    pub error: f64,
    pub regret: f64,
    /// Seconds per outer iteration of the chain.
    pub seconds_per_iteration: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::PathEnv;
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    #[test]
    fn theta_error_geometry() {
        let a = RewardParams::from_angle(0.3);
        assert_eq!(theta_error(&a, &a).unwrap(), 0.0);
        let b = RewardParams::from_angle(0.3 + FRAC_PI_2);
        assert!((theta_error(&a, &b).unwrap() - SQRT_2).abs() < 1e-12);
        let c = RewardParams::new(a.as_slice().iter().map(|x| -x).collect()).unwrap();
        assert!((theta_error(&a, &c).unwrap() - 2.0).abs() < 1e-12);
        let d = RewardParams::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert!(theta_error(&a, &d).is_err());
    }

    #[test]
    fn belief_error_examples() {
        let env = CupEnv::default();
        let xi = CupEnv::demo(0.0).unwrap();
        let b = Rationality::new(1.0).unwrap();
        assert_eq!(belief_error(NormalizerStrategy::ExactQuadrature, &xi, b, &env).unwrap(), 0.0);
        let ignore = belief_error(NormalizerStrategy::Ignore, &xi, b, &env).unwrap();
        assert!((ignore - 0.919).abs() < 1e-3, "{ignore}");
    }

    #[test]
    fn regret_examples() {
        let env = CupEnv::default();
        assert_eq!(regret(&CupEnv::vertical(), &CupEnv::vertical(), &env).unwrap(), 0.0);
        let r = regret(&CupEnv::vertical(), &CupEnv::horizontal(), &env).unwrap();
        assert!((r - FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn regret_ignores_estimate_scale() {
        let env = PathEnv::default();
        let truth = RewardParams::new(vec![0.8, 0.6]).unwrap();
        let est = RewardParams::new(vec![0.3, 0.7]).unwrap();
        let scaled = RewardParams::new(vec![3.0, 7.0]).unwrap();
        let a = regret(&truth, &est, &env).unwrap();
        let b = regret(&truth, &scaled, &env).unwrap();
        assert!(a > 0.0);
        assert!((a - b).abs() < 1e-12);
    }
}
