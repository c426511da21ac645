//! Posterior sampling over reward parameters.
//!
//! [`mh_posterior`] is Metropolis-Hastings with a plug-in normalizer
//! approximation. [`double_mh_posterior`] replaces the normalizer with an
//! auxiliary draw from an inner MH chain, so the `Z` terms cancel.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::env::sampling::perturb_in_place;
use crate::env::{DatasetSpace, Environment, RewardSupport};
use crate::error::{check_dim, contract, Error, Result};
use crate::model::{
    dataset_reward, dot, norm, trajectory_reward_unchecked, Dataset,
    RewardParams, Trajectory,
};
use crate::normalizer::{Normalizer, NormalizerStrategy, Rationality};
use crate::output::fmt_float;

/// Attempts at drawing an initial `θ` with a finite log-posterior.
pub const INIT_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MhConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    /// Std of the tangent Gaussian step on the unit sphere.
    pub proposal_scale: f64,
    pub seed: u64,
}

impl Default for MhConfig {
    fn default() -> Self {
        Self {
            iterations: 5000,
            burn_in: 1000,
            thin: 1,
            proposal_scale: 0.15,
            seed: 0,
        }
    }
}

impl MhConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be positive".into()));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::Config(format!(
                "burn-in ({}) must be below iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        if self.thin == 0 {
            return Err(Error::Config("thinning stride must be >= 1".into()));
        }
        if !(self.proposal_scale.is_finite() && self.proposal_scale > 0.0) {
            return Err(Error::Config("proposal scale must be > 0".into()));
        }
        Ok(())
    }

    /// Number of samples a chain with this config keeps.
    pub fn kept_samples(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }

    fn keeps(&self, iteration: usize) -> bool {
        iteration >= self.burn_in && (iteration - self.burn_in + 1).is_multiple_of(self.thin)
    }
}

/// How many auxiliary draws Double MH makes per outer proposal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuxiliaryDraws {
    /// One inner chain per observation; each auxiliary term enters once.
    #[default]
    PerObservation,
    /// A single inner chain whose auxiliary term is weighted by `K`.
    Shared,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InnerConfig {
    pub iterations: usize,
    /// Per-coordinate proposal std as a fraction of the state-axis width.
    pub step_fraction: f64,
    pub auxiliary: AuxiliaryDraws,
}

impl Default for InnerConfig {
    fn default() -> Self {
        Self {
            iterations: 500,
            step_fraction: 0.1,
            auxiliary: AuxiliaryDraws::PerObservation,
        }
    }
}

impl InnerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("inner iterations must be >= 1".into()));
        }
        if !(self.step_fraction.is_finite() && self.step_fraction > 0.0) {
            return Err(Error::Config("inner step fraction must be > 0".into()));
        }
        Ok(())
    }
}

/// RNG for the inner chain launched at outer `iteration` of a chain seeded
/// with `seed`. The outer chain itself uses stream 0.
pub fn inner_rng(seed: u64, iteration: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(iteration as u64 + 1);
    rng
}

/// Prior over `θ`. Every variant is uniform on its support, so only
/// support membership matters in acceptance ratios.
#[derive(Debug, Clone, PartialEq)]
pub enum Prior {
    UniformSphere,
    /// Unit vectors with nonnegative entries.
    UniformOrthant,
    /// Uniform over a finite set of hypotheses.
    Discrete(Vec<RewardParams>),
}

impl Prior {
    /// The continuous prior matching an environment's reward support.
    pub fn for_env(env: &dyn Environment) -> Self {
        match env.reward_support() {
            RewardSupport::Sphere => Prior::UniformSphere,
            RewardSupport::PositiveOrthant => Prior::UniformOrthant,
        }
    }

    pub fn log_density(&self, theta: &RewardParams) -> f64 {
        let inside = match self {
            Prior::UniformSphere => true,
            Prior::UniformOrthant => theta.as_slice().iter().all(|w| *w >= 0.0),
            Prior::Discrete(hyps) => hyps.iter().any(|h| h == theta),
        };
        if inside {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, dim: usize, rng: &mut R) -> Result<RewardParams> {
        match self {
            Prior::UniformSphere | Prior::UniformOrthant => {
                let fold = matches!(self, Prior::UniformOrthant);
                loop {
                    let v: Vec<f64> = (0..dim)
                        .map(|_| {
                            let z: f64 = rng.sample(StandardNormal);
                            if fold {
                                z.abs()
                            } else {
                                z
                            }
                        })
                        .collect();
                    if norm(&v) > 1e-12 {
                        return RewardParams::new(v);
                    }
                }
            }
            Prior::Discrete(hyps) => {
                if hyps.is_empty() {
                    return Err(contract("discrete prior needs at least one hypothesis"));
                }
                Ok(hyps[rng.random_range(0..hyps.len())].clone())
            }
        }
    }

    /// Symmetric proposal: tangent Gaussian step for continuous priors,
    /// uniform jump to another hypothesis for discrete ones.
    pub fn propose<R: Rng + ?Sized>(&self, theta: &RewardParams, scale: f64, rng: &mut R) -> RewardParams {
        match self {
            Prior::Discrete(hyps) if hyps.len() > 1 => {
                let here = hyps.iter().position(|h| h == theta);
                match here {
                    Some(i) => {
                        let j = rng.random_range(0..hyps.len() - 1);
                        hyps[if j >= i { j + 1 } else { j }].clone()
                    }
                    None => hyps[rng.random_range(0..hyps.len())].clone(),
                }
            }
            Prior::Discrete(_) => theta.clone(),
            _ => propose_theta(theta, scale, rng),
        }
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if let Prior::Discrete(hyps) = self {
            if hyps.is_empty() {
                return Err(contract("discrete prior needs at least one hypothesis"));
            }
            for h in hyps {
                check_dim(dim, h.dim())?;
            }
        }
        Ok(())
    }
}

/// `θ` plus a Gaussian step of std `scale` in the tangent space at `θ`,
/// projected back onto the unit sphere.
pub fn propose_theta<R: Rng + ?Sized>(theta: &RewardParams, scale: f64, rng: &mut R) -> RewardParams {
    if scale == 0.0 {
        return theta.clone();
    }
    let th = theta.as_slice();
    let z: Vec<f64> = th.iter().map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
    let radial = dot(&z, th);
    let moved: Vec<f64> = th.iter().zip(&z).map(|(t, zi)| t + zi - radial * t).collect();
    // the tangent step never shortens θ, so the norm is at least 1
    RewardParams::new(moved).expect("norm >= 1")
}

/// Output of one MCMC run.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    /// Kept states, after burn-in and thinning.
    pub samples: Vec<RewardParams>,
    /// Outer iteration index of each kept state.
    pub sample_iterations: Vec<usize>,
    /// Whether the proposal at that iteration was accepted.
    pub sample_accepted: Vec<bool>,
    /// Log acceptance ratio computed at that iteration.
    pub log_ratios: Vec<f64>,
    pub accepted: usize,
    pub proposals: usize,
    pub config: MhConfig,
}

impl Chain {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// One row per kept sample: `seed,iteration,theta_0..,accepted`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let dim = self.samples.first().map_or(0, RewardParams::dim);
        let mut header = vec!["seed".to_string(), "iteration".to_string()];
        header.extend((0..dim).map(|i| format!("theta_{i}")));
        header.push("accepted".into());
        let csv_err = |source| Error::Csv {
            path: "<chain>".into(),
            source,
        };
        w.write_record(&header).map_err(csv_err)?;
        for ((theta, it), acc) in self.samples.iter().zip(&self.sample_iterations).zip(&self.sample_accepted) {
            let mut row = vec![self.config.seed.to_string(), it.to_string()];
            row.extend(theta.as_slice().iter().map(|x| fmt_float(*x)));
            row.push(u8::from(*acc).to_string());
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush().map_err(|source| Error::Io {
            path: "<chain>".into(),
            source,
        })
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.write_csv(std::io::BufWriter::new(file)).map_err(|e| match e {
            Error::Csv { source, .. } => Error::Csv {
                path: path.to_path_buf(),
                source,
            },
            Error::Io { source, .. } => Error::Io {
                path: path.to_path_buf(),
                source,
            },
            other => other,
        })
    }
}

/// Shared outer loop: initialize from the prior, propose, accept with
/// probability `min{1, exp(log_ratio)}`, keep post-burn-in thinned states.
fn run_chain<I, L>(cfg: &MhConfig, prior: &Prior, dim: usize, mut init_ok: I, mut log_ratio: L) -> Result<Chain>
where
    I: FnMut(&RewardParams) -> Result<bool>,
    L: FnMut(usize, &RewardParams, &RewardParams) -> Result<f64>,
{
    cfg.validate()?;
    prior.check_dim(dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut theta = None;
    for _ in 0..INIT_ATTEMPTS {
        let candidate = prior.sample(dim, &mut rng)?;
        if init_ok(&candidate)? {
            theta = Some(candidate);
            break;
        }
    }
    let mut theta = theta.ok_or(Error::Initialization {
        attempts: INIT_ATTEMPTS,
    })?;

    let kept = cfg.kept_samples();
    let mut chain = Chain {
        samples: Vec::with_capacity(kept),
        sample_iterations: Vec::with_capacity(kept),
        sample_accepted: Vec::with_capacity(kept),
        log_ratios: Vec::with_capacity(kept),
        accepted: 0,
        proposals: 0,
        config: *cfg,
    };
    for i in 0..cfg.iterations {
        let proposal = prior.propose(&theta, cfg.proposal_scale, &mut rng);
        let u: f64 = rng.random();
        let ratio = if prior.log_density(&proposal) == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            log_ratio(i, &theta, &proposal)?
        };
        if ratio.is_nan() {
            return Err(contract(format!("acceptance ratio is NaN at iteration {i}")));
        }
        let accept = u.ln() < ratio;
        chain.proposals += 1;
        if accept {
            chain.accepted += 1;
            theta = proposal;
        }
        if cfg.keeps(i) {
            chain.samples.push(theta.clone());
            chain.sample_iterations.push(i);
            chain.sample_accepted.push(accept);
            chain.log_ratios.push(ratio);
        }
    }
    Ok(chain)
}

fn check_mode(data: &Dataset, dependent: bool) -> Result<()> {
    if data.dependence().is_dependent() != dependent {
        let want = if dependent { "dependent" } else { "independent" };
        return Err(contract(format!("expected a {want} dataset")));
    }
    Ok(())
}

fn validate_data(data: &Dataset, env: &dyn Environment) -> Result<()> {
    if let Some(initial) = data.initial() {
        env.validate_trajectory(initial)?;
    }
    data.trajectories().iter().try_for_each(|xi| env.validate_trajectory(xi))
}

/// Log of `exp(β ΣR(ξ_i, θ′)) Z(θ)^K P(θ′) / (exp(β ΣR(ξ_i, θ)) Z(θ′)^K P(θ))`.
#[allow(clippy::too_many_arguments)]
pub fn acceptance_ratio_independent(
    theta: &RewardParams,
    proposal: &RewardParams,
    data: &Dataset,
    beta: Rationality,
    strategy: NormalizerStrategy,
    env: &dyn Environment,
    prior: &Prior,
) -> Result<f64> {
    check_mode(data, false)?;
    let normalizer = Normalizer::for_trajectories(env, beta, strategy)?;
    ratio_with(theta, proposal, data, &normalizer, env, prior, data.len() as f64)
}

/// Dependent-mode counterpart of [`acceptance_ratio_independent`]: one
/// dataset-space normalizer over `space` and the displacement-penalized
/// dataset reward.
#[allow(clippy::too_many_arguments)]
pub fn acceptance_ratio_dependent(
    theta: &RewardParams,
    proposal: &RewardParams,
    data: &Dataset,
    beta: Rationality,
    strategy: NormalizerStrategy,
    env: &dyn Environment,
    prior: &Prior,
    space: &DatasetSpace,
) -> Result<f64> {
    check_mode(data, true)?;
    let normalizer = Normalizer::for_datasets(env, beta, strategy, space.clone())?;
    ratio_with(theta, proposal, data, &normalizer, env, prior, 1.0)
}

fn ratio_with(
    theta: &RewardParams,
    proposal: &RewardParams,
    data: &Dataset,
    normalizer: &Normalizer<'_>,
    env: &dyn Environment,
    prior: &Prior,
    power: f64,
) -> Result<f64> {
    if theta == proposal {
        return Ok(0.0);
    }
    let b = normalizer.beta();
    let reward = b * (dataset_reward(data, proposal, env)? - dataset_reward(data, theta, env)?);
    let log_z = if matches!(normalizer.strategy(), NormalizerStrategy::Ignore) {
        0.0
    } else {
        power * (normalizer.log_z(theta)? - normalizer.log_z(proposal)?)
    };
    Ok(reward + log_z + prior.log_density(proposal) - prior.log_density(theta))
}

/// MH posterior with a normalizer approximation. Dependent datasets use the
/// default dataset space; see [`mh_posterior_in`].
pub fn mh_posterior(
    data: &Dataset,
    beta: Rationality,
    strategy: NormalizerStrategy,
    env: &dyn Environment,
    cfg: &MhConfig,
    prior: &Prior,
) -> Result<Chain> {
    let space = default_space(env, data)?;
    mh_posterior_in(data, beta, strategy, env, cfg, prior, space.as_ref())
}

fn default_space(env: &dyn Environment, data: &Dataset) -> Result<Option<DatasetSpace>> {
    if data.dependence().is_dependent() {
        let hw = DatasetSpace::default_half_width(env);
        Ok(Some(DatasetSpace::for_dataset(env, data, hw)?))
    } else {
        Ok(None)
    }
}

/// MH posterior with a normalizer approximation; dependent datasets are
/// normalized over `space`.
pub fn mh_posterior_in(
    data: &Dataset,
    beta: Rationality,
    strategy: NormalizerStrategy,
    env: &dyn Environment,
    cfg: &MhConfig,
    prior: &Prior,
    space: Option<&DatasetSpace>,
) -> Result<Chain> {
    validate_data(data, env)?;
    let dependent = data.dependence().is_dependent();
    let (normalizer, power) = if dependent {
        let space = space.ok_or_else(|| contract("dependent datasets need a dataset space"))?;
        (Normalizer::for_datasets(env, beta, strategy, space.clone())?, 1.0)
    } else {
        (Normalizer::for_trajectories(env, beta, strategy)?, data.len() as f64)
    };
    let b = beta.get();
    let log_target = |theta: &RewardParams| -> Result<f64> {
        let z = normalizer.log_z(theta)?;
        Ok(b * dataset_reward(data, theta, env)? - power * z + prior.log_density(theta))
    };
    // the next state is either θ or θ′, so caching both avoids recomputing
    let mut cache: Vec<(RewardParams, f64)> = Vec::with_capacity(2);
    run_chain(
        cfg,
        prior,
        env.feature_dim(),
        |theta| Ok(log_target(theta)?.is_finite()),
        |_, theta, proposal| {
            let here = match cache.iter().find(|(t, _)| t == theta) {
                Some((_, v)) => *v,
                None => log_target(theta)?,
            };
            let there = log_target(proposal)?;
            cache.clear();
            cache.push((theta.clone(), here));
            cache.push((proposal.clone(), there));
            Ok(there - here)
        },
    )
}

/// One inner MH chain targeting `P(ξ | θ) ∝ exp(β R(ξ, θ))`, started from
/// a uniformly chosen element of `data`, with reflected Gaussian steps.
pub fn inner_sampler<R: Rng + ?Sized>(
    data: &Dataset,
    theta: &RewardParams,
    beta: Rationality,
    env: &dyn Environment,
    cfg: &InnerConfig,
    rng: &mut R,
) -> Result<Trajectory> {
    check_dim(env.feature_dim(), theta.dim())?;
    validate_data(data, env)?;
    Ok(inner_chain(data, theta.as_slice(), beta.get(), env, cfg, rng))
}

pub(crate) fn inner_chain<R: Rng + ?Sized>(
    data: &Dataset,
    theta: &[f64],
    beta: f64,
    env: &dyn Environment,
    cfg: &InnerConfig,
    rng: &mut R,
) -> Trajectory {
    let start = rng.random_range(0..data.len());
    let mut xi = data.trajectories()[start].clone();
    let bounds = env.state_box();
    let std: Vec<f64> = (0..bounds.dim()).map(|a| cfg.step_fraction * bounds.width(a)).collect();
    let mut reward = trajectory_reward_unchecked(&xi, theta, env);
    let mut candidate = xi.clone();
    for _ in 0..cfg.iterations {
        candidate.coords_mut().copy_from_slice(xi.coords());
        perturb_in_place(&mut candidate, &std, |_| bounds, rng);
        let r = trajectory_reward_unchecked(&candidate, theta, env);
        let u: f64 = rng.random();
        if u.ln() < beta * (r - reward) {
            std::mem::swap(&mut xi, &mut candidate);
            reward = r;
        }
    }
    xi
}

/// Inner chain over dependent datasets in `space`, targeting
/// `exp(β R(D, θ))` with the displacement-penalized reward. Starts at `data`.
pub fn inner_sampler_dataset<R: Rng + ?Sized>(
    data: &Dataset,
    theta: &RewardParams,
    beta: Rationality,
    env: &dyn Environment,
    space: &DatasetSpace,
    cfg: &InnerConfig,
    rng: &mut R,
) -> Result<Dataset> {
    check_dim(env.feature_dim(), theta.dim())?;
    check_mode(data, true)?;
    if !space.contains(data) {
        return Err(contract("dataset lies outside its dataset space"));
    }
    Ok(inner_dataset_chain(data, theta.as_slice(), beta.get(), env, space, cfg, rng))
}

pub(crate) fn dependent_reward(initial: &Trajectory, corrections: &[Trajectory], theta: &[f64], env: &dyn Environment) -> f64 {
    let mut prev = initial;
    let mut total = 0.0;
    for xi in corrections {
        total += trajectory_reward_unchecked(xi, theta, env)
            - crate::model::squared_distance(xi.coords(), prev.coords());
        prev = xi;
    }
    total
}

fn inner_dataset_chain<R: Rng + ?Sized>(
    data: &Dataset,
    theta: &[f64],
    beta: f64,
    env: &dyn Environment,
    space: &DatasetSpace,
    cfg: &InnerConfig,
    rng: &mut R,
) -> Dataset {
    let initial = space.initial();
    let bounds = env.state_box();
    let std: Vec<f64> = (0..bounds.dim()).map(|a| cfg.step_fraction * bounds.width(a)).collect();
    let mut current = data.trajectories().to_vec();
    let mut reward = dependent_reward(initial, &current, theta, env);
    let mut candidate = current.clone();
    for _ in 0..cfg.iterations {
        for (c, x) in candidate.iter_mut().zip(&current) {
            c.coords_mut().copy_from_slice(x.coords());
            perturb_in_place(c, &std, |t| space.waypoint_box(t), rng);
        }
        let r = dependent_reward(initial, &candidate, theta, env);
        let u: f64 = rng.random();
        if u.ln() < beta * (r - reward) {
            std::mem::swap(&mut current, &mut candidate);
            reward = r;
        }
    }
    Dataset::dependent(initial.clone(), current).expect("shape preserved")
}

/// Log acceptance ratio of the exchange move `θ → θ′` given auxiliary
/// trajectories drawn at `θ′`:
/// `β Σ_i [R(ξ_i, θ′) − R(ξ_i, θ)] + β (K/n) Σ_j [R(ξ′_j, θ) − R(ξ′_j, θ′)]`
/// plus the prior log-ratio. A single auxiliary draw is weighted by `K`;
/// `K` draws enter once each. No normalizer is evaluated.
pub fn double_mh_acceptance(
    theta: &RewardParams,
    proposal: &RewardParams,
    auxiliary: &[Trajectory],
    data: &Dataset,
    beta: Rationality,
    env: &dyn Environment,
    prior: &Prior,
) -> Result<f64> {
    check_mode(data, false)?;
    check_dim(env.feature_dim(), theta.dim())?;
    check_dim(env.feature_dim(), proposal.dim())?;
    if auxiliary.is_empty() {
        return Err(contract("double MH needs at least one auxiliary draw"));
    }
    validate_data(data, env)?;
    auxiliary.iter().try_for_each(|xi| env.validate_trajectory(xi))?;
    if theta == proposal {
        return Ok(0.0);
    }
    Ok(exchange_ratio(theta.as_slice(), proposal.as_slice(), auxiliary, data, beta.get(), env)
        + prior.log_density(proposal)
        - prior.log_density(theta))
}

fn exchange_ratio(
    theta: &[f64],
    proposal: &[f64],
    auxiliary: &[Trajectory],
    data: &Dataset,
    beta: f64,
    env: &dyn Environment,
) -> f64 {
    let diff = |xi: &Trajectory| {
        trajectory_reward_unchecked(xi, proposal, env) - trajectory_reward_unchecked(xi, theta, env)
    };
    let observed: f64 = data.trajectories().iter().map(diff).sum();
    let weight = data.len() as f64 / auxiliary.len() as f64;
    let aux: f64 = auxiliary.iter().map(diff).sum();
    beta * (observed - weight * aux)
}

/// Dependent-mode exchange ratio with an auxiliary dataset drawn at `θ′`.
/// The displacement penalty does not depend on `θ` and cancels.
pub fn double_mh_acceptance_dependent(
    theta: &RewardParams,
    proposal: &RewardParams,
    auxiliary: &Dataset,
    data: &Dataset,
    beta: Rationality,
    env: &dyn Environment,
    prior: &Prior,
) -> Result<f64> {
    check_mode(data, true)?;
    check_mode(auxiliary, true)?;
    if theta == proposal {
        return Ok(0.0);
    }
    let r = |d: &Dataset, t: &RewardParams| dataset_reward(d, t, env);
    let b = beta.get();
    Ok(b * (r(data, proposal)? - r(data, theta)?) + b * (r(auxiliary, theta)? - r(auxiliary, proposal)?)
        + prior.log_density(proposal)
        - prior.log_density(theta))
}

/// Double MH posterior. Dependent datasets use the default dataset space;
/// see [`double_mh_posterior_in`].
pub fn double_mh_posterior(
    data: &Dataset,
    beta: Rationality,
    env: &dyn Environment,
    outer: &MhConfig,
    inner: &InnerConfig,
    prior: &Prior,
) -> Result<Chain> {
    let space = default_space(env, data)?;
    double_mh_posterior_in(data, beta, env, outer, inner, prior, space.as_ref())
}

/// Double MH posterior: every proposal `θ′` launches inner chains at `θ′`
/// (seeded from the outer seed and iteration index) whose end states act as
/// auxiliary data in the exchange ratio.
pub fn double_mh_posterior_in(
    data: &Dataset,
    beta: Rationality,
    env: &dyn Environment,
    outer: &MhConfig,
    inner: &InnerConfig,
    prior: &Prior,
    space: Option<&DatasetSpace>,
) -> Result<Chain> {
    inner.validate()?;
    validate_data(data, env)?;
    let b = beta.get();
    let seed = outer.seed;
    if data.dependence().is_dependent() {
        let space = space.ok_or_else(|| contract("dependent datasets need a dataset space"))?;
        if !space.contains(data) {
            return Err(contract("dataset lies outside its dataset space"));
        }
        return run_chain(outer, prior, env.feature_dim(), |_| Ok(true), |i, theta, proposal| {
            let mut rng = inner_rng(seed, i);
            let aux = inner_dataset_chain(data, proposal.as_slice(), b, env, space, inner, &mut rng);
            let (t, p) = (theta.as_slice(), proposal.as_slice());
            let observed = dataset_reward_linear(data, p, env) - dataset_reward_linear(data, t, env);
            let auxiliary = dataset_reward_linear(&aux, t, env) - dataset_reward_linear(&aux, p, env);
            Ok(b * (observed + auxiliary))
        });
    }
    run_chain(outer, prior, env.feature_dim(), |_| Ok(true), |i, theta, proposal| {
        let mut rng = inner_rng(seed, i);
        let draws = match inner.auxiliary {
            AuxiliaryDraws::PerObservation => data.len(),
            AuxiliaryDraws::Shared => 1,
        };
        let aux: Vec<Trajectory> = (0..draws)
            .map(|_| inner_chain(data, proposal.as_slice(), b, env, inner, &mut rng))
            .collect();
        Ok(exchange_ratio(theta.as_slice(), proposal.as_slice(), &aux, data, b, env))
    })
}

/// `Σ_i R(ξ_i, θ)` without the displacement penalty.
fn dataset_reward_linear(data: &Dataset, theta: &[f64], env: &dyn Environment) -> f64 {
    data.trajectories()
        .iter()
        .map(|xi| trajectory_reward_unchecked(xi, theta, env))
        .sum()
}

/// Extrinsic mean of the chain: coordinate-wise mean projected back onto
/// the unit sphere.
pub fn posterior_mean(chain: &Chain) -> Result<RewardParams> {
    let first = chain
        .samples
        .first()
        .ok_or_else(|| contract("posterior mean of an empty chain"))?;
    let mut mean = vec![0.0; first.dim()];
    for s in &chain.samples {
        for (m, w) in mean.iter_mut().zip(s.as_slice()) {
            *m += w;
        }
    }
    let n = chain.samples.len() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    if norm(&mean) < 1e-9 {
        return Err(Error::DegenerateEstimate(
            "samples average to the zero vector".into(),
        ));
    }
    RewardParams::new(mean)
}
