//! Bayesian inference of linear reward parameters from human demonstrations
//! and corrections under a noisily rational (Boltzmann) human model.
//!
//! The likelihood `exp(β R(ξ, θ)) / Z(θ)` has an intractable normalizer.
//! [`normalizer`] approximates it, [`inference`] samples posteriors either
//! with such an approximation or with a double Metropolis-Hastings chain that
//! never evaluates it.

pub mod env;
pub mod error;
pub mod experiments;
pub mod inference;
pub mod metrics;
pub mod model;
pub mod normalizer;
pub mod output;
pub mod teacher;

pub use error::{Error, Result};
pub use model::{Dataset, Dependence, FeatureVector, RewardParams, Trajectory};
