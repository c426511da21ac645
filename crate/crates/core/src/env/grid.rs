use super::{Environment, StateBox};
use crate::error::{Error, Result};

/// Largest number of grid nodes a state grid may hold.
const MAX_NODES: usize = 4_000_000;

/// Composite-midpoint grid over an environment's state box with the
/// per-state features precomputed at every node.
#[derive(Debug, Clone)]
pub struct StateGrid {
    state_dim: usize,
    feature_dim: usize,
    nodes: Vec<f64>,
    features: Vec<f64>,
    log_cell: f64,
    steps: Vec<f64>,
}

impl StateGrid {
    /// Grid with `resolution` midpoints along every non-degenerate axis.
    pub fn new(env: &dyn Environment, resolution: usize) -> Result<Self> {
        Self::over_box(env, env.state_box(), resolution)
    }

    /// Grid over a sub-box of the environment's states.
    pub fn over_box(env: &dyn Environment, bounds: &StateBox, resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::Config(format!(
                "quadrature resolution must be at least 2 points per axis, got {resolution}"
            )));
        }
        let dim = bounds.dim();
        let counts: Vec<usize> = (0..dim)
            .map(|i| if bounds.width(i) > 0.0 { resolution } else { 1 })
            .collect();
        let total = counts
            .iter()
            .try_fold(1usize, |acc, c| acc.checked_mul(*c).filter(|n| *n <= MAX_NODES))
            .ok_or_else(|| {
                Error::Config(format!(
                    "state grid of {resolution}^{dim} nodes exceeds the {MAX_NODES}-node limit"
                ))
            })?;
        let steps: Vec<f64> = (0..dim)
            .map(|i| bounds.width(i) / counts[i] as f64)
            .collect();
        let log_cell = steps.iter().filter(|h| **h > 0.0).map(|h| h.ln()).sum();

        let feature_dim = env.feature_dim();
        let mut nodes = Vec::with_capacity(total * dim);
        let mut features = vec![0.0; total * feature_dim];
        let mut index = vec![0usize; dim];
        let mut state = vec![0.0; dim];
        for n in 0..total {
            for i in 0..dim {
                state[i] = bounds.lo()[i] + (index[i] as f64 + 0.5) * steps[i];
                if counts[i] == 1 {
                    state[i] = bounds.lo()[i];
                }
            }
            nodes.extend_from_slice(&state);
            env.add_state_features(&state, &mut features[n * feature_dim..(n + 1) * feature_dim]);
            // odometer, last axis fastest
            for i in (0..dim).rev() {
                index[i] += 1;
                if index[i] < counts[i] {
                    break;
                }
                index[i] = 0;
            }
        }
        Ok(Self {
            state_dim: dim,
            feature_dim,
            nodes,
            features,
            log_cell,
            steps,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len() / self.state_dim
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.state_dim..(i + 1) * self.state_dim]
    }

    pub fn features(&self, i: usize) -> &[f64] {
        &self.features[i * self.feature_dim..(i + 1) * self.feature_dim]
    }

    /// Log of the measure of one grid cell.
    pub fn log_cell(&self) -> f64 {
        self.log_cell
    }

    /// Cell widths per axis (zero for degenerate axes).
    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    /// `θ · φ` at every node.
    pub fn rewards(&self, theta: &[f64]) -> Vec<f64> {
        self.features
            .chunks_exact(self.feature_dim)
            .map(|phi| phi.iter().zip(theta).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `log ∫ exp(scale · θ·φ(s)) ds` by the midpoint rule.
    pub fn log_integral(&self, theta: &[f64], scale: f64) -> f64 {
        let mut max = f64::NEG_INFINITY;
        let values: Vec<f64> = self
            .features
            .chunks_exact(self.feature_dim)
            .map(|phi| {
                let v = scale * phi.iter().zip(theta).map(|(a, b)| a * b).sum::<f64>();
                max = max.max(v);
                v
            })
            .collect();
        let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
        max + sum.ln() + self.log_cell
    }

    /// Index of the best node for `θ`; ties go to the lowest index.
    pub fn argmax(&self, theta: &[f64]) -> usize {
        let mut best = 0;
        let mut best_value = f64::NEG_INFINITY;
        for (i, phi) in self.features.chunks_exact(self.feature_dim).enumerate() {
            let v: f64 = phi.iter().zip(theta).map(|(a, b)| a * b).sum();
            if v > best_value {
                best_value = v;
                best = i;
            }
        }
        best
    }
}
