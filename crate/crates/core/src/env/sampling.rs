use rand::Rng;
use rand_distr::StandardNormal;

use super::{Environment, StateBox, StateGrid};
use crate::error::{contract, Error, Result};
use crate::model::{Dataset, RewardParams, Trajectory};

/// Folds `x` back into `[lo, hi]` by mirror reflection at the walls.
///
/// A Gaussian step followed by reflection is a symmetric proposal on the
/// box, so it cancels in Metropolis–Hastings ratios.
#[inline]
pub fn reflect_into(x: f64, lo: f64, hi: f64) -> f64 {
    if x >= lo && x <= hi {
        return x;
    }
    let width = hi - lo;
    if width <= 0.0 {
        return lo;
    }
    let y = (x - lo).rem_euclid(2.0 * width);
    let y = if y > width { 2.0 * width - y } else { y };
    (lo + y).clamp(lo, hi)
}

/// Every waypoint i.i.d. uniform in the state box.
pub fn sample_uniform_trajectory<R: Rng + ?Sized>(env: &dyn Environment, rng: &mut R) -> Trajectory {
    let bounds = env.state_box();
    let dim = bounds.dim();
    let coords = (0..env.horizon() * dim)
        .map(|i| {
            let axis = i % dim;
            bounds.lo()[axis] + bounds.width(axis) * rng.random::<f64>()
        })
        .collect();
    Trajectory::from_flat(dim, coords).expect("horizon >= 1")
}

/// Adds `N(0, scale²)` noise to every coordinate, reflecting at the bounds.
pub fn perturb_trajectory<R: Rng + ?Sized>(
    xi: &Trajectory,
    scale: f64,
    env: &dyn Environment,
    rng: &mut R,
) -> Result<Trajectory> {
    if !(scale.is_finite() && scale >= 0.0) {
        return Err(contract(format!("perturbation scale must be >= 0, got {scale}")));
    }
    env.validate_trajectory(xi)?;
    let mut out = xi.clone();
    let std = vec![scale; env.state_dim()];
    perturb_in_place(&mut out, &std, |_| env.state_box(), rng);
    Ok(out)
}

/// Perturbs every coordinate with axis-specific std, reflecting each
/// waypoint into the box returned by `bounds_of(t)`.
pub(crate) fn perturb_in_place<'a, R, F>(xi: &mut Trajectory, std: &[f64], bounds_of: F, rng: &mut R)
where
    R: Rng + ?Sized,
    F: Fn(usize) -> &'a StateBox,
{
    let dim = xi.state_dim();
    for (i, c) in xi.coords_mut().iter_mut().enumerate() {
        let axis = i % dim;
        if std[axis] == 0.0 {
            continue;
        }
        let z: f64 = rng.sample(StandardNormal);
        let b = bounds_of(i / dim);
        *c = reflect_into(*c + std[axis] * z, b.lo()[axis], b.hi()[axis]);
    }
}

/// The space of dependent datasets: `corrections` trajectories, each waypoint
/// within `half_width` of the initial trajectory's waypoint (and inside the
/// environment's bounds).
#[derive(Debug, Clone)]
pub struct DatasetSpace {
    initial: Trajectory,
    corrections: usize,
    half_width: f64,
    boxes: Vec<StateBox>,
}

impl DatasetSpace {
    pub fn new(
        env: &dyn Environment,
        initial: Trajectory,
        corrections: usize,
        half_width: f64,
    ) -> Result<Self> {
        if corrections == 0 {
            return Err(contract("a dependent dataset needs at least one correction"));
        }
        if !(half_width.is_finite() && half_width >= 0.0) {
            return Err(contract(format!("half-width must be >= 0, got {half_width}")));
        }
        env.validate_trajectory(&initial)?;
        let bounds = env.state_box();
        let boxes = initial
            .states()
            .map(|s| {
                let lo = s
                    .iter()
                    .zip(bounds.lo())
                    .map(|(x, l)| (x - half_width).max(*l))
                    .collect();
                let hi = s
                    .iter()
                    .zip(bounds.hi())
                    .map(|(x, h)| (x + half_width).min(*h))
                    .collect();
                StateBox::new(lo, hi)
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            initial,
            corrections,
            half_width,
            boxes,
        })
    }

    /// Half-width used when none is configured, as a fraction of the
    /// narrowest state axis.
    pub const DEFAULT_HALF_WIDTH_FRACTION: f64 = 1.0;

    pub fn default_half_width(env: &dyn Environment) -> f64 {
        let b = env.state_box();
        let narrowest = (0..b.dim()).map(|a| b.width(a)).fold(f64::INFINITY, f64::min);
        Self::DEFAULT_HALF_WIDTH_FRACTION * narrowest
    }

    /// Whether every correction of `data` lies in this space.
    pub fn contains(&self, data: &Dataset) -> bool {
        data.initial() == Some(&self.initial)
            && data.len() == self.corrections
            && data.trajectories().iter().all(|xi| {
                xi.len() == self.boxes.len() && xi.states().zip(&self.boxes).all(|(s, b)| b.contains(s))
            })
    }

    /// Dataset space matching the shape of a dependent dataset.
    pub fn for_dataset(env: &dyn Environment, data: &Dataset, half_width: f64) -> Result<Self> {
        let initial = data
            .initial()
            .ok_or_else(|| contract("dataset space needs a dependent dataset"))?;
        Self::new(env, initial.clone(), data.len(), half_width)
    }

    pub fn initial(&self) -> &Trajectory {
        &self.initial
    }

    pub fn corrections(&self) -> usize {
        self.corrections
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Admissible box for waypoint `t` of every correction.
    pub fn waypoint_box(&self, t: usize) -> &StateBox {
        &self.boxes[t]
    }

    pub fn waypoint_boxes(&self) -> &[StateBox] {
        &self.boxes
    }

    /// Log-measure of the whole dataset space.
    pub fn log_volume(&self) -> f64 {
        self.corrections as f64 * self.boxes.iter().map(StateBox::log_volume).sum::<f64>()
    }

    /// One uniform draw from the dataset space.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Dataset {
        let dim = self.initial.state_dim();
        let corrections = (0..self.corrections)
            .map(|_| {
                let coords = self
                    .boxes
                    .iter()
                    .flat_map(|b| (0..dim).map(move |a| (b, a)))
                    .map(|(b, a)| b.lo()[a] + b.width(a) * rng.random::<f64>())
                    .collect();
                Trajectory::from_flat(dim, coords).expect("non-empty")
            })
            .collect();
        Dataset::dependent(self.initial.clone(), corrections).expect("shapes agree")
    }
}

/// `K` corrections, each the initial trajectory with i.i.d. uniform
/// waypoint perturbations of the given half-width.
pub fn sample_dependent_dataset<R: Rng + ?Sized>(
    env: &dyn Environment,
    initial: &Trajectory,
    corrections: usize,
    half_width: f64,
    rng: &mut R,
) -> Result<Dataset> {
    Ok(DatasetSpace::new(env, initial.clone(), corrections, half_width)?.sample(rng))
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Golden-section maximization of a unimodal `f` on `[a, b]`, also
/// checking both endpoints.
pub(crate) fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let (fa, fb) = (f(a), f(b));
    let mut best = if fa >= fb { (a, fa) } else { (b, fb) };
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d);
        }
    }
    for (x, v) in [(c, fc), (d, fd)] {
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

/// Coordinate-wise golden-section polish of `x` inside `bounds`, searching
/// `±radius[axis]` around the current point. Never returns a worse point.
pub(crate) fn refine_coordinates<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x: &mut [f64],
    radius: &[f64],
    lo: &[f64],
    hi: &[f64],
    sweeps: usize,
) -> f64 {
    let mut best = f(x);
    for _ in 0..sweeps {
        let before = best;
        for axis in 0..x.len() {
            if radius[axis] <= 0.0 || hi[axis] <= lo[axis] {
                continue;
            }
            let a = (x[axis] - radius[axis]).max(lo[axis]);
            let b = (x[axis] + radius[axis]).min(hi[axis]);
            let mut probe = x.to_vec();
            let (arg, value) = golden_max(
                |v| {
                    probe[axis] = v;
                    f(&probe)
                },
                a,
                b,
                1e-10,
            );
            if value > best {
                best = value;
                x[axis] = arg;
            }
        }
        if best - before <= 1e-15 * before.abs().max(1.0) {
            break;
        }
    }
    best
}

/// The state maximizing `θ · φ(s)`: closed form when the environment has
/// one, otherwise grid argmax polished by golden-section steps.
pub fn optimal_state(theta: &RewardParams, env: &dyn Environment) -> Result<Vec<f64>> {
    let grid = StateGrid::new(env, env.quadrature_resolution())?;
    optimal_state_on(theta, env, &grid)
}

pub(crate) fn optimal_state_on(theta: &RewardParams, env: &dyn Environment, grid: &StateGrid) -> Result<Vec<f64>> {
    if theta.dim() != env.feature_dim() {
        return Err(Error::DimensionMismatch {
            expected: env.feature_dim(),
            actual: theta.dim(),
        });
    }
    if let Some(s) = env.closed_form_argmax(theta.as_slice()) {
        return Ok(s);
    }
    let mut x = grid.node(grid.argmax(theta.as_slice())).to_vec();
    let b = env.state_box();
    let reward = |s: &[f64]| crate::model::state_reward_unchecked(s, theta.as_slice(), env);
    refine_coordinates(reward, &mut x, grid.steps(), b.lo(), b.hi(), 8);
    Ok(x)
}

/// `argmax_ξ R(ξ, θ)`. Rewards are sums of per-state terms, so every
/// waypoint sits at the best single state.
pub fn optimal_trajectory(theta: &RewardParams, env: &dyn Environment) -> Result<Trajectory> {
    let s = optimal_state(theta, env)?;
    Trajectory::from_states(vec![s; env.horizon()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{CupEnv, PathEnv, SphereEnv};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn reflection_stays_in_box() {
        for x in [-3.7, -1.0, -0.2, 0.0, 0.5, 1.0, 1.2, 2.9, 10.3] {
            let y = reflect_into(x, 0.0, 1.0);
            assert!((0.0..=1.0).contains(&y), "{x} -> {y}");
        }
        assert!((reflect_into(1.25, 0.0, 1.0) - 0.75).abs() < 1e-15);
        assert!((reflect_into(-0.25, 0.0, 1.0) - 0.25).abs() < 1e-15);
        assert_eq!(reflect_into(5.0, 2.0, 2.0), 2.0);
    }

    #[test]
    fn uniform_path_waypoints_in_bounds() {
        let env = PathEnv::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let xi = sample_uniform_trajectory(&env, &mut rng);
            env.validate_trajectory(&xi).unwrap();
        }
    }

    #[test]
    fn zero_width_box_has_one_trajectory() {
        let env = PathEnv::builder()
            .waypoint_dim(1)
            .bounds(0.0, 1.0)
            .build()
            .unwrap();
        let initial = Trajectory::from_flat(1, vec![0.3; 5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = sample_dependent_dataset(&env, &initial, 3, 0.0, &mut rng).unwrap();
        assert!(d.trajectories().iter().all(|x| *x == initial));
    }

    #[test]
    fn zero_scale_perturbation_is_identity() {
        let env = PathEnv::default();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let xi = sample_uniform_trajectory(&env, &mut rng);
        assert_eq!(perturb_trajectory(&xi, 0.0, &env, &mut rng).unwrap(), xi);
    }

    #[test]
    fn perturbations_stay_in_bounds() {
        let env = CupEnv::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xi = CupEnv::demo(0.01).unwrap();
        for _ in 0..5000 {
            let p = perturb_trajectory(&xi, 0.5, &env, &mut rng).unwrap();
            env.validate_trajectory(&p).unwrap();
        }
    }

    #[test]
    fn dependent_draws_stay_near_initial() {
        let env = PathEnv::default();
        let initial = env.initial_trajectory();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let d = sample_dependent_dataset(&env, &initial, 3, 0.25, &mut rng).unwrap();
            assert_eq!(d.len(), 3);
            for xi in d.trajectories() {
                for (a, b) in xi.coords().iter().zip(initial.coords()) {
                    assert!((a - b).abs() <= 0.25 + 1e-15);
                    assert!((0.0..=1.0).contains(a));
                }
            }
        }
    }

    #[test]
    fn cup_optimal_angles() {
        let env = CupEnv::default();
        let up = optimal_trajectory(&CupEnv::vertical(), &env).unwrap();
        let flat = optimal_trajectory(&CupEnv::horizontal(), &env).unwrap();
        assert!((up.state(0)[0] - FRAC_PI_2).abs() < 1e-8);
        assert!(flat.state(0)[0].abs() < 1e-8);
    }

    #[test]
    fn sphere_optimal_aligns_with_theta() {
        let env = SphereEnv::default();
        let xi = optimal_trajectory(&RewardParams::new(vec![1.0, 0.0]).unwrap(), &env).unwrap();
        assert!(xi.state(0)[0].abs() < 1e-12);
    }

    #[test]
    fn path_optimum_matches_closed_form() {
        // goal (0.8, 0.8), costs a‖p-g‖²/1.28 + b·y  ->  x = 0.8, y = 0.8 - 0.64 b/a
        let env = PathEnv::default();
        let theta = RewardParams::new(vec![1.0, 0.5]).unwrap();
        let s = optimal_state(&theta, &env).unwrap();
        let ratio = theta.as_slice()[1] / theta.as_slice()[0];
        assert!((s[0] - 0.8).abs() < 1e-7, "{s:?}");
        assert!((s[1] - (0.8 - 0.64 * ratio)).abs() < 1e-7, "{s:?}");
    }
}
