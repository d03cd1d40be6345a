//! First-order oracles: exact gradients or gradients perturbed by seeded Gaussian noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DualVector, PrimalPoint};
use crate::problems::Problem;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum NoiseModel {
    Exact,
    /// Isotropic Gaussian noise with per-coordinate standard deviation `sigma`.
    Gaussian { sigma: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub noise: NoiseModel,
    pub seed: u64,
}

impl OracleConfig {
    pub fn exact() -> Self {
        Self { noise: NoiseModel::Exact, seed: 0 }
    }

    /// `sigma = 0` yields the exact oracle.
    pub fn gaussian(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::Config(format!("noise scale must be non-negative, got {sigma}")));
        }
        let noise = if sigma == 0.0 { NoiseModel::Exact } else { NoiseModel::Gaussian { sigma } };
        Ok(Self { noise, seed })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn sigma(&self) -> f64 {
        match self.noise {
            NoiseModel::Exact => 0.0,
            NoiseModel::Gaussian { sigma } => sigma,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.sigma() == 0.0
    }
}

/// A seeded oracle with a query counter. Single owner; one per run.
#[derive(Clone, Debug)]
pub struct OracleState {
    config: OracleConfig,
    rng: ChaCha8Rng,
    queries: u64,
}

impl OracleState {
    pub fn new(config: OracleConfig) -> Self {
        Self { config, rng: ChaCha8Rng::seed_from_u64(config.seed), queries: 0 }
    }

    pub fn config(&self) -> &OracleConfig {
        &self.config
    }

    pub fn query_count(&self) -> u64 {
        self.queries
    }

    /// `g(point) + ξ`, with `ξ` drawn at query time.
    pub fn query(&mut self, problem: &Problem, point: &[f64]) -> Result<DualVector> {
        let mut g = problem.gradient(point);
        self.queries += 1;
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput(format!("gradient field at {point:?}")));
        }
        if let NoiseModel::Gaussian { sigma } = self.config.noise {
            for v in &mut g {
                let z: f64 = StandardNormal.sample(&mut self.rng);
                *v += sigma * z;
            }
        }
        Ok(DualVector(g))
    }
}

/// Operative second-moment bound `M²`: the supremum of `‖g(x)‖²` over a seeded sample
/// (box/simplex vertices and centers included) plus `dim·σ²`.
/// Measured in the Euclidean pairing.
pub fn bound_report(state: &OracleState, problem: &Problem, samples: usize) -> f64 {
    let set = problem.set();
    let mut rng = ChaCha8Rng::seed_from_u64(state.config.seed);
    let mut points: Vec<PrimalPoint> = set.vertices(4096).unwrap_or_default();
    points.push(set.center());
    points.extend((0..samples).map(|_| set.sample(&mut rng)));
    let sup = points
        .iter()
        .map(|x| problem.gradient(x).iter().map(|v| v * v).sum::<f64>())
        .fold(0.0, f64::max);
    let sigma = state.config.sigma();
    sup + problem.dim() as f64 * sigma * sigma
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{FeasibleBlock, ProductSet};
    use crate::problems::matching_pennies;

    fn constant_field() -> Problem {
        let set = ProductSet::two_player(
            FeasibleBlock::cube(1, 0.0, 1.0).unwrap(),
            FeasibleBlock::cube(1, 0.0, 1.0).unwrap(),
        )
        .unwrap();
        Problem::new("const", set, |_| 0.0, |_| vec![1.0, 0.0])
    }

    #[test]
    fn exact_is_passthrough() {
        let p = matching_pennies();
        let mut s = OracleState::new(OracleConfig::exact());
        assert_eq!(s.query(&p, &[0.9, 0.5]).unwrap().0, vec![0.0, -0.4]);
        assert_eq!(s.query_count(), 1);
    }

    #[test]
    fn zero_sigma_matches_exact() {
        let p = matching_pennies();
        let mut a = OracleState::new(OracleConfig::exact());
        let mut b = OracleState::new(OracleConfig::gaussian(0.0, 5).unwrap());
        for i in 0..1000 {
            let x = [i as f64 / 1000.0, 1.0 - i as f64 / 1000.0];
            assert_eq!(a.query(&p, &x).unwrap(), b.query(&p, &x).unwrap());
        }
        assert_eq!(b.query_count(), 1000);
    }

    #[test]
    fn same_seed_same_stream() {
        let p = matching_pennies();
        let cfg = OracleConfig::gaussian(0.3, 42).unwrap();
        let (mut a, mut b) = (OracleState::new(cfg), OracleState::new(cfg));
        for _ in 0..100 {
            let (x, y) = (a.query(&p, &[0.2, 0.4]).unwrap(), b.query(&p, &[0.2, 0.4]).unwrap());
            assert_eq!(x.0.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), y.0.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        }
        let mut c = OracleState::new(cfg.with_seed(43));
        assert_ne!(c.query(&p, &[0.2, 0.4]).unwrap(), OracleState::new(cfg).query(&p, &[0.2, 0.4]).unwrap());
    }

    #[test]
    fn non_finite_gradient_is_rejected() {
        let set = ProductSet::two_player(
            FeasibleBlock::cube(1, 0.0, 1.0).unwrap(),
            FeasibleBlock::cube(1, 0.0, 1.0).unwrap(),
        )
        .unwrap();
        let p = Problem::new("bad", set, |_| 0.0, |_| vec![f64::NAN, 0.0]);
        let mut s = OracleState::new(OracleConfig::exact());
        assert!(matches!(s.query(&p, &[0.1, 0.1]), Err(Error::NonFiniteInput(_))));
    }

    #[test]
    fn negative_sigma_rejected() {
        assert!(OracleConfig::gaussian(-0.1, 0).is_err());
        assert!(OracleConfig::gaussian(0.0, 0).unwrap().is_exact());
    }

    #[test]
    fn bound_report_examples() {
        let p = matching_pennies();
        let exact = OracleState::new(OracleConfig::exact());
        // sup of (x2−½)² + (x1−½)² on the unit square, attained at the corners
        assert!((bound_report(&exact, &p, 100) - 0.5).abs() < 1e-15);
        let noisy = OracleState::new(OracleConfig::gaussian(1.0, 0).unwrap());
        assert!((bound_report(&noisy, &constant_field(), 10) - 3.0).abs() < 1e-15);
    }
}
