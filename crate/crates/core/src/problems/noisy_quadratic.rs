use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::objective::{ComponentFunction, FiniteSumObjective};
use crate::{Error, Matrix, Result, Vector};

/// Convex quadratic base `½xᵀQx + qᵀx` plus frozen squared-noise terms.
///
/// With uniform weights the component split is
/// `fᵢ(x) = f_base(x) + N·εᵢ²‖x‖²`, so the average over all components is
/// `f_base(x) + Σ εᵢ² ‖x‖²`.
#[derive(Debug, Clone)]
pub struct NoisyQuadratic {
    base_q: Matrix,
    base_lin: Vector,
    sigma: f64,
    eps: Vec<f64>,
    /// N·εᵢ², precomputed.
    scaled_sq: Vec<f64>,
}

impl NoisyQuadratic {
    pub fn new(base_q: Matrix, base_lin: Vector, sigma: f64, eps: Vec<f64>) -> Result<Self> {
        let n = base_lin.len();
        if base_q.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "Q is {:?} but q has length {n}",
                base_q.shape()
            )));
        }
        if eps.is_empty() {
            return Err(Error::DimensionMismatch("at least one noise term required".into()));
        }
        if !(sigma >= 0.0) {
            return Err(Error::ConfigInvalid(format!("sigma must be nonnegative, got {sigma}")));
        }
        let count = eps.len() as f64;
        let scaled_sq = eps.iter().map(|e| count * e * e).collect();
        // Only the symmetric part of Q matters.
        let base_q = (&base_q + base_q.transpose()) * 0.5;
        Ok(Self { base_q, base_lin, sigma, eps, scaled_sq })
    }

    /// Random instance: `Q = GᵀG/n` with Gaussian `G`, Gaussian `q`, and
    /// `εᵢ = σ·ξᵢ` with standard normal `ξᵢ`. The same seed gives the same
    /// `ξ` for every `σ`.
    pub fn generate(n: usize, components: usize, sigma: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
        let g = Matrix::from_fn(n, n, |_, _| normal());
        let q = Vector::from_fn(n, |_, _| normal());
        let eps = (0..components).map(|_| sigma * normal()).collect();
        let base_q = g.transpose() * g / n as f64;
        Self::new(base_q, q, sigma, eps).expect("generated dimensions are consistent")
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn noise(&self) -> &[f64] {
        &self.eps
    }

    pub fn base_value(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&(&self.base_q * x)) + self.base_lin.dot(x)
    }

    pub fn base_gradient(&self, x: &Vector) -> Vector {
        &self.base_q * x + &self.base_lin
    }

    /// `(fᵢ(x), ∇fᵢ(x))`.
    pub fn component(&self, i: usize, x: &Vector) -> (f64, Vector) {
        (self.value(i, x), self.gradient(i, x))
    }

    pub fn into_objective(self) -> FiniteSumObjective {
        FiniteSumObjective::uniform(Arc::new(self)).expect("at least one component")
    }
}

impl ComponentFunction for NoisyQuadratic {
    fn dim(&self) -> usize {
        self.base_lin.len()
    }

    fn len(&self) -> usize {
        self.eps.len()
    }

    fn value(&self, i: usize, x: &Vector) -> f64 {
        self.base_value(x) + self.scaled_sq[i] * x.norm_squared()
    }

    fn gradient(&self, i: usize, x: &Vector) -> Vector {
        let mut g = self.base_gradient(x);
        g.axpy(2.0 * self.scaled_sq[i], x, 1.0);
        g
    }

    fn weighted_value(&self, weights: &[f64], x: &Vector) -> f64 {
        let noise: f64 = weights.iter().zip(&self.scaled_sq).map(|(w, s)| w * s).sum();
        self.base_value(x) + noise * x.norm_squared()
    }

    fn weighted_gradient(&self, weights: &[f64], x: &Vector) -> Vector {
        let noise: f64 = weights.iter().zip(&self.scaled_sq).map(|(w, s)| w * s).sum();
        let mut g = self.base_gradient(x);
        g.axpy(2.0 * noise, x, 1.0);
        g
    }
}
