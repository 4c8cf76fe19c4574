//! Weighted finite sums `f(x) = Σ wᵢ fᵢ(x)`, subsampled estimators and the
//! scalar-product budget meter.

use std::fmt;
use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::{Error, Result, Vector};

const WEIGHT_SUM_TOL: f64 = 1e-8;

/// One family of component functions `fᵢ`, indexed `0..len()`.
pub trait ComponentFunction: Send + Sync {
    fn dim(&self) -> usize;

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn value(&self, i: usize, x: &Vector) -> f64;

    fn gradient(&self, i: usize, x: &Vector) -> Vector;

    /// Scalar products charged per component value.
    fn value_cost(&self) -> u64 {
        1
    }

    /// Scalar products charged per component gradient.
    fn gradient_cost(&self) -> u64 {
        1
    }

    /// `Σ wᵢ fᵢ(x)`. Implementors with a closed-form aggregate can override.
    fn weighted_value(&self, weights: &[f64], x: &Vector) -> f64 {
        weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w != 0.0)
            .map(|(i, w)| w * self.value(i, x))
            .sum()
    }

    fn weighted_gradient(&self, weights: &[f64], x: &Vector) -> Vector {
        let mut g = Vector::zeros(self.dim());
        for (i, w) in weights.iter().enumerate() {
            if *w != 0.0 {
                g.axpy(*w, &self.gradient(i, x), 1.0);
            }
        }
        g
    }
}

/// Multiset of component indices drawn with replacement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleIndexSet {
    indices: Vec<usize>,
}

impl SampleIndexSet {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::ConfigInvalid("sample must contain at least one index".into()));
        }
        Ok(Self { indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Counts the work a run spends, in scalar products.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BudgetMeter {
    pub scalar_products: u64,
    pub component_value_evals: u64,
    pub component_grad_evals: u64,
    pub cg_scalar_products: u64,
    disabled: bool,
}

impl BudgetMeter {
    pub fn new() -> Self {
        Self::default()
    }

    /// A meter that ignores every charge.
    pub fn disabled() -> Self {
        Self { disabled: true, ..Self::default() }
    }

    pub fn set_enabled(&mut self, enabled: bool) {
        self.disabled = !enabled;
    }

    pub fn is_enabled(&self) -> bool {
        !self.disabled
    }

    pub fn charge_values(&mut self, count: u64, cost_each: u64) {
        if self.disabled {
            return;
        }
        self.component_value_evals += count;
        self.scalar_products += count * cost_each;
    }

    pub fn charge_gradients(&mut self, count: u64, cost_each: u64) {
        if self.disabled {
            return;
        }
        self.component_grad_evals += count;
        self.scalar_products += count * cost_each;
    }

    /// One conjugate gradient solve on an `m × m` system: `(m + 4)·iterations`.
    pub fn charge_cg(&mut self, m: usize, iterations: usize) {
        self.charge_linear_algebra(((m + 4) * iterations) as u64);
    }

    pub fn charge_linear_algebra(&mut self, products: u64) {
        if self.disabled {
            return;
        }
        self.cg_scalar_products += products;
        self.scalar_products += products;
    }
}

/// Draws `size` i.i.d. indices with `P(index = s) = weights[s]`.
pub fn draw_sample<R: Rng + ?Sized>(weights: &[f64], size: usize, rng: &mut R) -> Result<SampleIndexSet> {
    validate_weights(weights)?;
    let dist = WeightedIndex::new(weights).map_err(|e| Error::InvalidWeights(e.to_string()))?;
    SampleIndexSet::new((0..size).map(|_| dist.sample(rng)).collect())
}

fn validate_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::InvalidWeights("no components".into()));
    }
    if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(**w >= 0.0) || !w.is_finite()) {
        return Err(Error::InvalidWeights(format!("weight {i} is {w}")));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::InvalidWeights(format!("weights sum to {sum}")));
    }
    Ok(())
}

/// `f(x) = Σ wᵢ fᵢ(x)` over a shared component family.
#[derive(Clone)]
pub struct FiniteSumObjective {
    components: Arc<dyn ComponentFunction>,
    weights: Vec<f64>,
    sampler: WeightedIndex<f64>,
}

impl fmt::Debug for FiniteSumObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteSumObjective")
            .field("components", &self.len())
            .field("dim", &self.dim())
            .finish()
    }
}

impl FiniteSumObjective {
    pub fn new(components: Arc<dyn ComponentFunction>, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != components.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} components",
                weights.len(),
                components.len()
            )));
        }
        validate_weights(&weights)?;
        let sampler = WeightedIndex::new(&weights).map_err(|e| Error::InvalidWeights(e.to_string()))?;
        Ok(Self { components, weights, sampler })
    }

    pub fn uniform(components: Arc<dyn ComponentFunction>) -> Result<Self> {
        let n = components.len();
        if n == 0 {
            return Err(Error::InvalidWeights("no components".into()));
        }
        Self::new(components, vec![1.0 / n as f64; n])
    }

    /// Number of components `N`.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.components.dim()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &dyn ComponentFunction {
        self.components.as_ref()
    }

    pub fn draw_sample<R: Rng + ?Sized>(&self, size: usize, rng: &mut R) -> Result<SampleIndexSet> {
        SampleIndexSet::new((0..size).map(|_| self.sampler.sample(rng)).collect())
    }

    fn check(&self, x: &Vector) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "point has length {} but objective has dimension {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    fn check_sample(&self, s: &SampleIndexSet) -> Result<()> {
        match s.indices().iter().find(|&&i| i >= self.len()) {
            Some(i) => Err(Error::DimensionMismatch(format!("index {i} out of {} components", self.len()))),
            None => Ok(()),
        }
    }

    /// Unweighted average `(1/|s|) Σ_{i∈s} fᵢ(x)` over the drawn multiset.
    pub fn subsample_value(&self, s: &SampleIndexSet, x: &Vector, meter: &mut BudgetMeter) -> Result<f64> {
        self.check(x)?;
        self.check_sample(s)?;
        let mut sum = 0.0;
        for &i in s.indices() {
            let v = self.components.value(i, x);
            if !v.is_finite() {
                return Err(Error::NonFinite { index: i });
            }
            sum += v;
        }
        meter.charge_values(s.len() as u64, self.components.value_cost());
        Ok(sum / s.len() as f64)
    }

    pub fn subsample_grad(&self, s: &SampleIndexSet, x: &Vector, meter: &mut BudgetMeter) -> Result<Vector> {
        self.check(x)?;
        self.check_sample(s)?;
        let mut g = Vector::zeros(self.dim());
        for &i in s.indices() {
            let gi = self.components.gradient(i, x);
            if gi.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { index: i });
            }
            g += gi;
        }
        meter.charge_gradients(s.len() as u64, self.components.gradient_cost());
        Ok(g / s.len() as f64)
    }

    /// `Σ wᵢ fᵢ(x)`, charged as `N` component values.
    pub fn full_value(&self, x: &Vector, meter: &mut BudgetMeter) -> Result<f64> {
        let v = self.true_value(x)?;
        meter.charge_values(self.len() as u64, self.components.value_cost());
        Ok(v)
    }

    /// `Σ wᵢ ∇fᵢ(x)`, charged as `N` component gradients.
    pub fn full_grad(&self, x: &Vector, meter: &mut BudgetMeter) -> Result<Vector> {
        let g = self.true_gradient(x)?;
        meter.charge_gradients(self.len() as u64, self.components.gradient_cost());
        Ok(g)
    }

    /// Unmetered `f(x)`, for observation only.
    pub fn true_value(&self, x: &Vector) -> Result<f64> {
        self.check(x)?;
        let v = self.components.weighted_value(&self.weights, x);
        if !v.is_finite() {
            return Err(self.first_non_finite(x));
        }
        Ok(v)
    }

    /// Unmetered `∇f(x)`, for observation only.
    pub fn true_gradient(&self, x: &Vector) -> Result<Vector> {
        self.check(x)?;
        let g = self.components.weighted_gradient(&self.weights, x);
        if g.iter().any(|v| !v.is_finite()) {
            return Err(self.first_non_finite(x));
        }
        Ok(g)
    }

    fn first_non_finite(&self, x: &Vector) -> Error {
        let index = (0..self.len())
            .find(|&i| {
                !self.components.value(i, x).is_finite()
                    || self.components.gradient(i, x).iter().any(|v| !v.is_finite())
            })
            .unwrap_or(0);
        Error::NonFinite { index }
    }
}
