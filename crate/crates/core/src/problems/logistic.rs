use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::objective::{ComponentFunction, FiniteSumObjective};
use crate::{Error, Matrix, Result, Vector};

/// Above this margin `log(1 + eᵗ)` is returned as `t`.
const SOFTPLUS_LINEAR: f64 = 30.0;

/// Binary classification data: rows of `z` are samples, labels are ±1.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticDataset {
    z: Matrix,
    y: Vec<f64>,
}

impl LogisticDataset {
    pub fn new(z: Matrix, y: Vec<f64>) -> Result<Self> {
        if z.nrows() == 0 || z.ncols() == 0 {
            return Err(Error::DimensionMismatch(format!("empty dataset {}x{}", z.nrows(), z.ncols())));
        }
        if z.nrows() != y.len() {
            return Err(Error::DimensionMismatch(format!("{} samples but {} labels", z.nrows(), y.len())));
        }
        if let Some(l) = y.iter().find(|l| **l != 1.0 && **l != -1.0) {
            return Err(Error::Label(format!("label {l} is not ±1")));
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::DimensionMismatch("non-finite attribute".into()));
        }
        Ok(Self { z, y })
    }

    /// Samples `z ~ U[-1, 1]ⁿ` and draws labels from a logistic model with a
    /// random normal weight vector.
    pub fn synthetic(samples: usize, n: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w: Vector = Vector::from_fn(n, |_, _| 2.0 * Distribution::<f64>::sample(&StandardNormal, &mut rng));
        let z = Matrix::from_fn(samples, n, |_, _| rng.random_range(-1.0..=1.0));
        let y = (0..samples)
            .map(|i| {
                let margin = z.row(i).transpose().dot(&w);
                if rng.random::<f64>() < sigmoid(margin) { 1.0 } else { -1.0 }
            })
            .collect();
        Self::new(z, y)
    }

    pub fn attributes(&self) -> &Matrix {
        &self.z
    }

    pub fn labels(&self) -> &[f64] {
        &self.y
    }

    pub fn samples(&self) -> usize {
        self.y.len()
    }

    pub fn features(&self) -> usize {
        self.z.ncols()
    }

    pub fn into_objective(self) -> FiniteSumObjective {
        FiniteSumObjective::uniform(Arc::new(self)).expect("dataset has at least one sample")
    }

    fn margin(&self, i: usize, x: &Vector) -> f64 {
        // t = −yᵢ xᵀzᵢ
        -self.y[i] * self.z.row(i).transpose().dot(x)
    }

    /// `(log(1 + e^{−yᵢxᵀzᵢ}), −yᵢ σ(−yᵢxᵀzᵢ) zᵢ)`.
    pub fn component(&self, i: usize, x: &Vector) -> (f64, Vector) {
        let t = self.margin(i, x);
        let g = self.z.row(i).transpose() * (-self.y[i] * sigmoid(t));
        (softplus(t), g)
    }
}

pub(crate) fn softplus(t: f64) -> f64 {
    if t >= SOFTPLUS_LINEAR {
        t
    } else {
        t.exp().ln_1p()
    }
}

pub(crate) fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

impl ComponentFunction for LogisticDataset {
    fn dim(&self) -> usize {
        self.features()
    }

    fn len(&self) -> usize {
        self.samples()
    }

    fn value(&self, i: usize, x: &Vector) -> f64 {
        softplus(self.margin(i, x))
    }

    fn gradient(&self, i: usize, x: &Vector) -> Vector {
        self.component(i, x).1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> LogisticDataset {
        let z = Matrix::from_row_slice(2, 3, &[1.0, -2.0, 0.5, 0.0, 3.0, 1.0]);
        LogisticDataset::new(z, vec![1.0, -1.0]).unwrap()
    }

    #[test]
    fn origin_value_and_gradient() {
        let ds = tiny();
        let (v, g) = ds.component(1, &Vector::zeros(3));
        assert!((v - std::f64::consts::LN_2).abs() < 1e-15);
        let expect = ds.attributes().row(1).transpose() * 0.5;
        assert!((g - expect).amax() < 1e-15);
    }

    #[test]
    fn saturation_when_correctly_classified() {
        let z = Matrix::from_row_slice(1, 1, &[1.0]);
        let ds = LogisticDataset::new(z, vec![1.0]).unwrap();
        let (v, g) = ds.component(0, &Vector::from_vec(vec![100.0]));
        assert!(v <= 1e-40);
        assert!(g.norm() <= 1e-40);
        let (v, g) = ds.component(0, &Vector::from_vec(vec![-100.0]));
        assert_eq!(v, 100.0);
        assert!((g[0] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_labels() {
        let z = Matrix::from_row_slice(1, 1, &[1.0]);
        assert!(matches!(LogisticDataset::new(z, vec![0.0]), Err(Error::Label(_))));
    }

    #[test]
    fn synthetic_is_reproducible() {
        let a = LogisticDataset::synthetic(50, 4, 3).unwrap();
        let b = LogisticDataset::synthetic(50, 4, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.labels().iter().any(|l| *l > 0.0) && a.labels().iter().any(|l| *l < 0.0));
    }
}
