//! Concrete problem families: equality-constrained logistic regression and
//! the noisy quadratic finite sum, plus random constraint systems.

mod libsvm;
mod logistic;
mod noisy_quadratic;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub use libsvm::{load_libsvm, parse_libsvm, write_libsvm};
pub use logistic::LogisticDataset;
pub use noisy_quadratic::NoisyQuadratic;

use crate::{ConstraintSet, Error, Matrix, Result, Vector};

const CONSTRAINT_RESAMPLES: usize = 3;

/// Gaussian `A ∈ ℝ^{m×n}` with `b = Ax̃` for a Gaussian `x̃`, so the feasible
/// set is nonempty. Returns the set together with `x̃`.
pub fn generate_constraints_with_witness(n: usize, m: usize, seed: u64) -> Result<(ConstraintSet, Vector)> {
    if m == 0 || m > n {
        return Err(Error::DimensionMismatch(format!("need 1 <= m <= n, got m = {m}, n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last = None;
    for _ in 0..=CONSTRAINT_RESAMPLES {
        let a = Matrix::from_fn(m, n, |_, _| StandardNormal.sample(&mut rng));
        let witness = Vector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        let b = &a * &witness;
        match ConstraintSet::new(a, b) {
            Ok(cs) => return Ok((cs, witness)),
            Err(e @ Error::RankDeficient(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

pub fn generate_constraints(n: usize, m: usize, seed: u64) -> Result<ConstraintSet> {
    generate_constraints_with_witness(n, m, seed).map(|(cs, _)| cs)
}

/// `Aᵀ(AAᵀ)⁻¹b`.
pub fn min_norm_feasible(cs: &ConstraintSet) -> Vector {
    cs.min_norm_feasible()
}

/// Number of constraints for a fraction of the dimension, at least one.
pub fn constraint_count(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64).round() as usize).clamp(1, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diabetes_shaped_system() {
        let cs = generate_constraints(8, constraint_count(8, 0.5), 1).unwrap();
        assert_eq!((cs.m(), cs.n()), (4, 8));
    }

    #[test]
    fn square_system_has_single_point() {
        let (cs, witness) = generate_constraints_with_witness(5, 5, 3).unwrap();
        let y = Vector::from_vec(vec![10.0, -3.0, 2.0, 0.0, 1.0]);
        let p = cs.exact_project(&y).unwrap();
        assert!((p - &witness).amax() < 1e-8);
    }

    #[test]
    fn many_seeds_validate() {
        for seed in 0..100 {
            let (cs, witness) = generate_constraints_with_witness(50, 25, seed).unwrap();
            assert!(cs.feasibility_gap(&witness).unwrap() <= 1e-10 * (1.0 + witness.norm() * 10.0));
        }
    }

    #[test]
    fn bad_shapes() {
        assert!(generate_constraints(3, 4, 0).is_err());
        assert!(generate_constraints(3, 0, 0).is_err());
    }

    #[test]
    fn min_norm_is_projection_of_origin() {
        let cs = generate_constraints(12, 5, 8).unwrap();
        let x0 = min_norm_feasible(&cs);
        let p = cs.exact_project(&Vector::zeros(12)).unwrap();
        assert!((x0 - p).amax() < 1e-12);

        let zero_b = ConstraintSet::new(cs.a().clone(), Vector::zeros(5)).unwrap();
        assert_eq!(min_norm_feasible(&zero_b).amax(), 0.0);
    }
}
