//! The two backtracking rules, written over `φ(t) = f(x + t p)`.

use crate::{Error, Result};

pub const MAX_BACKTRACKS: usize = 200;

/// `φ(t) ≤ φ(0) + c₁ t · slope + slack`.
pub fn armijo_holds(phi_t: f64, phi_0: f64, t: f64, slope: f64, c1: f64, slack: f64) -> bool {
    phi_t <= phi_0 + c1 * t * slope + slack
}

/// Smallest `j ≥ 0` such that `t = βʲ` satisfies the relaxed Armijo
/// condition. Returns `(t, j)`.
pub fn line_search_full<F>(mut phi: F, phi_0: f64, slope: f64, beta: f64, c1: f64, slack: f64) -> Result<(f64, usize)>
where
    F: FnMut(f64) -> Result<f64>,
{
    for j in 0..=MAX_BACKTRACKS {
        let t = beta.powi(j as i32);
        if armijo_holds(phi(t)?, phi_0, t, slope, c1, slack) {
            return Ok((t, j));
        }
    }
    Err(Error::MaxBacktracks(MAX_BACKTRACKS))
}

/// Backtracks from `t = 1` while the relaxed Armijo condition fails and
/// `βt ≥ t_min`. The result is never below `t_min` and need not satisfy the
/// condition.
pub fn line_search_minibatch<F>(
    mut phi: F,
    phi_0: f64,
    slope: f64,
    beta: f64,
    c1: f64,
    slack: f64,
    t_min: f64,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut j = 0;
    loop {
        let t = beta.powi(j);
        if armijo_holds(phi(t)?, phi_0, t, slope, c1, slack) {
            return Ok(t);
        }
        let next = beta.powi(j + 1);
        if next < t_min {
            return Ok(t);
        }
        j += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_step_on_scaled_quadratic() {
        // f = ½‖x‖², p = −x: φ(t) = ½(1−t)²‖x‖².
        let x2 = 3.7_f64;
        let phi = |t: f64| Ok(0.5 * (1.0 - t).powi(2) * x2);
        let (t, j) = line_search_full(phi, 0.5 * x2, -x2, 0.5, 1e-4, 1e-6).unwrap();
        assert_eq!((t, j), (1.0, 0));
    }

    #[test]
    fn zero_direction_accepts_unit_step() {
        let (t, _) = line_search_full(|_| Ok(2.0), 2.0, 0.0, 0.5, 1e-4, 1e-8).unwrap();
        assert_eq!(t, 1.0);
    }

    #[test]
    fn steep_cubic_needs_two_reductions() {
        // φ(t) = −t + 5t³ on the direction with slope −1, β = 0.5, c₁ = 0.1.
        // t = 1: 4 > −0.1; t = 0.5: 0.125 > −0.05; t = 0.25: −0.171875 ≤ −0.025.
        let phi = |t: f64| Ok(-t + 5.0 * t.powi(3));
        for t in [1.0, 0.5] {
            assert!(!armijo_holds(phi(t).unwrap(), 0.0, t, -1.0, 0.1, 0.0));
        }
        let (t, j) = line_search_full(phi, 0.0, -1.0, 0.5, 0.1, 0.0).unwrap();
        assert_eq!((t, j), (0.25, 2));
    }

    #[test]
    fn broken_function_hits_backtrack_limit() {
        let err = line_search_full(|_| Ok(f64::NAN), 0.0, -1.0, 0.5, 0.1, 0.0).unwrap_err();
        assert!(matches!(err, Error::MaxBacktracks(_)));
    }

    #[test]
    fn minibatch_accepts_unit_step() {
        let t = line_search_minibatch(|_| Ok(0.0), 1.0, -1.0, 0.5, 0.1, 0.0, 0.1).unwrap();
        assert_eq!(t, 1.0);
    }

    #[test]
    fn minibatch_clamps_above_floor() {
        let t = line_search_minibatch(|_| Ok(10.0), 0.0, -1.0, 0.5, 0.1, 0.0, 0.1).unwrap();
        assert_eq!(t, 0.125);
    }

    #[test]
    fn minibatch_floor_above_first_reduction() {
        let t = line_search_minibatch(|_| Ok(10.0), 0.0, -1.0, 0.5, 0.1, 0.0, 0.9).unwrap();
        assert_eq!(t, 1.0);
    }
}
