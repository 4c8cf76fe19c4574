//! Conjugate gradient for symmetric positive definite systems given only
//! as a matrix-vector product.

use crate::Vector;

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub solution: Vector,
    /// Residual of `solution` as measured by the caller's residual function.
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Solves `apply(x) = rhs` from a zero start until `‖rhs − apply(x)‖ ≤ tol_abs`.
///
/// When `max_iter` is reached first the best checked iterate is returned with
/// `converged == false`.
pub fn cg_solve<F>(apply: F, rhs: &Vector, tol_abs: f64, max_iter: usize) -> CgOutcome
where
    F: Fn(&Vector) -> Vector,
{
    cg_solve_checked(&apply, rhs, tol_abs, max_iter, |x| (rhs - apply(x)).norm())
}

/// Same as [`cg_solve`], but convergence is confirmed with `true_residual`
/// instead of the operator residual.
///
/// The recurrence residual is only used as a trigger. Whenever it drops below
/// the tolerance the caller's residual is evaluated; if that has not met the
/// tolerance yet (rounding drift) the iteration restarts from the explicit
/// residual.
pub fn cg_solve_checked<F, R>(
    apply: F,
    rhs: &Vector,
    tol_abs: f64,
    max_iter: usize,
    true_residual: R,
) -> CgOutcome
where
    F: Fn(&Vector) -> Vector,
    R: Fn(&Vector) -> f64,
{
    let mut x = Vector::zeros(rhs.len());
    let res0 = true_residual(&x);
    if res0 <= tol_abs {
        return CgOutcome { solution: x, residual_norm: res0, iterations: 0, converged: true };
    }
    let mut best = (x.clone(), res0);

    let mut r = rhs.clone();
    let mut p = r.clone();
    let mut rr = r.dot(&r);
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        let q = apply(&p);
        let pq = p.dot(&q);
        if !(pq > 0.0) || !pq.is_finite() {
            break;
        }
        let alpha = rr / pq;
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &q, 1.0);
        let rr_new = r.dot(&r);

        if rr_new.sqrt() <= tol_abs {
            let res = true_residual(&x);
            if res < best.1 {
                best = (x.clone(), res);
            }
            if res <= tol_abs {
                return CgOutcome { solution: x, residual_norm: res, iterations, converged: true };
            }
            r = rhs - apply(&x);
            rr = r.dot(&r);
            p.copy_from(&r);
            continue;
        }

        let beta = rr_new / rr;
        p *= beta;
        p += &r;
        rr = rr_new;
    }

    let res = true_residual(&x);
    if res < best.1 {
        best = (x, res);
    }
    CgOutcome {
        converged: best.1 <= tol_abs,
        solution: best.0,
        residual_norm: best.1,
        iterations,
    }
}
