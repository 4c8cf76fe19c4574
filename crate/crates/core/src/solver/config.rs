use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Initial sample size, either absolute or as a fraction of `N` (rounded up).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialSample {
    Count(usize),
    Fraction(f64),
}

impl InitialSample {
    pub fn resolve(self, total: usize) -> usize {
        match self {
            InitialSample::Count(c) => c,
            InitialSample::Fraction(f) => (f * total as f64).ceil() as usize,
        }
    }
}

/// Hyperparameters of IPAS. The baseline reads the subset it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Backtracking factor β.
    pub beta: f64,
    /// Descent and acceptance constant c.
    pub c: f64,
    /// Armijo constant c₁.
    pub c1: f64,
    /// Step floor in the mini-batch line search.
    pub t_min: f64,
    /// Multiplier C of the η² slack in the acceptance test.
    pub c_accept: f64,
    pub n0: InitialSample,
    /// Name of the sample-size schedule, see [`super::ScheduleRegistry`].
    pub schedule: String,
    /// Increment of the additive schedule.
    pub dn: usize,
    /// Factor of the geometric schedule.
    pub growth: f64,
    /// Projection tolerance exponent s in `η_k = 1/(k+1)^s`.
    pub s_exp: f64,
    /// Size of the additional sample.
    pub d_size: usize,
    pub k_max: usize,
    pub seed: u64,
    /// Stop when `N_k = N`, `‖p_k‖ ≤ tol_d` and `e(x_k) ≤ tol_e`.
    pub tol_d: f64,
    pub tol_e: f64,
    /// Record the exact `‖d(x_k)‖` and `f(x_k)` (never charged to the budget).
    pub oracle_metrics: bool,
    /// Keep a log of every inexact projection.
    pub audit_projections: bool,
    /// Keep every iterate in the run result.
    pub keep_iterates: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            beta: 0.1,
            c: 1e-4,
            c1: 1e-2,
            t_min: 1e-6,
            c_accept: 1e-2,
            n0: InitialSample::Fraction(0.01),
            schedule: "additive".into(),
            dn: 1,
            growth: 2.0,
            s_exp: 1.0,
            d_size: 1,
            k_max: 500,
            seed: 0,
            tol_d: 0.0,
            tol_e: 0.0,
            oracle_metrics: true,
            audit_projections: false,
            keep_iterates: false,
        }
    }
}

/// Projection tolerance `η_k = 1/(k+1)^s`.
pub fn eta(k: usize, s_exp: f64) -> f64 {
    ((k + 1) as f64).powf(-s_exp)
}

fn open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::ConfigInvalid(format!("{name} must lie in (0, 1), got {v}")))
    }
}

/// Checks the parameter ranges. Returns soft warnings; hard violations are
/// errors.
///
/// With a Lipschitz estimate `L` this also checks the sufficient condition
/// `t_min < 2βc(1 − c₁)/L` under which every full-sample step is at least
/// `t_min`.
pub fn validate_config(cfg: &SolverConfig, lipschitz: Option<f64>) -> Result<Vec<String>> {
    open_unit("beta", cfg.beta)?;
    open_unit("c", cfg.c)?;
    open_unit("c1", cfg.c1)?;
    open_unit("t_min", cfg.t_min)?;
    if !(cfg.c_accept > 0.0) || !cfg.c_accept.is_finite() {
        return Err(Error::ConfigInvalid(format!("c_accept must be positive, got {}", cfg.c_accept)));
    }
    if !(cfg.s_exp > 0.5) || !cfg.s_exp.is_finite() {
        return Err(Error::ConfigInvalid(format!(
            "s_exp must exceed 0.5 so that Σ η_k² converges, got {}",
            cfg.s_exp
        )));
    }
    if cfg.d_size == 0 {
        return Err(Error::ConfigInvalid("d_size must be at least 1".into()));
    }
    match cfg.n0 {
        InitialSample::Count(0) => return Err(Error::ConfigInvalid("n0 must be at least 1".into())),
        InitialSample::Fraction(f) if !(f > 0.0 && f <= 1.0) => {
            return Err(Error::ConfigInvalid(format!("n0 fraction must lie in (0, 1], got {f}")))
        }
        _ => {}
    }
    if cfg.dn == 0 {
        return Err(Error::ConfigInvalid("dn must be at least 1".into()));
    }
    if !(cfg.growth > 1.0) {
        return Err(Error::ConfigInvalid(format!("growth must exceed 1, got {}", cfg.growth)));
    }
    if !(cfg.tol_d >= 0.0) || !(cfg.tol_e >= 0.0) {
        return Err(Error::ConfigInvalid("stopping tolerances must be nonnegative".into()));
    }

    let mut warnings = Vec::new();
    if let Some(l) = lipschitz {
        if !(l > 0.0) {
            return Err(Error::ConfigInvalid(format!("Lipschitz estimate must be positive, got {l}")));
        }
        let bound = 2.0 * cfg.beta * cfg.c * (1.0 - cfg.c1) / l;
        if cfg.t_min >= bound.min(1.0) {
            warnings.push(format!(
                "t_min = {} is not below 2βc(1 − c₁)/L = {bound:.3e}; full-sample steps may fall under t_min",
                cfg.t_min
            ));
        }
    }
    Ok(warnings)
}

/// Resolves and checks `N₀` and the additional sample size against `N`.
pub(crate) fn initial_sample_size(cfg: &SolverConfig, total: usize) -> Result<usize> {
    let n0 = cfg.n0.resolve(total);
    if n0 == 0 || n0 > total {
        return Err(Error::ConfigInvalid(format!("initial sample {n0} outside 1..={total}")));
    }
    if n0 < total && cfg.d_size > total - 1 {
        return Err(Error::ConfigInvalid(format!(
            "additional sample size {} must be at most N − 1 = {}",
            cfg.d_size,
            total - 1
        )));
    }
    Ok(n0)
}
