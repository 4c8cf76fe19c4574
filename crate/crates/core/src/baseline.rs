//! Deterministic full-sample projected gradient with exact projections and
//! the same `η_k²`-relaxed backtracking as IPAS. Used as the budget reference.

use crate::solver::line_search::line_search_full;
use crate::solver::{eta, observe, IterationRecord, Method, Problem, RunResult, RunStatus, SolverConfig};
use crate::{BudgetMeter, Error, Result, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineConfig {
    pub beta: f64,
    pub c1: f64,
    pub k_max: usize,
    pub tol_d: f64,
    pub tol_e: f64,
    pub s_exp: f64,
    pub oracle_metrics: bool,
    pub keep_iterates: bool,
}

impl From<&SolverConfig> for BaselineConfig {
    fn from(c: &SolverConfig) -> Self {
        Self {
            beta: c.beta,
            c1: c.c1,
            k_max: c.k_max,
            tol_d: c.tol_d,
            tol_e: c.tol_e,
            s_exp: c.s_exp,
            oracle_metrics: c.oracle_metrics,
            keep_iterates: c.keep_iterates,
        }
    }
}

impl Default for BaselineConfig {
    fn default() -> Self {
        (&SolverConfig::default()).into()
    }
}

#[derive(Debug, Clone)]
pub struct Baseline {
    cfg: BaselineConfig,
}

#[derive(Debug, Clone)]
pub struct BaselineState {
    pub x: Vector,
    pub k: usize,
    pub meter: BudgetMeter,
    pub done: bool,
}

impl Baseline {
    pub fn new(cfg: BaselineConfig) -> Result<Self> {
        for (name, v) in [("beta", cfg.beta), ("c1", cfg.c1)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::ConfigInvalid(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        if !(cfg.s_exp > 0.5) {
            return Err(Error::ConfigInvalid(format!("s_exp must exceed 0.5, got {}", cfg.s_exp)));
        }
        if !(cfg.tol_d >= 0.0) || !(cfg.tol_e >= 0.0) {
            return Err(Error::ConfigInvalid("stopping tolerances must be nonnegative".into()));
        }
        Ok(Self { cfg })
    }

    pub fn init(&self, x0: Vector) -> BaselineState {
        BaselineState { x: x0, k: 0, meter: BudgetMeter::new(), done: false }
    }

    /// One iteration: `d = π_S(x − ∇f(x)) − x`, backtracking on the full
    /// objective, `x ← x + t d`. The exact solve is charged `(m + 4)·m`.
    pub fn step(&self, problem: &Problem, state: &mut BaselineState) -> Result<IterationRecord> {
        let cs = problem.constraints();
        let obj = problem.objective();
        let x = state.x.clone();
        let mut rec = observe(problem, &x, state.k, obj.len(), &state.meter, self.cfg.oracle_metrics)?;

        let g = obj.full_grad(&x, &mut state.meter)?;
        let d = cs.projected_direction(&x, &g)?;
        state.meter.charge_linear_algebra(((cs.m() + 4) * cs.m()) as u64);

        let eta_k = eta(state.k, self.cfg.s_exp);
        let slope = g.dot(&d);
        let meter = &mut state.meter;
        let mut phi = |t: f64| -> Result<f64> {
            match obj.full_value(&(&x + &d * t), meter) {
                Err(Error::NonFinite { .. }) => Ok(f64::INFINITY),
                other => other,
            }
        };
        let phi_0 = phi(0.0)?;
        let (t, _) = line_search_full(&mut phi, phi_0, slope, self.cfg.beta, self.cfg.c1, eta_k * eta_k)?;

        rec.t = t;
        rec.norm_p = d.norm();
        rec.accepted = true;
        state.x = &x + &d * t;
        if rec.norm_p <= self.cfg.tol_d && rec.e_x <= self.cfg.tol_e {
            state.done = true;
        }
        state.k += 1;
        Ok(rec)
    }
}

impl Method for Baseline {
    fn name(&self) -> &str {
        "baseline"
    }

    fn run(&self, problem: &Problem, x0: Option<&Vector>) -> Result<RunResult> {
        let x0 = match x0 {
            Some(x) if x.len() != problem.dim() => {
                return Err(Error::DimensionMismatch(format!("x0 has length {}", x.len())))
            }
            Some(x) => x.clone(),
            None => problem.constraints().min_norm_feasible(),
        };
        let total = problem.objective().len();
        let mut state = self.init(x0);
        let mut records = Vec::new();
        let mut iterates = Vec::new();
        let status = loop {
            if self.cfg.keep_iterates {
                iterates.push(state.x.clone());
            }
            if state.k >= self.cfg.k_max {
                records.push(observe(problem, &state.x, state.k, total, &state.meter, self.cfg.oracle_metrics)?);
                break RunStatus::MaxIterations;
            }
            match self.step(problem, &mut state) {
                Ok(rec) => records.push(rec),
                Err(e) => {
                    log::warn!("baseline run stopped at k = {}: {e}", state.k);
                    records.push(observe(problem, &state.x, state.k, total, &state.meter, self.cfg.oracle_metrics)?);
                    break RunStatus::Failed(e.to_string());
                }
            }
            if state.done {
                break RunStatus::Stationary;
            }
        };
        Ok(RunResult {
            method: self.name().to_string(),
            status,
            records,
            iterates,
            projections: Vec::new(),
            x: state.x,
        })
    }
}
