//! Inexact projection with additional sampling.
//!
//! One iteration from `x_k` with sample size `N_k`:
//!
//! 1. draw `𝒩_k` (or use the full sum once `N_k = N`);
//! 2. `p_k = π̃_S(x_k − ∇f_{𝒩_k}(x_k)) − x_k` with projection residual at
//!    most `η_k`; at full sample a direction failing
//!    `∇f(x_k)ᵀp_k ≤ −c‖p_k‖²` is discarded and `x_{k+1} = π̃_S(x_k)`;
//! 3. nonmonotone backtracking with slack `η_k²` (floored at `t_min` in the
//!    mini-batch regime);
//! 4. in the mini-batch regime an independent sample `𝒟_k` decides
//!    acceptance; a rejection keeps `x_k` and grows the sample.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{eta, initial_sample_size, validate_config};
use super::line_search::{line_search_full, line_search_minibatch};
use super::trace::{IterationRecord, ProjectionAudit, RunResult, RunStatus};
use super::{Method, Problem, SampleSizeSchedule, ScheduleRegistry, SolverConfig};
use crate::{BudgetMeter, ConstraintSet, Error, FiniteSumObjective, ProjectionResult, Result, SampleIndexSet, Vector};

/// Slack on the per-step feasibility recursion check.
const FEASIBILITY_SLACK: f64 = 1e-10;

/// Mutable state of one run.
#[derive(Debug, Clone)]
pub struct IpasState {
    pub x: Vector,
    pub k: usize,
    pub n_k: usize,
    pub meter: BudgetMeter,
    pub rng: ChaCha8Rng,
    pub projections: Vec<ProjectionAudit>,
    pub done: Option<RunStatus>,
}

impl IpasState {
    pub fn new(x0: Vector, n0: usize, seed: u64) -> Self {
        Self {
            x: x0,
            k: 0,
            n_k: n0,
            meter: BudgetMeter::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            projections: Vec::new(),
            done: None,
        }
    }
}

/// `p = π̃_S(x − g) − x` with `‖r(x − g)‖ ≤ η`.
pub fn search_direction(cs: &ConstraintSet, grad_est: &Vector, x: &Vector, eta_k: f64) -> Result<(Vector, ProjectionResult)> {
    let y = x - grad_est;
    let proj = cs.inexact_project(&y, eta_k)?;
    Ok((&proj.point - x, proj))
}

/// `gradᵀp ≤ −c‖p‖²`.
pub fn descent_check(grad_full: &Vector, p: &Vector, c: f64) -> bool {
    grad_full.dot(p) <= -c * p.norm_squared()
}

#[derive(Debug)]
pub struct Ipas {
    cfg: SolverConfig,
    schedule: Box<dyn SampleSizeSchedule>,
}

impl Ipas {
    pub fn new(cfg: SolverConfig) -> Result<Self> {
        Self::from_registry(cfg, &ScheduleRegistry::with_defaults())
    }

    /// Looks `cfg.schedule` up in `registry`.
    pub fn from_registry(cfg: SolverConfig, registry: &ScheduleRegistry) -> Result<Self> {
        let schedule = registry.build(&cfg.schedule, &cfg)?;
        Self::with_schedule(cfg, schedule)
    }

    pub fn with_schedule(cfg: SolverConfig, schedule: Box<dyn SampleSizeSchedule>) -> Result<Self> {
        validate_config(&cfg, None)?;
        Ok(Self { cfg, schedule })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn init(&self, problem: &Problem, x0: Option<&Vector>) -> Result<IpasState> {
        let n0 = initial_sample_size(&self.cfg, problem.objective().len())?;
        let x0 = match x0 {
            Some(x) if x.len() != problem.dim() => {
                return Err(Error::DimensionMismatch(format!(
                    "x0 has length {} but the problem has {} variables",
                    x.len(),
                    problem.dim()
                )))
            }
            Some(x) => x.clone(),
            None => problem.constraints().min_norm_feasible(),
        };
        Ok(IpasState::new(x0, n0, self.cfg.seed))
    }

    /// Trace row for the current state with empty step columns. Oracle
    /// quantities are computed outside the budget.
    pub fn observe(&self, problem: &Problem, state: &IpasState) -> Result<IterationRecord> {
        observe(problem, &state.x, state.k, state.n_k, &state.meter, self.cfg.oracle_metrics)
    }

    fn project(&self, cs: &ConstraintSet, y: &Vector, eta_k: f64, state: &mut IpasState) -> Result<ProjectionResult> {
        let proj = cs.inexact_project(y, eta_k)?;
        self.charge_and_audit(cs, &proj, eta_k, state)?;
        Ok(proj)
    }

    fn charge_and_audit(&self, cs: &ConstraintSet, proj: &ProjectionResult, eta_k: f64, state: &mut IpasState) -> Result<()> {
        state.meter.charge_cg(cs.m(), proj.cg_iterations);
        if self.cfg.audit_projections {
            state.projections.push(ProjectionAudit {
                k: state.k,
                eta: eta_k,
                residual_norm: proj.residual_norm,
                gap: cs.feasibility_gap(&proj.point)?,
            });
        }
        Ok(())
    }

    /// Draws `𝒟_k`, forms `s_k = π̃_S(x − ∇f_{𝒟_k}(x)) − x` and tests
    /// `f_{𝒟_k}(x̄) ≤ f_{𝒟_k}(x) − c‖s_k‖² + Cη_k²`. Returns the verdict and
    /// `‖s_k‖`.
    pub fn additional_sampling_test(
        &self,
        problem: &Problem,
        x: &Vector,
        x_trial: &Vector,
        eta_k: f64,
        state: &mut IpasState,
    ) -> Result<(bool, f64)> {
        let cs = problem.constraints();
        let obj = problem.objective();
        let sample = obj.draw_sample(self.cfg.d_size, &mut state.rng)?;
        let grad = obj.subsample_grad(&sample, x, &mut state.meter)?;
        let u = x - grad;
        let proj = self.project(cs, &u, eta_k, state)?;
        let s = &proj.point - x;
        let s_sq = s.norm_squared();
        let f_trial = value_or_inf(obj, &sample, x_trial, &mut state.meter)?;
        let f_x = obj.subsample_value(&sample, x, &mut state.meter)?;
        let accepted = f_trial <= f_x - self.cfg.c * s_sq + self.cfg.c_accept * eta_k * eta_k;
        Ok((accepted, s_sq.sqrt()))
    }

    /// Executes one iteration and returns its trace row (state of `x_k` plus
    /// the step taken from it).
    pub fn step(&self, problem: &Problem, state: &mut IpasState) -> Result<IterationRecord> {
        let cs = problem.constraints();
        let obj = problem.objective();
        let total = obj.len();
        let cfg = &self.cfg;

        let mut rec = self.observe(problem, state)?;
        let eta_k = eta(state.k, cfg.s_exp);
        let full = state.n_k >= total;
        let x = state.x.clone();

        let sample = if full { None } else { Some(obj.draw_sample(state.n_k, &mut state.rng)?) };
        let grad = match &sample {
            None => obj.full_grad(&x, &mut state.meter)?,
            Some(s) => obj.subsample_grad(s, &x, &mut state.meter)?,
        };

        let (p, proj) = search_direction(cs, &grad, &x, eta_k)?;
        self.charge_and_audit(cs, &proj, eta_k, state)?;
        rec.norm_p = p.norm();
        rec.cg_iters = proj.cg_iterations;

        if full && !descent_check(&grad, &p, cfg.c) {
            let fallback = self.project(cs, &x, eta_k, state)?;
            rec.cg_iters += fallback.cg_iterations;
            rec.unsuccessful = true;
            let e_next = cs.feasibility_gap(&fallback.point)?;
            if e_next > eta_k {
                return Err(Error::InvariantViolated {
                    k: state.k,
                    message: format!("e(x_k+1) = {e_next:e} exceeds η_k = {eta_k:e} after re-projection"),
                });
            }
            state.x = fallback.point;
            state.k += 1;
            return Ok(rec);
        }

        let slope = grad.dot(&p);
        let slack = eta_k * eta_k;
        let t = {
            let meter = &mut state.meter;
            let mut phi = |t: f64| -> Result<f64> {
                let xt = &x + &p * t;
                match &sample {
                    None => finite_or_inf(obj.full_value(&xt, meter)),
                    Some(s) => value_or_inf(obj, s, &xt, meter),
                }
            };
            let phi_0 = phi(0.0)?;
            if full {
                line_search_full(&mut phi, phi_0, slope, cfg.beta, cfg.c1, slack)?.0
            } else {
                line_search_minibatch(&mut phi, phi_0, slope, cfg.beta, cfg.c1, slack, cfg.t_min)?
            }
        };
        let x_trial = &x + &p * t;
        rec.t = t;

        let accepted = full || self.additional_sampling_test(problem, &x, &x_trial, eta_k, state)?.0;
        rec.accepted = accepted;

        if accepted {
            let e_next = cs.feasibility_gap(&x_trial)?;
            let bound = (1.0 - t) * rec.e_x + eta_k + FEASIBILITY_SLACK;
            if e_next > bound {
                return Err(Error::InvariantViolated {
                    k: state.k,
                    message: format!("e(x_k+1) = {e_next:e} exceeds (1 − t)e(x_k) + η_k = {bound:e}"),
                });
            }
            state.x = x_trial;
        } else {
            state.n_k = self.schedule.grow(state.n_k, total);
        }

        if full && rec.norm_p <= cfg.tol_d && rec.e_x <= cfg.tol_e {
            state.done = Some(RunStatus::Stationary);
        }
        state.k += 1;
        Ok(rec)
    }
}

fn finite_or_inf(v: Result<f64>) -> Result<f64> {
    match v {
        Err(Error::NonFinite { .. }) => Ok(f64::INFINITY),
        other => other,
    }
}

fn value_or_inf(obj: &FiniteSumObjective, s: &SampleIndexSet, x: &Vector, meter: &mut BudgetMeter) -> Result<f64> {
    finite_or_inf(obj.subsample_value(s, x, meter))
}

pub(crate) fn observe(
    problem: &Problem,
    x: &Vector,
    k: usize,
    n_k: usize,
    meter: &BudgetMeter,
    oracle: bool,
) -> Result<IterationRecord> {
    let cs = problem.constraints();
    let e_x = cs.feasibility_gap(x)?;
    let (norm_d_true, f_true) = if oracle {
        let obj = problem.objective();
        let g = obj.true_gradient(x)?;
        (cs.projected_direction(x, &g)?.norm(), obj.true_value(x)?)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(IterationRecord {
        k,
        n_k,
        t: 0.0,
        norm_p: 0.0,
        norm_d_true,
        e_x,
        f_true,
        scalar_products: meter.scalar_products,
        accepted: false,
        unsuccessful: false,
        cg_iters: 0,
    })
}

impl Method for Ipas {
    fn name(&self) -> &str {
        "ipas"
    }

    fn run(&self, problem: &Problem, x0: Option<&Vector>) -> Result<RunResult> {
        let mut state = self.init(problem, x0)?;
        let mut records = Vec::with_capacity(self.cfg.k_max.min(100_000) + 1);
        let mut iterates = Vec::new();
        let status = loop {
            if self.cfg.keep_iterates {
                iterates.push(state.x.clone());
            }
            if state.k >= self.cfg.k_max {
                records.push(self.observe(problem, &state)?);
                break RunStatus::MaxIterations;
            }
            match self.step(problem, &mut state) {
                Ok(rec) => records.push(rec),
                Err(e) => {
                    log::warn!("ipas run stopped at k = {}: {e}", state.k);
                    records.push(self.observe(problem, &state)?);
                    break RunStatus::Failed(e.to_string());
                }
            }
            if let Some(status) = state.done.take() {
                break status;
            }
        };
        Ok(RunResult {
            method: self.name().to_string(),
            status,
            records,
            iterates,
            projections: state.projections,
            x: state.x,
        })
    }
}
