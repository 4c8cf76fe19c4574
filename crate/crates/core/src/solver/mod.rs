//! Solver methods, their shared configuration, and the name registries.

mod config;
mod ipas;
pub mod line_search;
mod schedule;
mod trace;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub use config::{eta, validate_config, InitialSample, SolverConfig};
pub use ipas::{descent_check, search_direction, Ipas, IpasState};
pub use schedule::{Additive, Geometric, SampleSizeSchedule, ScheduleBuilder, ScheduleRegistry};
pub use trace::{read_trace_csv, write_trace_csv, IterationRecord, ProjectionAudit, RunResult, RunStatus, TRACE_HEADER};

pub(crate) use ipas::observe;

use crate::{ConstraintSet, Error, FiniteSumObjective, Result, Vector};

/// A constraint set and an objective of matching dimension.
#[derive(Debug, Clone)]
pub struct Problem {
    constraints: Arc<ConstraintSet>,
    objective: FiniteSumObjective,
}

impl Problem {
    pub fn new(constraints: ConstraintSet, objective: FiniteSumObjective) -> Result<Self> {
        Self::from_shared(Arc::new(constraints), objective)
    }

    pub fn from_shared(constraints: Arc<ConstraintSet>, objective: FiniteSumObjective) -> Result<Self> {
        if constraints.n() != objective.dim() {
            return Err(Error::DimensionMismatch(format!(
                "constraints have {} variables, objective has {}",
                constraints.n(),
                objective.dim()
            )));
        }
        Ok(Self { constraints, objective })
    }

    pub fn constraints(&self) -> &ConstraintSet {
        &self.constraints
    }

    pub fn objective(&self) -> &FiniteSumObjective {
        &self.objective
    }

    pub fn dim(&self) -> usize {
        self.constraints.n()
    }
}

/// A complete optimization method. Runs are independent: a method holds only
/// its configuration.
pub trait Method: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    /// Runs from `x0`, or from the minimum-norm feasible point when `None`.
    ///
    /// Setup errors are returned as `Err`; failures during the iteration end
    /// the run with [`RunStatus::Failed`] and the partial trace.
    fn run(&self, problem: &Problem, x0: Option<&Vector>) -> Result<RunResult>;
}

pub type MethodBuilder = fn(&SolverConfig) -> Result<Box<dyn Method>>;

/// Methods by name.
#[derive(Clone)]
pub struct MethodRegistry {
    builders: BTreeMap<String, MethodBuilder>,
}

impl MethodRegistry {
    pub fn empty() -> Self {
        Self { builders: BTreeMap::new() }
    }

    /// `ipas` and the deterministic `baseline`.
    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.register("ipas", |cfg| Ok(Box::new(Ipas::new(cfg.clone())?)));
        r.register("baseline", |cfg| Ok(Box::new(crate::Baseline::new(cfg.into())?)));
        r
    }

    pub fn register(&mut self, name: &str, builder: MethodBuilder) {
        self.builders.insert(name.to_string(), builder);
    }

    pub fn contains(&self, name: &str) -> bool {
        self.builders.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.builders.keys().map(String::as_str)
    }

    pub fn build(&self, name: &str, cfg: &SolverConfig) -> Result<Box<dyn Method>> {
        let builder = self
            .builders
            .get(name)
            .ok_or_else(|| Error::UnknownName { kind: "method", name: name.to_string() })?;
        builder(cfg)
    }
}

impl fmt::Debug for MethodRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.builders.keys()).finish()
    }
}
