//! Stochastic projected-gradient optimization of weighted finite sums over
//! an affine set `{x : Ax = b}`.
//!
//! The main method, IPAS (inexact projection with additional sampling),
//! works on a subsample of the sum whose size grows only when an
//! independent small check sample rejects a trial point. Projections onto
//! the constraint set are computed inexactly with conjugate gradient on the
//! normal equations, with a tolerance that shrinks along the iterations.
//!
//! Methods and sample-size schedules are selected by name through
//! [`MethodRegistry`] and [`ScheduleRegistry`].
//!
//! ```
//! use ipas::{problems, MethodRegistry, Problem, SolverConfig};
//!
//! let cs = problems::generate_constraints(6, 3, 11).unwrap();
//! let obj = problems::NoisyQuadratic::generate(6, 200, 0.1, 5).into_objective();
//! let problem = Problem::new(cs, obj).unwrap();
//! let cfg = SolverConfig { k_max: 50, ..SolverConfig::default() };
//! let method = MethodRegistry::with_defaults().build("ipas", &cfg).unwrap();
//! let result = method.run(&problem, None).unwrap();
//! assert_eq!(result.records.len(), 51);
//! ```

// Range checks are negated so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod cg;
pub mod constraints;
mod error;
pub mod objective;
pub mod problems;
pub mod solver;

pub use baseline::Baseline;
pub use constraints::{ConstraintSet, ProjectionResult};
pub use error::{Error, Result};
pub use objective::{BudgetMeter, ComponentFunction, FiniteSumObjective, SampleIndexSet};
pub use solver::{
    eta, validate_config, Ipas, IterationRecord, Method, MethodRegistry, Problem, RunResult,
    RunStatus, SampleSizeSchedule, ScheduleRegistry, SolverConfig,
};

pub type Vector = nalgebra::DVector<f64>;
pub type Matrix = nalgebra::DMatrix<f64>;
