use std::collections::BTreeMap;
use std::fmt;

use super::SolverConfig;
use crate::{Error, Result};

/// Picks `N_{k+1} ∈ {N_k + 1, …, N}` after a rejected trial point.
pub trait SampleSizeSchedule: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn grow(&self, current: usize, total: usize) -> usize;
}

/// `N_{k+1} = min(N, N_k + dN)`.
#[derive(Debug, Clone, Copy)]
pub struct Additive {
    pub step: usize,
}

impl SampleSizeSchedule for Additive {
    fn name(&self) -> &str {
        "additive"
    }

    fn grow(&self, current: usize, total: usize) -> usize {
        current.saturating_add(self.step.max(1)).min(total)
    }
}

/// `N_{k+1} = min(N, max(N_k + 1, ⌈γ N_k⌉))`.
#[derive(Debug, Clone, Copy)]
pub struct Geometric {
    pub factor: f64,
}

impl SampleSizeSchedule for Geometric {
    fn name(&self) -> &str {
        "geometric"
    }

    fn grow(&self, current: usize, total: usize) -> usize {
        let scaled = (current as f64 * self.factor).ceil() as usize;
        scaled.max(current + 1).min(total)
    }
}

pub type ScheduleBuilder = fn(&SolverConfig) -> Result<Box<dyn SampleSizeSchedule>>;

/// Sample-size schedules by name.
#[derive(Clone)]
pub struct ScheduleRegistry {
    builders: BTreeMap<String, ScheduleBuilder>,
}

impl ScheduleRegistry {
    pub fn empty() -> Self {
        Self { builders: BTreeMap::new() }
    }

    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.register("additive", |cfg| Ok(Box::new(Additive { step: cfg.dn })));
        r.register("geometric", |cfg| Ok(Box::new(Geometric { factor: cfg.growth })));
        r
    }

    pub fn register(&mut self, name: &str, builder: ScheduleBuilder) {
        self.builders.insert(name.to_string(), builder);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.builders.keys().map(String::as_str)
    }

    pub fn build(&self, name: &str, cfg: &SolverConfig) -> Result<Box<dyn SampleSizeSchedule>> {
        let builder = self
            .builders
            .get(name)
            .ok_or_else(|| Error::UnknownName { kind: "sample-size schedule", name: name.to_string() })?;
        builder(cfg)
    }
}

impl fmt::Debug for ScheduleRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.builders.keys()).finish()
    }
}
