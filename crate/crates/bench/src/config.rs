//! Experiment configuration files.
//!
//! A config names one problem family, the solver settings shared by every
//! run, the sweep axes to cross and the seeds to repeat each grid point with.
//! See `configs/` for annotated examples.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ipas::{validate_config, MethodRegistry, SolverConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{BenchError, Result};

pub const OUTPUT_DIR_ENV: &str = "IPAS_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "results";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Where traces go unless `--out` is given. Relative paths resolve against
    /// the working directory.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_methods")]
    pub methods: Vec<String>,
    pub problem: ProblemSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub sweep: Sweep,
}

fn default_methods() -> Vec<String> {
    vec!["ipas".to_string()]
}

fn default_m_fraction() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    /// A LIBSVM file. Relative paths resolve against the config file.
    Logistic {
        dataset: PathBuf,
        #[serde(default = "default_m_fraction")]
        m_fraction: f64,
        #[serde(default)]
        constraint_seed: u64,
    },
    SyntheticLogistic {
        samples: usize,
        features: usize,
        #[serde(default = "default_m_fraction")]
        m_fraction: f64,
        #[serde(default)]
        data_seed: u64,
        #[serde(default)]
        constraint_seed: u64,
    },
    NoisyQuadratic {
        n: usize,
        #[serde(default)]
        m: Option<usize>,
        #[serde(default = "default_m_fraction")]
        m_fraction: f64,
        components: usize,
        sigma: f64,
        /// Seeds the base quadratic and the frozen noise draws.
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        constraint_seed: u64,
    },
}

impl ProblemSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ProblemSpec::Logistic { .. } => "logistic",
            ProblemSpec::SyntheticLogistic { .. } => "synthetic_logistic",
            ProblemSpec::NoisyQuadratic { .. } => "noisy_quadratic",
        }
    }

    pub fn has_sigma(&self) -> bool {
        matches!(self, ProblemSpec::NoisyQuadratic { .. })
    }

    fn with_sigma(&self, value: f64) -> Self {
        let mut out = self.clone();
        if let ProblemSpec::NoisyQuadratic { sigma, .. } = &mut out {
            *sigma = value;
        }
        out
    }
}

/// Axes crossed into the run grid. An empty axis keeps the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweep {
    pub s_exp: Vec<f64>,
    pub dn: Vec<usize>,
    pub sigma: Vec<f64>,
}

/// One fully resolved grid point: everything but the seed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    pub id: String,
    pub method: String,
    pub problem: ProblemSpec,
    pub solver: SolverConfig,
}

impl GridPoint {
    /// First 16 hex digits of the SHA-256 of the resolved settings.
    pub fn hash(&self) -> String {
        let text = toml::to_string(self).expect("grid points serialize");
        let digest = Sha256::digest(text.as_bytes());
        hex::encode(&digest[..8])
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Reads and validates a config. Dataset paths are made relative to the
    /// directory holding the file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let ProblemSpec::Logistic { dataset, .. } = &mut cfg.problem {
            if dataset.is_relative() {
                let base = path.parent().unwrap_or(Path::new(""));
                *dataset = base.join(&*dataset);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks everything that can be checked without running. Returns
    /// warnings that do not prevent a run.
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.seeds.is_empty() {
            return Err(BenchError::Config("seeds must not be empty".into()));
        }
        let mut seen = self.seeds.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.seeds.len() {
            return Err(BenchError::Config("seeds must be distinct".into()));
        }
        if self.methods.is_empty() {
            return Err(BenchError::Config("methods must not be empty".into()));
        }
        let registry = MethodRegistry::with_defaults();
        for m in &self.methods {
            if !registry.contains(m) {
                let known: Vec<_> = registry.names().collect();
                return Err(BenchError::Config(format!("unknown method {m:?}; known: {}", known.join(", "))));
            }
        }
        if !self.sweep.sigma.is_empty() && !self.problem.has_sigma() {
            return Err(BenchError::Config(format!("sigma cannot be swept for a {} problem", self.problem.kind())));
        }
        for sigma in &self.sweep.sigma {
            if !(*sigma >= 0.0) {
                return Err(BenchError::Config(format!("sigma must be nonnegative, got {sigma}")));
            }
        }
        match &self.problem {
            ProblemSpec::Logistic { dataset, m_fraction, .. } => {
                check_fraction(*m_fraction)?;
                if !dataset.is_file() {
                    return Err(BenchError::Config(format!("dataset {} is not readable", dataset.display())));
                }
            }
            ProblemSpec::SyntheticLogistic { samples, features, m_fraction, .. } => {
                check_fraction(*m_fraction)?;
                if *samples < 2 || *features == 0 {
                    return Err(BenchError::Config("synthetic dataset needs at least 2 samples and 1 feature".into()));
                }
            }
            ProblemSpec::NoisyQuadratic { n, m, m_fraction, components, sigma, .. } => {
                check_fraction(*m_fraction)?;
                if *n == 0 || *components < 2 {
                    return Err(BenchError::Config("noisy quadratic needs n >= 1 and at least 2 components".into()));
                }
                if let Some(m) = m {
                    if *m == 0 || m > n {
                        return Err(BenchError::Config(format!("need 1 <= m <= n, got m = {m}, n = {n}")));
                    }
                }
                if !(*sigma >= 0.0) {
                    return Err(BenchError::Config(format!("sigma must be nonnegative, got {sigma}")));
                }
            }
        }
        let mut warnings = Vec::new();
        for point in self.grid() {
            registry
                .build(&point.method, &point.solver)
                .map_err(|e| BenchError::Config(format!("{}: {e}", point.id)))?;
            for w in validate_config(&point.solver, None)? {
                warnings.push(format!("{}: {w}", point.id));
            }
        }
        Ok(warnings)
    }

    /// The cross product of methods and sweep axes, in a fixed order.
    pub fn grid(&self) -> Vec<GridPoint> {
        let s_values = axis(&self.sweep.s_exp, self.solver.s_exp);
        let dn_values = axis(&self.sweep.dn, self.solver.dn);
        let sigma_values: Vec<Option<f64>> = if self.sweep.sigma.is_empty() {
            vec![None]
        } else {
            self.sweep.sigma.iter().copied().map(Some).collect()
        };
        let mut out = Vec::new();
        for method in &self.methods {
            for &s in &s_values {
                for &dn in &dn_values {
                    for &sigma in &sigma_values {
                        let solver = SolverConfig { s_exp: s, dn, ..self.solver.clone() };
                        let problem = sigma.map_or_else(|| self.problem.clone(), |v| self.problem.with_sigma(v));
                        let mut id = format!("{method}_s{s}_dn{dn}");
                        if let ProblemSpec::NoisyQuadratic { sigma, .. } = &problem {
                            let _ = write!(id, "_sigma{sigma}");
                        }
                        out.push(GridPoint { id, method: method.clone(), problem, solver });
                    }
                }
            }
        }
        out
    }

    /// `--out`, then the config, then the environment, then `results`.
    pub fn resolve_output_dir(&self, cli: Option<&Path>) -> PathBuf {
        if let Some(p) = cli {
            return p.to_path_buf();
        }
        if let Some(p) = &self.output_dir {
            return p.clone();
        }
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(v) if !v.is_empty() => PathBuf::from(v),
            _ => PathBuf::from(DEFAULT_OUTPUT_DIR),
        }
    }
}

fn axis<T: Copy>(values: &[T], base: T) -> Vec<T> {
    if values.is_empty() { vec![base] } else { values.to_vec() }
}

fn check_fraction(f: f64) -> Result<()> {
    if f > 0.0 && f <= 1.0 {
        Ok(())
    } else {
        Err(BenchError::Config(format!("m_fraction must lie in (0, 1], got {f}")))
    }
}
