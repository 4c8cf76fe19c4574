use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use ipas::problems::{constraint_count, generate_constraints, load_libsvm, LogisticDataset, NoisyQuadratic};
use ipas::{ConstraintSet, MethodRegistry, Problem, RunResult};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, GridPoint, ProblemSpec};
use crate::summary::{summarize_runs, write_curves, write_summary, CompletedRun};
use crate::{BenchError, Result};

pub const MANIFEST_FILE: &str = "runs.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const CURVES_FILE: &str = "curves.csv";

/// One row of `runs.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub config_id: String,
    pub config_hash: String,
    pub method: String,
    pub seed: u64,
    pub status: String,
    pub file: String,
    pub iterations: usize,
    pub final_budget: u64,
    pub message: String,
}

impl ManifestRow {
    pub fn failed(&self) -> bool {
        self.status == "failed" || self.status == "error"
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub output_dir: PathBuf,
    pub manifest: Vec<ManifestRow>,
}

impl ExperimentOutcome {
    pub fn failures(&self) -> usize {
        self.manifest.iter().filter(|r| r.failed()).count()
    }
}

pub fn trace_file_name(config_id: &str, seed: u64) -> String {
    format!("{config_id}__seed{seed}.csv")
}

/// Materializes problem instances. Datasets are loaded once; instances are
/// shared by every seed of a grid point.
struct ProblemCache {
    dataset: Option<Arc<LogisticDataset>>,
    built: BTreeMap<String, Problem>,
}

impl ProblemCache {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let dataset = match &cfg.problem {
            ProblemSpec::Logistic { dataset, .. } => Some(Arc::new(load_libsvm(dataset)?)),
            ProblemSpec::SyntheticLogistic { samples, features, data_seed, .. } => {
                Some(Arc::new(LogisticDataset::synthetic(*samples, *features, *data_seed)?))
            }
            ProblemSpec::NoisyQuadratic { .. } => None,
        };
        Ok(Self { dataset, built: BTreeMap::new() })
    }

    fn get(&mut self, spec: &ProblemSpec) -> Result<Problem> {
        let key = toml::to_string(spec).expect("problem specs serialize");
        if let Some(p) = self.built.get(&key) {
            return Ok(p.clone());
        }
        let problem = match spec {
            ProblemSpec::Logistic { m_fraction, constraint_seed, .. }
            | ProblemSpec::SyntheticLogistic { m_fraction, constraint_seed, .. } => {
                let ds = self.dataset.as_ref().expect("logistic dataset loaded");
                let n = ds.features();
                let cs = generate_constraints(n, constraint_count(n, *m_fraction), *constraint_seed)?;
                let obj = ipas::FiniteSumObjective::uniform(ds.clone())?;
                Problem::new(cs, obj)?
            }
            ProblemSpec::NoisyQuadratic { n, m, m_fraction, components, sigma, seed, constraint_seed } => {
                let m = m.unwrap_or_else(|| constraint_count(*n, *m_fraction));
                let cs: ConstraintSet = generate_constraints(*n, m, *constraint_seed)?;
                let obj = NoisyQuadratic::generate(*n, *components, *sigma, *seed).into_objective();
                Problem::new(cs, obj)?
            }
        };
        self.built.insert(key, problem.clone());
        Ok(problem)
    }
}

struct Job {
    point: usize,
    seed: u64,
}

fn run_one(registry: &MethodRegistry, point: &GridPoint, problem: &Problem, seed: u64) -> ipas::Result<RunResult> {
    let solver = ipas::SolverConfig { seed, ..point.solver.clone() };
    let method = registry.build(&point.method, &solver)?;
    method.run(problem, None)
}

/// Runs every grid point for every seed on a pool of `workers` threads
/// (available parallelism when `None`), then writes the manifest, the
/// summary and the mean curves into `output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig, output_dir: &Path, workers: Option<usize>) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    fs::create_dir_all(output_dir)?;
    let grid = cfg.grid();
    let mut cache = ProblemCache::new(cfg)?;
    let problems = grid.iter().map(|g| cache.get(&g.problem)).collect::<Result<Vec<_>>>()?;
    let hashes: Vec<String> = grid.iter().map(GridPoint::hash).collect();
    let jobs: Vec<Job> = (0..grid.len())
        .flat_map(|point| cfg.seeds.iter().map(move |&seed| Job { point, seed }))
        .collect();

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = workers {
        builder = builder.num_threads(k.max(1));
    }
    let pool = builder.build().map_err(|e| BenchError::Config(format!("worker pool: {e}")))?;
    let registry = MethodRegistry::with_defaults();

    log::info!("running {} runs over {} grid points", jobs.len(), grid.len());
    let results: Vec<Result<(ManifestRow, Option<CompletedRun>)>> = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let point = &grid[job.point];
                let file = trace_file_name(&point.id, job.seed);
                let mut row = ManifestRow {
                    config_id: point.id.clone(),
                    config_hash: hashes[job.point].clone(),
                    method: point.method.clone(),
                    seed: job.seed,
                    status: String::new(),
                    file: file.clone(),
                    iterations: 0,
                    final_budget: 0,
                    message: String::new(),
                };
                match run_one(&registry, point, &problems[job.point], job.seed) {
                    Ok(run) => {
                        let out = BufWriter::new(File::create(output_dir.join(&file))?);
                        run.write_csv(out)?;
                        let last = run.final_record().expect("runs record the initial state");
                        row.status = run.status.label().to_string();
                        row.iterations = last.k;
                        row.final_budget = last.scalar_products;
                        if let ipas::RunStatus::Failed(msg) = &run.status {
                            row.message = msg.clone();
                            log::warn!("{} seed {}: {msg}", point.id, job.seed);
                            Ok((row, None))
                        } else {
                            let done = CompletedRun { config_id: point.id.clone(), seed: job.seed, records: run.records };
                            Ok((row, Some(done)))
                        }
                    }
                    Err(e) => {
                        log::error!("{} seed {}: {e}", point.id, job.seed);
                        row.status = "error".to_string();
                        row.file = String::new();
                        row.message = e.to_string();
                        Ok((row, None))
                    }
                }
            })
            .collect()
    });

    let mut manifest = Vec::with_capacity(results.len());
    let mut completed = Vec::new();
    for r in results {
        let (row, run) = r?;
        manifest.push(row);
        completed.extend(run);
    }
    write_manifest(&output_dir.join(MANIFEST_FILE), &manifest)?;

    let failed = failures_by_group(&manifest);
    let mut ids = Vec::new();
    for g in &grid {
        if completed.iter().any(|c| c.config_id == g.id) {
            ids.push(g.id.clone());
        } else {
            log::warn!("{}: no completed runs, left out of the summary", g.id);
        }
    }
    let (rows, curves) = summarize_runs(&ids, &completed, &failed)?;
    write_summary(&output_dir.join(SUMMARY_FILE), &rows)?;
    write_curves(&output_dir.join(CURVES_FILE), &curves)?;
    Ok(ExperimentOutcome { output_dir: output_dir.to_path_buf(), manifest })
}

pub fn failures_by_group(manifest: &[ManifestRow]) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for row in manifest {
        let entry = out.entry(row.config_id.clone()).or_insert(0);
        if row.failed() {
            *entry += 1;
        }
    }
    out
}

pub fn write_manifest(path: &Path, rows: &[ManifestRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        out.push(row?);
    }
    Ok(out)
}
