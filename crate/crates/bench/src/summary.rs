//! Cross-seed statistics over trace files.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use ipas::solver::read_trace_csv;
use ipas::IterationRecord;
use serde::Serialize;

use crate::experiment::{failures_by_group, read_manifest, MANIFEST_FILE};
use crate::{BenchError, Result};

pub const THRESHOLDS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];
pub const CURVE_POINTS: usize = 101;

#[derive(Debug, Clone, PartialEq)]
pub struct CompletedRun {
    pub config_id: String,
    pub seed: u64,
    pub records: Vec<IterationRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub config_id: String,
    pub runs: usize,
    pub failed: usize,
    pub median_final_d: f64,
    pub q25_final_d: f64,
    pub q75_final_d: f64,
    pub median_budget: f64,
    pub median_final_e: f64,
    #[serde(rename = "hit_1e-1")]
    pub hit_1: f64,
    #[serde(rename = "hit_1e-2")]
    pub hit_2: f64,
    #[serde(rename = "hit_1e-3")]
    pub hit_3: f64,
    #[serde(rename = "hit_1e-4")]
    pub hit_4: f64,
}

/// Mean of `log10 ‖d‖` across runs at one budget, with a 95% band.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub config_id: String,
    pub budget: f64,
    pub mean_log10_d: f64,
    pub lower: f64,
    pub upper: f64,
    pub runs: usize,
}

/// Linear-interpolation quantile of sorted data (`q` in `[0, 1]`).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Piecewise-linear interpolant of `(xs, ys)` at `x`, for `xs` nondecreasing
/// and `xs[0] <= x <= xs[last]`.
pub fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let i = xs.partition_point(|v| *v < x);
    if i == 0 {
        return ys[0];
    }
    if i == xs.len() {
        return ys[xs.len() - 1];
    }
    if xs[i] == x {
        return ys[i];
    }
    let (x0, x1, y0, y1) = (xs[i - 1], xs[i], ys[i - 1], ys[i]);
    y0 + (x - x0) / (x1 - x0) * (y1 - y0)
}

fn log_d(r: &IterationRecord) -> f64 {
    r.norm_d_true.max(f64::MIN_POSITIVE).log10()
}

/// Mean curve over a budget grid from zero to the smallest final budget, so
/// that every run covers every grid point.
pub fn mean_curve(config_id: &str, runs: &[&CompletedRun], points: usize) -> Vec<CurvePoint> {
    let series: Vec<(Vec<f64>, Vec<f64>)> = runs
        .iter()
        .map(|r| {
            let xs = r.records.iter().map(|x| x.scalar_products as f64).collect();
            let ys = r.records.iter().map(log_d).collect();
            (xs, ys)
        })
        .collect();
    let start = series.iter().map(|(xs, _)| xs[0]).fold(f64::NEG_INFINITY, f64::max);
    let end = series.iter().map(|(xs, _)| *xs.last().unwrap()).fold(f64::INFINITY, f64::min);
    let count = if end > start { points.max(2) } else { 1 };
    (0..count)
        .map(|j| {
            let budget = if count == 1 { start } else { start + (end - start) * j as f64 / (count - 1) as f64 };
            let values: Vec<f64> = series.iter().map(|(xs, ys)| interpolate(xs, ys, budget)).collect();
            let r = values.len() as f64;
            let mean = values.iter().sum::<f64>() / r;
            let half = if values.len() > 1 {
                let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
                1.96 * var.sqrt() / r.sqrt()
            } else {
                0.0
            };
            CurvePoint { config_id: config_id.to_string(), budget, mean_log10_d: mean, lower: mean - half, upper: mean + half, runs: values.len() }
        })
        .collect()
}

fn summary_row(config_id: &str, runs: &[&CompletedRun], failed: usize) -> SummaryRow {
    let finals: Vec<&IterationRecord> = runs.iter().map(|r| r.records.last().expect("nonempty trace")).collect();
    let d = sorted(finals.iter().map(|r| r.norm_d_true).collect());
    let budget = sorted(finals.iter().map(|r| r.scalar_products as f64).collect());
    let e = sorted(finals.iter().map(|r| r.e_x).collect());
    let hit = |threshold: f64| {
        let hits = runs.iter().filter(|r| r.records.iter().any(|x| x.norm_d_true <= threshold)).count();
        hits as f64 / runs.len() as f64
    };
    SummaryRow {
        config_id: config_id.to_string(),
        runs: runs.len(),
        failed,
        median_final_d: quantile(&d, 0.5),
        q25_final_d: quantile(&d, 0.25),
        q75_final_d: quantile(&d, 0.75),
        median_budget: quantile(&budget, 0.5),
        median_final_e: quantile(&e, 0.5),
        hit_1: hit(THRESHOLDS[0]),
        hit_2: hit(THRESHOLDS[1]),
        hit_3: hit(THRESHOLDS[2]),
        hit_4: hit(THRESHOLDS[3]),
    }
}

/// Summary rows and mean curves for the groups in `ids`, in that order.
/// Every group needs at least one completed run.
pub fn summarize_runs(
    ids: &[String],
    completed: &[CompletedRun],
    failed: &BTreeMap<String, usize>,
) -> Result<(Vec<SummaryRow>, Vec<CurvePoint>)> {
    let mut rows = Vec::new();
    let mut curves = Vec::new();
    for id in ids {
        let mut group: Vec<&CompletedRun> = completed.iter().filter(|r| &r.config_id == id && !r.records.is_empty()).collect();
        if group.is_empty() {
            return Err(BenchError::EmptyGroup(id.clone()));
        }
        group.sort_by_key(|r| r.seed);
        rows.push(summary_row(id, &group, failed.get(id).copied().unwrap_or(0)));
        curves.extend(mean_curve(id, &group, CURVE_POINTS));
    }
    Ok((rows, curves))
}

/// Summarizes a directory of traces. With a `runs.csv` manifest only runs it
/// lists as completed are used; otherwise every `<id>__seed<k>.csv` file is.
pub fn summarize_dir(dir: &Path) -> Result<(Vec<SummaryRow>, Vec<CurvePoint>)> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let mut completed = Vec::new();
    let mut ids = Vec::new();
    let failed;
    if manifest_path.is_file() {
        let manifest = read_manifest(&manifest_path)?;
        failed = failures_by_group(&manifest);
        for row in &manifest {
            if !ids.contains(&row.config_id) {
                ids.push(row.config_id.clone());
            }
            if row.failed() {
                continue;
            }
            let records = read_trace_csv(File::open(dir.join(&row.file))?)?;
            completed.push(CompletedRun { config_id: row.config_id.clone(), seed: row.seed, records });
        }
    } else {
        failed = BTreeMap::new();
        let mut entries: Vec<_> = std::fs::read_dir(dir)?.collect::<std::io::Result<Vec<_>>>()?;
        entries.sort_by_key(|e| e.file_name());
        for entry in entries {
            let name = entry.file_name().to_string_lossy().into_owned();
            let Some((id, seed)) = parse_trace_name(&name) else { continue };
            let records = read_trace_csv(File::open(entry.path())?)?;
            if !ids.contains(&id) {
                ids.push(id.clone());
            }
            completed.push(CompletedRun { config_id: id, seed, records });
        }
        if ids.is_empty() {
            return Err(BenchError::EmptyGroup(format!("no traces in {}", dir.display())));
        }
    }
    summarize_runs(&ids, &completed, &failed)
}

fn parse_trace_name(name: &str) -> Option<(String, u64)> {
    let stem = name.strip_suffix(".csv")?;
    let (id, seed) = stem.rsplit_once("__seed")?;
    Some((id.to_string(), seed.parse().ok()?))
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_curves(path: &Path, points: &[CurvePoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for p in points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}
