use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::{Result, Vector};

/// One trace row.
///
/// State columns (`N_k`, `norm_d_true`, `e_x`, `f_true`, `scalar_products`)
/// describe `x_k` and the budget spent to reach it. Step columns (`t_k`,
/// `norm_p`, `accepted`, `unsuccessful`, `cg_iters`) describe iteration `k`
/// taken from `x_k`; they are zero on the final row, where no step was taken.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    #[serde(rename = "N_k")]
    pub n_k: usize,
    #[serde(rename = "t_k")]
    pub t: f64,
    pub norm_p: f64,
    pub norm_d_true: f64,
    pub e_x: f64,
    pub f_true: f64,
    pub scalar_products: u64,
    pub accepted: bool,
    pub unsuccessful: bool,
    pub cg_iters: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    MaxIterations,
    Stationary,
    Failed(String),
}

impl RunStatus {
    pub fn label(&self) -> &str {
        match self {
            RunStatus::MaxIterations => "max_iterations",
            RunStatus::Stationary => "stationary",
            RunStatus::Failed(_) => "failed",
        }
    }

    pub fn is_failure(&self) -> bool {
        matches!(self, RunStatus::Failed(_))
    }
}

/// One inexact projection as requested and as delivered.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionAudit {
    pub k: usize,
    pub eta: f64,
    pub residual_norm: f64,
    /// `e(point)` recomputed from the returned point.
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub method: String,
    pub status: RunStatus,
    pub records: Vec<IterationRecord>,
    /// `x_0, x_1, …` when `keep_iterates` is set, parallel to `records`.
    pub iterates: Vec<Vector>,
    pub projections: Vec<ProjectionAudit>,
    pub x: Vector,
}

impl RunResult {
    pub fn final_record(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    /// Budget at the first row whose `‖d(x_k)‖` is at most `threshold`.
    pub fn budget_to_reach(&self, threshold: f64) -> Option<u64> {
        self.records
            .iter()
            .find(|r| r.norm_d_true <= threshold)
            .map(|r| r.scalar_products)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_trace_csv(&self.records, w)
    }
}

pub const TRACE_HEADER: [&str; 11] = [
    "k",
    "N_k",
    "t_k",
    "norm_p",
    "norm_d_true",
    "e_x",
    "f_true",
    "scalar_products",
    "accepted",
    "unsuccessful",
    "cg_iters",
];

pub fn write_trace_csv<W: Write>(records: &[IterationRecord], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    if records.is_empty() {
        wtr.write_record(TRACE_HEADER)?;
    }
    for r in records {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_trace_csv<R: Read>(r: R) -> Result<Vec<IterationRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_matches_schema() {
        let rec = IterationRecord {
            k: 0,
            n_k: 8,
            t: 0.5,
            norm_p: 1.25,
            norm_d_true: f64::NAN,
            e_x: 1e-12,
            f_true: -3.0,
            scalar_products: 42,
            accepted: true,
            unsuccessful: false,
            cg_iters: 3,
        };
        let mut buf = Vec::new();
        write_trace_csv(std::slice::from_ref(&rec), &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), TRACE_HEADER.join(","));
        let back = read_trace_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 1);
        assert!(back[0].norm_d_true.is_nan());
        assert_eq!(back[0].scalar_products, 42);
        assert_eq!(back[0].e_x, 1e-12);
    }

    #[test]
    fn empty_trace_still_has_header() {
        let mut buf = Vec::new();
        write_trace_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim(), TRACE_HEADER.join(","));
    }
}
