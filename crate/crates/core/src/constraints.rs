//! The affine feasible set `{x : Ax = b}` and projections onto it.

use std::io::{BufRead, Write};

use nalgebra::Cholesky;

use crate::cg::cg_solve_checked;
use crate::{Error, Matrix, Result, Vector};

/// Smallest admissible pivot of `AAᵀ`, relative to the largest.
const RANK_PIVOT_TOL: f64 = 1e-12;

/// Full-row-rank linear equality constraints with a cached Cholesky factor
/// of `AAᵀ`. The factor is used by the exact projection oracle only.
#[derive(Debug, Clone)]
pub struct ConstraintSet {
    a: Matrix,
    b: Vector,
    chol: Cholesky<f64, nalgebra::Dyn>,
}

/// Output of [`ConstraintSet::inexact_project`].
#[derive(Debug, Clone)]
pub struct ProjectionResult {
    pub point: Vector,
    /// `‖r(y)‖ = ‖AAᵀλ̃ − (Ay − b)‖`, identical to the feasibility gap of `point`.
    pub residual_norm: f64,
    pub cg_iterations: usize,
    pub multiplier: Vector,
}

impl ConstraintSet {
    pub fn new(a: Matrix, b: Vector) -> Result<Self> {
        let (m, n) = a.shape();
        if m == 0 || n == 0 {
            return Err(Error::DimensionMismatch(format!("empty constraint matrix {m}x{n}")));
        }
        if b.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "A has {m} rows but b has length {}",
                b.len()
            )));
        }
        if m > n {
            return Err(Error::RankDeficient(format!("{m} rows exceed {n} columns")));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::DimensionMismatch("non-finite entry in A or b".into()));
        }
        let gram = &a * a.transpose();
        let chol = Cholesky::new(gram)
            .ok_or_else(|| Error::RankDeficient("AAᵀ is not positive definite".into()))?;
        let pivots: Vec<f64> = chol.l_dirty().diagonal().iter().map(|d| d * d).collect();
        let max = pivots.iter().cloned().fold(0.0, f64::max);
        let min = pivots.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(min > RANK_PIVOT_TOL * max) {
            return Err(Error::RankDeficient(format!(
                "pivot ratio {:.3e} below {RANK_PIVOT_TOL:e}",
                min / max
            )));
        }
        Ok(Self { a, b, chol })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Vector {
        &self.b
    }

    /// Number of constraints.
    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    /// Number of variables.
    pub fn n(&self) -> usize {
        self.a.ncols()
    }

    /// Lower-triangular factor `L` with `LLᵀ = AAᵀ`.
    pub fn cholesky_factor(&self) -> Matrix {
        self.chol.l()
    }

    fn check_dim(&self, x: &Vector, what: &str) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "{what} has length {} but the constraint set has {} variables",
                x.len(),
                self.n()
            )));
        }
        Ok(())
    }

    /// `Ax − b`.
    pub fn violation(&self, x: &Vector) -> Result<Vector> {
        self.check_dim(x, "point")?;
        Ok(&self.a * x - &self.b)
    }

    /// Feasibility measure `e(x) = ‖Ax − b‖`.
    pub fn feasibility_gap(&self, x: &Vector) -> Result<f64> {
        Ok(self.violation(x)?.norm())
    }

    /// Orthogonal projection `y − Aᵀ(AAᵀ)⁻¹(Ay − b)` through the cached factor.
    pub fn exact_project(&self, y: &Vector) -> Result<Vector> {
        let rhs = self.violation(y)?;
        let lambda = self.chol.solve(&rhs);
        Ok(y - self.a.tr_mul(&lambda))
    }

    /// `Aᵀ(AAᵀ)⁻¹b`, the feasible point closest to the origin.
    pub fn min_norm_feasible(&self) -> Vector {
        self.a.tr_mul(&self.chol.solve(&self.b))
    }

    /// Projected-gradient direction `π_S(x − g) − x` computed exactly.
    pub fn projected_direction(&self, x: &Vector, g: &Vector) -> Result<Vector> {
        self.check_dim(g, "gradient")?;
        Ok(self.exact_project(&(x - g))? - x)
    }

    /// Inexact projection: conjugate gradient on `AAᵀλ = Ay − b` from `λ = 0`
    /// until the residual is at most `eta`, then `point = y − Aᵀλ̃`.
    ///
    /// The iteration cap is `10·m`; failing to reach `eta` within it is
    /// reported as [`Error::CgStalled`].
    pub fn inexact_project(&self, y: &Vector, eta: f64) -> Result<ProjectionResult> {
        if !(eta > 0.0) {
            return Err(Error::ConfigInvalid(format!("projection tolerance must be positive, got {eta}")));
        }
        let rhs = self.violation(y)?;
        let max_iter = 10 * self.m();
        // r(y) = AAᵀλ − (Ay − b) = −(A(y − Aᵀλ) − b), so the residual is
        // measured as the feasibility gap of the candidate point.
        let gap = |lambda: &Vector| (&self.a * (y - self.a.tr_mul(lambda)) - &self.b).norm();
        let out = cg_solve_checked(
            |v| &self.a * self.a.tr_mul(v),
            &rhs,
            eta,
            max_iter,
            gap,
        );
        if !out.converged {
            return Err(Error::CgStalled {
                iterations: out.iterations,
                residual: out.residual_norm,
                tolerance: eta,
            });
        }
        let point = y - self.a.tr_mul(&out.solution);
        Ok(ProjectionResult {
            point,
            residual_norm: out.residual_norm,
            cg_iterations: out.iterations,
            multiplier: out.solution,
        })
    }

    /// Reads the plain-text format: `m n`, then `m` rows of `A`, then `b`.
    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let values = trimmed
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|e| Error::Parse {
                        line: idx + 1,
                        message: format!("`{tok}`: {e}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push((idx + 1, values));
        }
        let (header_line, header) = rows
            .first()
            .ok_or(Error::Parse { line: 1, message: "missing `m n` header".into() })?;
        let dims: Vec<usize> = header
            .iter()
            .map(|v| if v.fract() == 0.0 && *v >= 0.0 { Some(*v as usize) } else { None })
            .collect::<Option<_>>()
            .filter(|d: &Vec<usize>| d.len() == 2)
            .ok_or(Error::Parse { line: *header_line, message: "header must be `m n`".into() })?;
        let (m, n) = (dims[0], dims[1]);
        if rows.len() != m + 2 {
            return Err(Error::Parse {
                line: rows.last().map_or(1, |r| r.0),
                message: format!("expected {} data rows, found {}", m + 1, rows.len() - 1),
            });
        }
        let mut a = Matrix::zeros(m, n);
        for (i, (line, row)) in rows[1..=m].iter().enumerate() {
            if row.len() != n {
                return Err(Error::Parse { line: *line, message: format!("expected {n} values") });
            }
            for (j, v) in row.iter().enumerate() {
                a[(i, j)] = *v;
            }
        }
        let (line, b_row) = &rows[m + 1];
        if b_row.len() != m {
            return Err(Error::Parse { line: *line, message: format!("expected {m} values for b") });
        }
        Self::new(a, Vector::from_vec(b_row.clone()))
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {}", self.m(), self.n())?;
        for i in 0..self.m() {
            let row: Vec<String> = self.a.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        let b: Vec<String> = self.b.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", b.join(" "))?;
        Ok(())
    }
}
