//! Dense Hermitian semidefinite programming.
//!
//! [`SdpProblem`] is the user-facing standard form over a single `n x n`
//! Hermitian variable. It is lowered to the block form of [`conic`], where
//! inequality constraints get `1 x 1` slack blocks.
//!
//! # Debug dump format
//!
//! [`SdpProblem::dump`] writes plain text, one item per line:
//!
//! ```text
//! sdp-dump v1
//! sense min|max
//! dim <n>
//! constraints <m>
//! objective
//! <n rows of n entries "re,im" separated by spaces>
//! constraint <k> <eq|le|ge> <b>
//! <n rows of n entries>
//! ...
//! ```

pub mod conic;
pub(crate) mod lmi;

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_part, ComplexMatrix};
pub use conic::{solve_conic, ConicProblem, ConicSolution, SparseHermitian};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

/// Solver tolerances. A run is optimal once both feasibility residuals are
/// below `feasibility_tol` and the gap is below `gap_abs` or `gap_rel` times
/// the larger objective magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdpSettings {
    pub gap_abs: f64,
    pub gap_rel: f64,
    pub feasibility_tol: f64,
    pub infeasibility_tol: f64,
    pub max_iterations: usize,
    pub step_fraction: f64,
}

impl Default for SdpSettings {
    fn default() -> Self {
        Self {
            gap_abs: 1e-7,
            gap_rel: 1e-7,
            feasibility_tol: 1e-8,
            infeasibility_tol: 1e-8,
            max_iterations: 200,
            step_fraction: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub a: ComplexMatrix,
    pub b: f64,
    pub relation: Relation,
}

/// `min/max Re Tr(C X)` subject to `Re Tr(A_i X) {=,≤,≥} b_i`, `X ⪰ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub objective: ComplexMatrix,
    pub constraints: Vec<Constraint>,
    pub sense: Sense,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub primal_value: f64,
    pub dual_value: f64,
    pub primal_matrix: ComplexMatrix,
    /// Multipliers of the constraints, in the sign convention of the
    /// minimization form. Empty for entropy programs.
    pub dual_certificate: Vec<f64>,
    pub gap: f64,
    pub status: SdpStatus,
    pub iterations: usize,
}

impl SdpProblem {
    pub fn new(objective: ComplexMatrix, sense: Sense) -> Self {
        Self { objective, constraints: Vec::new(), sense }
    }

    pub fn with_constraint(mut self, a: ComplexMatrix, relation: Relation, b: f64) -> Self {
        self.constraints.push(Constraint { a, b, relation });
        self
    }

    pub fn dim(&self) -> usize {
        self.objective.nrows()
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim();
        let herm = |m: &ComplexMatrix| {
            m.nrows() == n
                && m.ncols() == n
                && m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
                && (m - m.adjoint()).iter().all(|z| z.norm() <= 1e-12 * (1.0 + m.norm()))
        };
        if n == 0 || !herm(&self.objective) {
            return Err(Error::Solver("objective must be a nonempty Hermitian matrix".into()));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if !herm(&c.a) || !c.b.is_finite() {
                return Err(Error::Solver(format!("constraint {i} is not an {n}x{n} Hermitian matrix")));
            }
        }
        Ok(())
    }

    fn to_conic(&self) -> ConicProblem {
        let n = self.dim();
        let sign = if self.sense == Sense::Maximize { -1.0 } else { 1.0 };
        let mut block_sizes = vec![n];
        let mut c = vec![hermitian_part(&self.objective).scale(sign)];
        let mut a = Vec::new();
        let mut b = Vec::new();
        for con in &self.constraints {
            let mut row = vec![(0, SparseHermitian::from_dense(&hermitian_part(&con.a)))];
            let slack = match con.relation {
                Relation::Eq => None,
                Relation::Le => Some(1.0),
                Relation::Ge => Some(-1.0),
            };
            if let Some(s) = slack {
                let k = block_sizes.len();
                block_sizes.push(1);
                c.push(ComplexMatrix::zeros(1, 1));
                row.push((k, SparseHermitian { entries: vec![(0, 0, Complex64::new(s, 0.0))] }));
            }
            a.push(row);
            b.push(con.b);
        }
        ConicProblem { block_sizes, c, a, b }
    }

    /// Writes the documented plain-text dump.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let n = self.dim();
        let sense = if self.sense == Sense::Minimize { "min" } else { "max" };
        let _ = writeln!(s, "sdp-dump v1\nsense {sense}\ndim {n}\nconstraints {}", self.constraints.len());
        s.push_str("objective\n");
        write_matrix(&mut s, &self.objective);
        for (k, c) in self.constraints.iter().enumerate() {
            let rel = match c.relation {
                Relation::Eq => "eq",
                Relation::Le => "le",
                Relation::Ge => "ge",
            };
            let _ = writeln!(s, "constraint {k} {rel} {:e}", c.b);
            write_matrix(&mut s, &c.a);
        }
        s
    }

    /// Parses the output of [`SdpProblem::dump`].
    pub fn from_dump(text: &str) -> Result<Self> {
        let bad = |what: &str| Error::Solver(format!("malformed dump: {what}"));
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let mut header = |key: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| bad(key))?;
            line.strip_prefix(key).map(|v| v.trim().to_string()).ok_or_else(|| bad(key))
        };
        if header("sdp-dump")? != "v1" {
            return Err(bad("version"));
        }
        let sense = match header("sense")?.as_str() {
            "min" => Sense::Minimize,
            "max" => Sense::Maximize,
            _ => return Err(bad("sense")),
        };
        let n: usize = header("dim")?.parse().map_err(|_| bad("dim"))?;
        let m: usize = header("constraints")?.parse().map_err(|_| bad("constraints"))?;
        header("objective")?;
        let read_matrix = |lines: &mut dyn Iterator<Item = &str>| -> Result<ComplexMatrix> {
            let mut mat = ComplexMatrix::zeros(n, n);
            for i in 0..n {
                let row = lines.next().ok_or_else(|| bad("matrix row"))?;
                let vals: Vec<&str> = row.split_whitespace().collect();
                if vals.len() != n {
                    return Err(bad("row length"));
                }
                for (j, v) in vals.iter().enumerate() {
                    let (re, im) = v.split_once(',').ok_or_else(|| bad("entry"))?;
                    mat[(i, j)] =
                        Complex64::new(re.parse().map_err(|_| bad("entry"))?, im.parse().map_err(|_| bad("entry"))?);
                }
            }
            Ok(mat)
        };
        let objective = read_matrix(&mut lines)?;
        let mut problem = SdpProblem::new(objective, sense);
        for _ in 0..m {
            let line = lines.next().ok_or_else(|| bad("constraint"))?;
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "constraint" {
                return Err(bad("constraint header"));
            }
            let relation = match parts[2] {
                "eq" => Relation::Eq,
                "le" => Relation::Le,
                "ge" => Relation::Ge,
                _ => return Err(bad("relation")),
            };
            let b: f64 = parts[3].parse().map_err(|_| bad("rhs"))?;
            let a = read_matrix(&mut lines)?;
            problem.constraints.push(Constraint { a, b, relation });
        }
        Ok(problem)
    }
}

fn write_matrix(s: &mut String, m: &ComplexMatrix) {
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:e},{:e}", m[(i, j)].re, m[(i, j)].im)).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
}

pub fn solve(problem: &SdpProblem) -> Result<SdpSolution> {
    solve_with(problem, &SdpSettings::default())
}

/// Solves the problem. Infeasibility, unboundedness and stalls are reported
/// through [`SdpSolution::status`]; only malformed input is an `Err`.
pub fn solve_with(problem: &SdpProblem, settings: &SdpSettings) -> Result<SdpSolution> {
    problem.validate()?;
    let conic = problem.to_conic();
    let sol = solve_conic(&conic, settings);
    let sign = if problem.sense == Sense::Maximize { -1.0 } else { 1.0 };
    Ok(SdpSolution {
        primal_value: sign * sol.primal_objective,
        dual_value: sign * sol.dual_objective,
        gap: sol.gap(),
        primal_matrix: sol.x[0].clone(),
        dual_certificate: sol.y.clone(),
        status: sol.status,
        iterations: sol.iterations,
    })
}
