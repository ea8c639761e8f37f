//! Builder for programs of the form `max cᵀy s.t. F_k(y) = F_k0 + Σ y_i F_ki ⪰ 0`,
//! with helpers for Hermitian and complex matrix-valued variables.
//!
//! A Hermitian `d x d` variable uses `d²` real coordinates: the diagonal
//! (`E_pp`), then for each `p < q` a real part (`E_pq + E_qp`) and an
//! imaginary part (`iE_pq − iE_qp`).

use num_complex::Complex64;

use super::conic::{solve_conic, ConicProblem, ConicSolution, SparseHermitian};
use super::SdpSettings;
use crate::linalg::{ComplexMatrix, ZERO};

const I: Complex64 = Complex64::new(0.0, 1.0);
const R1: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy)]
pub(crate) struct HermVar {
    offset: usize,
    dim: usize,
}

/// Basis element `k` of the Hermitian coordinates as matrix entries.
fn herm_basis(dim: usize, k: usize) -> Vec<(usize, usize, Complex64)> {
    if k < dim {
        return vec![(k, k, R1)];
    }
    let mut idx = k - dim;
    for p in 0..dim {
        for q in p + 1..dim {
            if idx < 2 {
                return if idx == 0 { vec![(p, q, R1), (q, p, R1)] } else { vec![(p, q, I), (q, p, -I)] };
            }
            idx -= 2;
        }
    }
    unreachable!("basis index out of range")
}

impl HermVar {
    pub fn count(&self) -> usize {
        self.dim * self.dim
    }

    fn basis(&self) -> impl Iterator<Item = (usize, Vec<(usize, usize, Complex64)>)> + '_ {
        (0..self.count()).map(move |k| (self.offset + k, herm_basis(self.dim, k)))
    }

    /// Coefficients of `y ↦ Re Tr(H(y) m)`.
    pub fn trace_with(&self, m: &ComplexMatrix) -> Vec<(usize, f64)> {
        self.basis().map(|(v, ents)| (v, ents.iter().map(|&(p, q, c)| (c * m[(q, p)]).re).sum())).collect()
    }

    /// Coefficients of `y ↦ Tr H(y)`.
    pub fn trace(&self) -> Vec<(usize, f64)> {
        (0..self.dim).map(|p| (self.offset + p, 1.0)).collect()
    }

    pub fn value(&self, y: &[f64]) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim, self.dim);
        for (v, ents) in self.basis() {
            for (p, q, c) in ents {
                m[(p, q)] += c * y[v];
            }
        }
        m
    }
}

/// Complex `rows x cols` variable; entry `(u, v)` has coordinates
/// `offset + 2(u·cols + v)` (real) and `+1` (imaginary).
#[derive(Debug, Clone, Copy)]
pub(crate) struct CplxVar {
    offset: usize,
    rows: usize,
    cols: usize,
}

impl CplxVar {
    fn coord(&self, u: usize, v: usize) -> usize {
        self.offset + 2 * (u * self.cols + v)
    }

    /// Coefficients of `y ↦ Re Tr(m Y)` for `m` of size `cols x rows`.
    pub fn re_trace_with(&self, m: &ComplexMatrix) -> Vec<(usize, f64)> {
        let mut out = Vec::with_capacity(2 * self.rows * self.cols);
        for u in 0..self.rows {
            for v in 0..self.cols {
                let w = m[(v, u)];
                out.push((self.coord(u, v), w.re));
                out.push((self.coord(u, v) + 1, -w.im));
            }
        }
        out
    }
}

struct Block {
    constant: ComplexMatrix,
    terms: Vec<(usize, usize, usize, Complex64)>,
}

#[derive(Default)]
pub(crate) struct Lmi {
    n_vars: usize,
    objective: Vec<f64>,
    blocks: Vec<Block>,
}

pub(crate) struct LmiSolution {
    pub conic: ConicSolution,
    /// Certified lower bound of the maximum (`cᵀy`).
    pub lower: f64,
    /// Upper bound from the dual (`Σ Tr(F_k0 X_k)`).
    pub upper: f64,
}

impl LmiSolution {
    pub fn y(&self) -> &[f64] {
        &self.conic.y
    }
}

impl Lmi {
    pub fn herm(&mut self, dim: usize) -> HermVar {
        let v = HermVar { offset: self.n_vars, dim };
        self.n_vars += v.count();
        self.objective.resize(self.n_vars, 0.0);
        v
    }

    pub fn cplx(&mut self, rows: usize, cols: usize) -> CplxVar {
        let v = CplxVar { offset: self.n_vars, rows, cols };
        self.n_vars += 2 * rows * cols;
        self.objective.resize(self.n_vars, 0.0);
        v
    }

    pub fn add_objective(&mut self, terms: &[(usize, f64)], scale: f64) {
        for &(v, c) in terms {
            self.objective[v] += scale * c;
        }
    }

    /// New block with the given constant term; returns its index.
    pub fn block(&mut self, constant: ComplexMatrix) -> usize {
        self.blocks.push(Block { constant, terms: Vec::new() });
        self.blocks.len() - 1
    }

    /// Scalar block `constant + Σ coeff·y ≥ 0`.
    pub fn scalar(&mut self, constant: f64, terms: &[(usize, f64)]) {
        let k = self.block(ComplexMatrix::from_element(1, 1, Complex64::new(constant, 0.0)));
        for &(v, c) in terms {
            if c != 0.0 {
                self.blocks[k].terms.push((v, 0, 0, Complex64::new(c, 0.0)));
            }
        }
    }

    /// Adds `scale · (1_left ⊗ H ⊗ 1_right)` at diagonal offset `at`.
    pub fn place_herm(&mut self, k: usize, var: HermVar, at: usize, left: usize, right: usize, scale: f64) {
        let d = var.dim;
        for (v, ents) in var.basis() {
            for (p, q, c) in ents {
                for a in 0..left {
                    for b in 0..right {
                        let r = at + (a * d + p) * right + b;
                        let s = at + (a * d + q) * right + b;
                        self.blocks[k].terms.push((v, r, s, c * scale));
                    }
                }
            }
        }
    }

    /// Places `Y` at `(row, col)` and `Y†` at `(col, row)`.
    pub fn place_offdiag(&mut self, k: usize, var: CplxVar, row: usize, col: usize) {
        for u in 0..var.rows {
            for v in 0..var.cols {
                let re = var.coord(u, v);
                let t = &mut self.blocks[k].terms;
                t.push((re, row + u, col + v, R1));
                t.push((re, col + v, row + u, R1));
                t.push((re + 1, row + u, col + v, I));
                t.push((re + 1, col + v, row + u, -I));
            }
        }
    }

    fn to_conic(&self) -> ConicProblem {
        let mut a: Vec<Vec<(usize, SparseHermitian)>> = vec![Vec::new(); self.n_vars];
        let mut block_sizes = Vec::new();
        let mut c = Vec::new();
        for (k, blk) in self.blocks.iter().enumerate() {
            block_sizes.push(blk.constant.nrows());
            c.push(blk.constant.clone());
            let mut terms = blk.terms.clone();
            terms.sort_by_key(|t| t.0);
            let mut start = 0;
            while start < terms.len() {
                let v = terms[start].0;
                let mut end = start;
                while end < terms.len() && terms[end].0 == v {
                    end += 1;
                }
                let entries =
                    terms[start..end].iter().filter(|t| t.3 != ZERO).map(|&(_, r, s, w)| (r, s, -w)).collect();
                a[v].push((k, SparseHermitian { entries }));
                start = end;
            }
        }
        ConicProblem { block_sizes, c, a, b: self.objective.clone() }
    }

    pub fn solve(&self, settings: &SdpSettings) -> LmiSolution {
        let conic = solve_conic(&self.to_conic(), settings);
        LmiSolution { lower: conic.dual_objective, upper: conic.primal_objective, conic }
    }
}
