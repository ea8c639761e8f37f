//! Primal-dual interior-point method for block-diagonal Hermitian SDPs.
//!
//! ```text
//! (P)  min  Σ_k Re Tr(C_k X_k)   s.t.  Σ_k Re Tr(A_ik X_k) = b_i,  X_k ⪰ 0
//! (D)  max  bᵀy                  s.t.  Z_k = C_k − Σ_i y_i A_ik ⪰ 0
//! ```
//!
//! Search direction is HKM with a Mehrotra predictor-corrector; the Schur
//! complement is factored densely. Infeasibility is detected from diverging
//! iterates: a dual ray (bᵀy → ∞ with A*(y) + Z bounded) certifies primal
//! infeasibility, a primal ray (⟨C,X⟩ → −∞ with A(X) bounded) certifies
//! dual infeasibility.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;

use super::{SdpSettings, SdpStatus};
use crate::linalg::{eigvalsh, hermitian_part, ComplexMatrix, ZERO};

/// Hermitian matrix as a list of `(row, col, value)` entries. Both triangles
/// are listed explicitly; repeated positions add up.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseHermitian {
    pub entries: Vec<(usize, usize, Complex64)>,
}

impl SparseHermitian {
    pub fn from_dense(m: &ComplexMatrix) -> Self {
        let mut entries = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if m[(i, j)] != ZERO {
                    entries.push((i, j, m[(i, j)]));
                }
            }
        }
        Self { entries }
    }

    pub fn to_dense(&self, n: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(n, n);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    /// `Re Tr(self · w)` for any square `w`.
    pub fn re_trace_with(&self, w: &ComplexMatrix) -> f64 {
        self.entries.iter().map(|&(r, c, v)| (v * w[(c, r)]).re).sum()
    }

    pub fn frobenius_norm(&self, n: usize) -> f64 {
        self.to_dense(n).norm()
    }
}

#[derive(Debug, Clone, Default)]
pub struct ConicProblem {
    pub block_sizes: Vec<usize>,
    pub c: Vec<ComplexMatrix>,
    /// Constraint `i` is the list of its nonzero blocks `(k, A_ik)`.
    pub a: Vec<Vec<(usize, SparseHermitian)>>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub status: SdpStatus,
    pub x: Vec<ComplexMatrix>,
    pub y: Vec<f64>,
    pub z: Vec<ComplexMatrix>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub iterations: usize,
}

impl ConicSolution {
    pub fn gap(&self) -> f64 {
        (self.primal_objective - self.dual_objective).abs()
    }
}

type Blocks = Vec<ComplexMatrix>;

/// Iterations without a new best iterate before giving up.
const STALL_WINDOW: usize = 15;

impl ConicProblem {
    pub fn num_constraints(&self) -> usize {
        self.b.len()
    }

    fn zeros(&self) -> Blocks {
        self.block_sizes.iter().map(|&n| ComplexMatrix::zeros(n, n)).collect()
    }

    /// `A(W)_i = Σ_k Re Tr(A_ik W_k)`.
    fn apply_a(&self, w: &[ComplexMatrix]) -> Vec<f64> {
        self.a.iter().map(|row| row.iter().map(|(k, a)| a.re_trace_with(&w[*k])).sum()).collect()
    }

    /// `A*(y)_k = Σ_i y_i A_ik`.
    fn apply_at(&self, y: &[f64]) -> Blocks {
        let mut out = self.zeros();
        for (i, row) in self.a.iter().enumerate() {
            if y[i] == 0.0 {
                continue;
            }
            for (k, a) in row {
                for &(r, c, v) in &a.entries {
                    out[*k][(r, c)] += v * y[i];
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.c.len() != self.block_sizes.len() {
            return Err("objective block count mismatch".into());
        }
        if self.a.len() != self.b.len() {
            return Err("constraint count mismatch".into());
        }
        for (k, (c, &n)) in self.c.iter().zip(&self.block_sizes).enumerate() {
            if n == 0 || c.nrows() != n || c.ncols() != n {
                return Err(format!("objective block {k} has wrong size"));
            }
        }
        for (i, row) in self.a.iter().enumerate() {
            for (k, a) in row {
                let n = *self.block_sizes.get(*k).ok_or(format!("constraint {i} names block {k}"))?;
                if a.entries.iter().any(|&(r, c, _)| r >= n || c >= n) {
                    return Err(format!("constraint {i} has an entry outside block {k}"));
                }
            }
        }
        Ok(())
    }
}

fn inner(a: &[ComplexMatrix], b: &[ComplexMatrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dotc(y).re).sum()
}

fn frob(a: &[ComplexMatrix]) -> f64 {
    a.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
}

fn vnorm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn hpd_inverse(m: &ComplexMatrix) -> Option<ComplexMatrix> {
    if m.nrows() == 1 {
        let v = m[(0, 0)].re;
        return (v > 0.0).then(|| ComplexMatrix::from_element(1, 1, Complex64::new(1.0 / v, 0.0)));
    }
    Cholesky::new(m.clone()).map(|c| hermitian_part(&c.inverse()))
}

/// Largest `α` with `x + α d ⪰ 0` (infinite if `d ⪰ 0`).
fn max_step(x: &ComplexMatrix, d: &ComplexMatrix) -> Option<f64> {
    if x.nrows() == 1 {
        let (xv, dv) = (x[(0, 0)].re, d[(0, 0)].re);
        return Some(if dv < 0.0 { -xv / dv } else { f64::INFINITY });
    }
    let chol = Cholesky::new(x.clone())?;
    let l = chol.l();
    let t = l.solve_lower_triangular(d)?;
    let s = l.solve_lower_triangular(&t.adjoint())?;
    let lmin = eigvalsh(&s)[0];
    Some(if lmin < 0.0 { -1.0 / lmin } else { f64::INFINITY })
}

struct Schur {
    chol: Option<DMatrix<f64>>,
    lu: Option<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
}

impl Schur {
    fn solve(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        let v = DVector::from_column_slice(rhs);
        let sol = match (&self.chol, &self.lu) {
            (Some(l), _) => {
                let t = l.solve_lower_triangular(&v)?;
                l.tr_solve_lower_triangular(&t)?
            }
            (None, Some(lu)) => lu.solve(&v)?,
            _ => return None,
        };
        sol.iter().all(|x| x.is_finite()).then(|| sol.iter().copied().collect())
    }
}

/// Right-looking blocked Cholesky; the trailing update goes through `gemm`.
/// Returns the lower factor.
fn blocked_cholesky(mut a: DMatrix<f64>) -> Option<DMatrix<f64>> {
    const NB: usize = 64;
    let n = a.nrows();
    let mut k = 0;
    while k < n {
        let kb = NB.min(n - k);
        let l11 = Cholesky::new(a.view((k, k), (kb, kb)).into_owned())?.unpack();
        a.view_mut((k, k), (kb, kb)).copy_from(&l11);
        if k + kb < n {
            let rest = n - k - kb;
            let x = l11.solve_lower_triangular(&a.view((k + kb, k), (rest, kb)).transpose())?;
            let l21 = x.transpose();
            a.view_mut((k + kb, k), (rest, kb)).copy_from(&l21);
            a.view_mut((k + kb, k + kb), (rest, rest)).gemm(-1.0, &l21, &x, 1.0);
        }
        k += kb;
    }
    a.fill_upper_triangle(0.0, 1);
    Some(a)
}

struct Solver<'a> {
    p: &'a ConicProblem,
    s: &'a SdpSettings,
    /// Per block, the constraints touching it as `(i, position in a[i])`.
    by_block: Vec<Vec<(usize, usize)>>,
    n_total: f64,
}

impl<'a> Solver<'a> {
    fn new(p: &'a ConicProblem, s: &'a SdpSettings) -> Self {
        let mut by_block = vec![Vec::new(); p.block_sizes.len()];
        for (i, row) in p.a.iter().enumerate() {
            for (pos, (k, _)) in row.iter().enumerate() {
                by_block[*k].push((i, pos));
            }
        }
        let n_total = p.block_sizes.iter().sum::<usize>() as f64;
        Self { p, s, by_block, n_total }
    }

    fn initial_point(&self) -> (Blocks, Vec<f64>, Blocks) {
        let p = self.p;
        let mut x = Vec::new();
        let mut z = Vec::new();
        for (k, &n) in p.block_sizes.iter().enumerate() {
            let nf = n as f64;
            let mut xi = 10f64.max(nf.sqrt());
            let mut eta = 10f64.max(nf.sqrt()).max(p.c[k].norm());
            for &(i, pos) in &self.by_block[k] {
                let na = p.a[i][pos].1.frobenius_norm(n);
                xi = xi.max(nf * (1.0 + p.b[i].abs()) / (1.0 + na));
                eta = eta.max(na);
            }
            x.push(ComplexMatrix::identity(n, n).scale(xi));
            z.push(ComplexMatrix::identity(n, n).scale(eta));
        }
        (x, vec![0.0; p.num_constraints()], z)
    }

    /// `M_ij = Σ_k Re Tr(A_ik Z_k⁻¹ A_jk X_k)`, symmetrized.
    fn schur(&self, zinv: &[ComplexMatrix], x: &[ComplexMatrix]) -> Option<Schur> {
        let m = self.p.num_constraints();
        let mut mat = DMatrix::<f64>::zeros(m, m);
        for (k, cons) in self.by_block.iter().enumerate() {
            let n = self.p.block_sizes[k];
            let (g, h) = (&zinv[k], &x[k]);
            let total_nnz: usize = cons.iter().map(|&(j, pj)| self.p.a[j][pj].1.entries.len()).sum();
            let dense_cost = n * n * n + total_nnz;
            for &(i, pi) in cons {
                let ai = &self.p.a[i][pi].1;

                if ai.entries.len() * total_nnz <= dense_cost {
                    // Entries of W = X A_i Z⁻¹ are formed only where A_j needs them.
                    for &(j, pj) in cons {
                        let mut acc = 0.0;
                        for &(r2, c2, v2) in &self.p.a[j][pj].1.entries {
                            let mut w = ZERO;
                            for &(r, c, v) in &ai.entries {
                                w += h[(c2, r)] * v * g[(c, r2)];
                            }
                            acc += (v2 * w).re;
                        }
                        mat[(i, j)] += acc;
                    }
                } else {
                    let mut t = ComplexMatrix::zeros(n, n);
                    for &(r, c, v) in &ai.entries {
                        for u in 0..n {
                            t[(u, c)] += h[(u, r)] * v;
                        }
                    }
                    let w = t * g;
                    for &(j, pj) in cons {
                        mat[(i, j)] += self.p.a[j][pj].1.re_trace_with(&w);
                    }
                }
            }
        }
        let mat = (&mat + mat.transpose()) * 0.5;
        if let Some(l) = blocked_cholesky(mat.clone()) {
            return Some(Schur { chol: Some(l), lu: None });
        }
        let maxdiag = mat.diagonal().iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-300);
        let reg = &mat + DMatrix::<f64>::identity(m, m) * (1e-13 * maxdiag);
        if let Some(l) = blocked_cholesky(reg) {
            return Some(Schur { chol: Some(l), lu: None });
        }
        Some(Schur { chol: None, lu: Some(mat.lu()) })
    }

    fn run(&self) -> ConicSolution {
        let p = self.p;
        let s = self.s;
        let (mut x, mut y, mut z) = self.initial_point();
        let norm_b = vnorm(&p.b);
        let norm_c = frob(&p.c);
        let mut status = SdpStatus::NumericalFailure;
        let mut iterations = 0;
        let mut pinf = f64::INFINITY;
        let mut dinf = f64::INFINITY;
        let mut stalls = 0;
        // Best iterate by the largest of the relative residuals and gap.
        let mut best: Option<(f64, Blocks, Vec<f64>, Blocks, f64, f64)> = None;
        let mut best_iter = 0;

        for iter in 0..=s.max_iterations {
            iterations = iter;
            let ay = p.apply_at(&y);
            let ax = p.apply_a(&x);
            let rp: Vec<f64> = p.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
            let rd: Blocks = (0..z.len()).map(|k| &p.c[k] - &ay[k] - &z[k]).collect();
            let pobj = inner(&p.c, &x);
            let dobj: f64 = p.b.iter().zip(&y).map(|(b, y)| b * y).sum();
            pinf = vnorm(&rp) / (1.0 + norm_b);
            dinf = frob(&rd) / (1.0 + norm_c);
            let gap = (pobj - dobj).abs();
            let gap_ok = gap <= s.gap_abs || gap <= s.gap_rel * pobj.abs().max(dobj.abs());
            let merit = pinf.max(dinf).max(gap / (1.0 + pobj.abs().max(dobj.abs())));
            if merit.is_finite() && best.as_ref().map_or(true, |b| merit < b.0) {
                best = Some((merit, x.clone(), y.clone(), z.clone(), pinf, dinf));
                best_iter = iter;
            }
            if pinf <= s.feasibility_tol && dinf <= s.feasibility_tol && gap_ok {
                status = SdpStatus::Optimal;
                break;
            }
            if dobj > 0.0 {
                let ray = frob(&(0..z.len()).map(|k| &p.c[k] - &rd[k]).collect::<Vec<_>>()) / dobj;
                if ray <= s.infeasibility_tol {
                    status = SdpStatus::Infeasible;
                    break;
                }
            }
            if pobj < 0.0 {
                let ray = vnorm(&ax) / -pobj;
                if ray <= s.infeasibility_tol {
                    status = SdpStatus::Unbounded;
                    break;
                }
            }
            if iter == s.max_iterations || iter - best_iter > STALL_WINDOW {
                break;
            }

            let Some(zinv) = z.iter().map(hpd_inverse).collect::<Option<Blocks>>() else { break };
            let Some(schur) = self.schur(&zinv, &x) else { break };
            let mu = inner(&x, &z) / self.n_total;

            // Terms shared by predictor and corrector.
            let zrx: Blocks = (0..z.len()).map(|k| &zinv[k] * &rd[k] * &x[k]).collect();
            let a_zrx = p.apply_a(&zrx);
            let a_zinv = p.apply_a(&zinv);

            let direction = |sigma_mu: f64, corr: Option<&Blocks>| -> Option<(Vec<f64>, Blocks, Blocks)> {
                let mut rhs: Vec<f64> = (0..p.b.len()).map(|i| p.b[i] - sigma_mu * a_zinv[i] + a_zrx[i]).collect();
                if let Some(cr) = corr {
                    let ac = p.apply_a(cr);
                    for i in 0..rhs.len() {
                        rhs[i] += ac[i];
                    }
                }
                let dy = schur.solve(&rhs)?;
                let ady = p.apply_at(&dy);
                let dz: Blocks = (0..z.len()).map(|k| &rd[k] - &ady[k]).collect();
                let dx: Blocks = (0..z.len())
                    .map(|k| {
                        let mut d = zinv[k].scale(sigma_mu) - &x[k] - &zinv[k] * &dz[k] * &x[k];
                        if let Some(cr) = corr {
                            d -= &cr[k];
                        }
                        hermitian_part(&d)
                    })
                    .collect();
                Some((dy, dx, dz))
            };
            let steps = |dx: &Blocks, dz: &Blocks| -> Option<(f64, f64)> {
                let mut ap = f64::INFINITY;
                let mut ad = f64::INFINITY;
                for k in 0..z.len() {
                    ap = ap.min(max_step(&x[k], &dx[k])?);
                    ad = ad.min(max_step(&z[k], &dz[k])?);
                }
                Some((ap, ad))
            };

            let Some((_, dxa, dza)) = direction(0.0, None) else { break };
            let Some((ap, ad)) = steps(&dxa, &dza) else { break };
            let (ap, ad) = (ap.min(1.0), ad.min(1.0));
            let mu_aff: f64 =
                (0..z.len()).map(|k| (&x[k] + dxa[k].scale(ap)).dotc(&(&z[k] + dza[k].scale(ad))).re).sum::<f64>()
                    / self.n_total;
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
            let corr: Blocks = (0..z.len()).map(|k| &zinv[k] * &dza[k] * &dxa[k]).collect();
            let Some((dy, dx, dz)) = direction(sigma * mu, Some(&corr)) else { break };
            let Some((ap, ad)) = steps(&dx, &dz) else { break };
            let ap = (s.step_fraction * ap).min(1.0);
            let ad = (s.step_fraction * ad).min(1.0);
            if ap < 1e-12 && ad < 1e-12 {
                stalls += 1;
                if stalls > 3 {
                    break;
                }
            }
            for k in 0..z.len() {
                x[k] = hermitian_part(&(&x[k] + dx[k].scale(ap)));
                z[k] = hermitian_part(&(&z[k] + dz[k].scale(ad)));
            }
            for i in 0..y.len() {
                y[i] += ad * dy[i];
            }
        }

        if status == SdpStatus::NumericalFailure {
            if let Some((_, bx, by, bz, bp, bd)) = best {
                (x, y, z, pinf, dinf) = (bx, by, bz, bp, bd);
            }
        }
        let pobj = inner(&p.c, &x);
        let dobj = p.b.iter().zip(&y).map(|(b, y)| b * y).sum();
        ConicSolution {
            status,
            x,
            y,
            z,
            primal_objective: pobj,
            dual_objective: dobj,
            primal_infeasibility: pinf,
            dual_infeasibility: dinf,
            iterations,
        }
    }
}

pub fn solve_conic(problem: &ConicProblem, settings: &SdpSettings) -> ConicSolution {
    Solver::new(problem, settings).run()
}
