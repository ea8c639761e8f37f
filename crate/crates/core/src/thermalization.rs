//! Relative thermalization: distances to `π_S ⊗ ρ_R`, sampling over Haar
//! unitaries on a constraint subspace, and the entropic conditions that
//! guarantee or exclude thermalization.
//!
//! States on `Ω ⊗ R` are given in the coordinates of the subspace basis;
//! the basis vectors are the columns of an isometry `V: Ω → S ⊗ E`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropies::{h_hyp, h_min_smooth};
use crate::error::{Error, Result};
use crate::linalg::{
    conjugate_first_factor, kron, partial_trace_matrix, trace_norm_hermitian, unitarity_defect, ComplexMatrix,
    DensityOperator, DimensionSpec, ZERO,
};
use crate::random::{haar_unitary, Seed};

/// Largest `|S|·|E|` for which dense embedded operators are built.
pub const DENSE_EMBEDDING_CAP: usize = 2048;

/// Sparse vector as `(index, amplitude)` pairs.
pub type SparseVector = Vec<(usize, Complex64)>;

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSubspace {
    basis: Vec<SparseVector>,
    dim_s: usize,
    dim_e: usize,
    /// For each environment index, the entries `(basis index, s, amplitude)`.
    by_env: Vec<Vec<(usize, usize, Complex64)>>,
}

impl ConstraintSubspace {
    /// Validates orthonormality (within `1e-10`) and index ranges.
    pub fn new(basis: Vec<SparseVector>, dim_s: usize, dim_e: usize) -> Result<Self> {
        if dim_s == 0 || dim_e == 0 {
            return Err(Error::Dimension("subsystem dimensions must be positive".into()));
        }
        let total = dim_s * dim_e;
        if basis.len() > total {
            return Err(Error::Dimension(format!("{} vectors exceed |S||E| = {total}", basis.len())));
        }
        let mut clean = Vec::with_capacity(basis.len());
        for v in basis {
            let mut acc: BTreeMap<usize, Complex64> = BTreeMap::new();
            for (i, a) in v {
                if i >= total {
                    return Err(Error::Dimension(format!("basis index {i} outside S⊗E")));
                }
                *acc.entry(i).or_insert(ZERO) += a;
            }
            clean.push(acc.into_iter().filter(|(_, a)| *a != ZERO).collect::<SparseVector>());
        }
        check_orthonormal(&clean)?;
        let mut by_env = vec![Vec::new(); dim_e];
        for (j, v) in clean.iter().enumerate() {
            for &(x, a) in v {
                by_env[x % dim_e].push((j, x / dim_e, a));
            }
        }
        Ok(Self { basis: clean, dim_s, dim_e, by_env })
    }

    /// Subspace spanned by the columns of `v` (`|S||E| x |Ω|`).
    pub fn from_isometry(v: &ComplexMatrix, dim_s: usize, dim_e: usize) -> Result<Self> {
        if v.nrows() != dim_s * dim_e {
            return Err(Error::Dimension("isometry rows must equal |S||E|".into()));
        }
        let basis = (0..v.ncols())
            .map(|j| (0..v.nrows()).filter(|&i| v[(i, j)] != ZERO).map(|i| (i, v[(i, j)])).collect())
            .collect();
        Self::new(basis, dim_s, dim_e)
    }

    /// `Ω = S ⊗ E` with the computational basis.
    pub fn full(dim_s: usize, dim_e: usize) -> Result<Self> {
        let one = Complex64::new(1.0, 0.0);
        Self::new((0..dim_s * dim_e).map(|i| vec![(i, one)]).collect(), dim_s, dim_e)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn dim_s(&self) -> usize {
        self.dim_s
    }

    pub fn dim_e(&self) -> usize {
        self.dim_e
    }

    pub fn basis(&self) -> &[SparseVector] {
        &self.basis
    }

    /// Dense isometry `V` with the basis vectors as columns.
    pub fn isometry(&self) -> ComplexMatrix {
        let mut v = ComplexMatrix::zeros(self.dim_s * self.dim_e, self.dim());
        for (j, b) in self.basis.iter().enumerate() {
            for &(i, a) in b {
                v[(i, j)] = a;
            }
        }
        v
    }

    /// `Tr_E[V X V†]` for an operator `X` on `Ω ⊗ R`, giving an operator on `S ⊗ R`.
    pub fn embed_trace_env(&self, x: &ComplexMatrix, dim_r: usize) -> Result<ComplexMatrix> {
        let n = self.dim() * dim_r;
        if x.nrows() != n || x.ncols() != n {
            return Err(Error::Dimension(format!("operator must be {n}x{n}")));
        }
        let ds = self.dim_s;
        let mut out = ComplexMatrix::zeros(ds * dim_r, ds * dim_r);
        for list in &self.by_env {
            for &(j, s, a) in list {
                for &(j2, s2, a2) in list {
                    let w = a * a2.conj();
                    for r in 0..dim_r {
                        for r2 in 0..dim_r {
                            out[(s * dim_r + r, s2 * dim_r + r2)] += w * x[(j * dim_r + r, j2 * dim_r + r2)];
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    fn reduced(&self, keep_s: bool) -> Result<DensityOperator> {
        let n = self.dim();
        if n == 0 {
            return Err(Error::Domain("constraint subspace is empty".into()));
        }
        let d = if keep_s { self.dim_s } else { self.dim_e };
        let mut m = ComplexMatrix::zeros(d, d);
        if keep_s {
            for list in &self.by_env {
                for &(j, s, a) in list {
                    for &(j2, s2, a2) in list {
                        if j == j2 {
                            m[(s, s2)] += a * a2.conj();
                        }
                    }
                }
            }
        } else {
            for b in &self.basis {
                for &(x, a) in b {
                    for &(x2, a2) in b {
                        if x / self.dim_e == x2 / self.dim_e {
                            m[(x % self.dim_e, x2 % self.dim_e)] += a * a2.conj();
                        }
                    }
                }
            }
        }
        DensityOperator::new(m.unscale(n as f64), DimensionSpec::single(d)?)
    }

    /// `π_S = Tr_E π_Ω`.
    pub fn pi_s(&self) -> Result<DensityOperator> {
        self.reduced(true)
    }

    /// `π_E = Tr_S π_Ω`.
    pub fn pi_e(&self) -> Result<DensityOperator> {
        self.reduced(false)
    }
}

fn check_orthonormal(basis: &[SparseVector]) -> Result<()> {
    let tol = 1e-10;
    for (i, v) in basis.iter().enumerate() {
        let n: f64 = v.iter().map(|(_, a)| a.norm_sqr()).sum();
        if (n - 1.0).abs() > tol {
            return Err(Error::InvalidState(format!("basis vector {i} has squared norm {n}")));
        }
    }
    // Group vectors by index to only compare overlapping supports.
    let mut owners: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (j, v) in basis.iter().enumerate() {
        for &(x, _) in v {
            owners.entry(x).or_default().push(j);
        }
    }
    let mut pairs: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
    for (x, js) in &owners {
        for (p, &j) in js.iter().enumerate() {
            for &k in &js[p + 1..] {
                let aj = basis[j].iter().find(|e| e.0 == *x).unwrap().1;
                let ak = basis[k].iter().find(|e| e.0 == *x).unwrap().1;
                *pairs.entry((j, k)).or_insert(ZERO) += aj.conj() * ak;
            }
        }
    }
    if let Some(((j, k), ip)) = pairs.iter().find(|(_, ip)| ip.norm() > tol) {
        return Err(Error::InvalidState(format!("basis vectors {j} and {k} overlap by {}", ip.norm())));
    }
    Ok(())
}

/// `(π_Ω, π_S)`, with `π_Ω` embedded in `S ⊗ E` (dimensions `[|S|, |E|]`).
pub fn microcanonical(omega: &ConstraintSubspace) -> Result<(DensityOperator, DensityOperator)> {
    let pi_s = omega.pi_s()?;
    let total = omega.dim_s * omega.dim_e;
    if total > DENSE_EMBEDDING_CAP {
        return Err(Error::Dimension(format!(
            "|S||E| = {total} exceeds the dense cap {DENSE_EMBEDDING_CAP}; use pi_s()/pi_e()"
        )));
    }
    let v = omega.isometry();
    let pi = (&v * v.adjoint()).unscale(omega.dim() as f64);
    let pi_omega = DensityOperator::new(pi, DimensionSpec::new(vec![omega.dim_s, omega.dim_e])?)?;
    Ok((pi_omega, pi_s))
}

fn reference_dim(rho: &DensityOperator, omega: &ConstraintSubspace) -> Result<usize> {
    let n = omega.dim();
    if n == 0 || rho.dim() % n != 0 {
        return Err(Error::Dimension(format!("state dimension {} is not a multiple of |Ω| = {n}", rho.dim())));
    }
    Ok(rho.dim() / n)
}

/// The state on `Ω ⊗ R` regrouped as `[|Ω|, |R|]`.
fn as_omega_r(rho: &DensityOperator, omega: &ConstraintSubspace) -> Result<DensityOperator> {
    let dr = reference_dim(rho, omega)?;
    rho.with_dims(DimensionSpec::new(vec![omega.dim(), dr])?)
}

/// Precomputed pieces shared by repeated distance evaluations.
struct DistanceContext {
    dim_r: usize,
    target: ComplexMatrix,
}

impl DistanceContext {
    fn new(rho: &DensityOperator, omega: &ConstraintSubspace) -> Result<Self> {
        if !rho.is_normalized() {
            return Err(Error::InvalidState("thermalization distance requires a normalized state".into()));
        }
        let dim_r = reference_dim(rho, omega)?;
        let rho_r = partial_trace_matrix(rho.matrix(), &[omega.dim(), dim_r], &[1])?;
        let target = kron(omega.pi_s()?.matrix(), &rho_r);
        Ok(Self { dim_r, target })
    }

    fn distance(&self, rho: &DensityOperator, u: &ComplexMatrix, omega: &ConstraintSubspace) -> Result<f64> {
        let rotated = conjugate_first_factor(rho.matrix(), u, self.dim_r)?;
        let rho_sr = omega.embed_trace_env(&rotated, self.dim_r)?;
        Ok(0.5 * trace_norm_hermitian(&(rho_sr - &self.target)))
    }
}

/// `½‖Tr_E[(VU ⊗ 1) ρ (VU ⊗ 1)†] − π_S ⊗ ρ_R‖₁`.
pub fn therm_distance(rho_omega_r: &DensityOperator, u: &ComplexMatrix, omega: &ConstraintSubspace) -> Result<f64> {
    let n = omega.dim();
    if u.nrows() != n || u.ncols() != n {
        return Err(Error::Dimension(format!("unitary must be {n}x{n}")));
    }
    let defect = unitarity_defect(u);
    if defect > 1e-8 {
        return Err(Error::InvalidState(format!("matrix is not unitary (defect {defect:e})")));
    }
    DistanceContext::new(rho_omega_r, omega)?.distance(rho_omega_r, u, omega)
}

/// `2 exp(−|Ω| δ² / 16)`.
pub fn haar_tail_bound(omega_dim: usize, delta: f64) -> f64 {
    2.0 * (-(omega_dim as f64) * delta * delta / 16.0).exp()
}

/// `1 − √(1 − x)` without cancellation.
fn one_minus_sqrt_one_minus(x: f64) -> f64 {
    x / (1.0 + (1.0 - x).sqrt())
}

fn check_unit_interval(eps: f64, name: &str) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("{name} = {eps} must lie in (0, 1)")));
    }
    Ok(())
}

/// Margin of the direct condition with `Δ = δ`:
/// `H_H^{9ε}(SE|R)_ρ + H_H^ε(E)_π − H_H^{1−ε}(S)_π
///   − 2 log 1/((1−√(1−2ε))(δ−36√(2ε))) + log 1/(1−ε)`.
/// Positive means the sampling guarantee applies.
pub fn condition_direct(
    rho_omega_r: &DensityOperator,
    omega: &ConstraintSubspace,
    eps: f64,
    delta: f64,
) -> Result<f64> {
    check_unit_interval(eps, "ε")?;
    let slack = delta - 36.0 * (2.0 * eps).sqrt();
    if slack <= 0.0 {
        return Err(Error::Domain(format!(
            "direct condition needs δ > 36√(2ε): δ = {delta}, 36√(2ε) = {:.4}",
            36.0 * (2.0 * eps).sqrt()
        )));
    }
    if 2.0 * eps >= 1.0 || 9.0 * eps > 1.0 {
        return Err(Error::Domain(format!("ε = {eps} too large for the direct condition")));
    }
    let rho = as_omega_r(rho_omega_r, omega)?;
    // H_H(SE|R) of the embedded state equals H_H(Ω|R): the optimal test can
    // be compressed onto the image of V.
    let h_ser = h_hyp(&rho, 9.0 * eps)?.bits;
    let h_e = h_hyp(&omega.pi_e()?, eps)?.bits;
    let h_s = h_hyp(&omega.pi_s()?, 1.0 - eps)?.bits;
    let penalty = 2.0 * (1.0 / (one_minus_sqrt_one_minus(2.0 * eps) * slack)).log2();
    Ok(h_ser + h_e - h_s - penalty + (1.0 / (1.0 - eps)).log2())
}

/// Margin of the dimension form:
/// `H_H^ε(Ω|R)_ρ + log|Ω| − 2 log|S| − 2 log 1/(δ − √(2ε))`.
pub fn condition_dimension(
    rho_omega_r: &DensityOperator,
    omega: &ConstraintSubspace,
    eps: f64,
    delta: f64,
) -> Result<f64> {
    check_unit_interval(eps, "ε")?;
    let slack = delta - (2.0 * eps).sqrt();
    if slack <= 0.0 {
        return Err(Error::Domain(format!("dimension condition needs δ > √(2ε): δ = {delta}, ε = {eps}")));
    }
    let rho = as_omega_r(rho_omega_r, omega)?;
    let h = h_hyp(&rho, eps)?.bits;
    Ok(h + dimension_term(omega) - 2.0 * (1.0 / slack).log2())
}

/// `log|Ω| − 2 log|S|`.
pub fn dimension_term(omega: &ConstraintSubspace) -> f64 {
    (omega.dim() as f64).log2() - 2.0 * (omega.dim_s as f64).log2()
}

/// `f(ε, δ) = (6 + ε − 2√(9 + 3ε + 4δ))² / 16`.
pub fn converse_f(eps: f64, delta: f64) -> f64 {
    let t = 6.0 + eps - 2.0 * (9.0 + 3.0 * eps + 4.0 * delta).sqrt();
    t * t / 16.0
}

/// Margin of the converse condition:
/// `−[H_H^{11√ε}(Ω|R)_ρ + H_H^1(E)_π] − log 1/f − 3 log 1/(1−√(1−f))
///   − (5/2) log(3/ε) − log(2/(1−ε))`.
/// Positive means no unitary on `Ω` δ-thermalizes `S` relative to `R`.
/// When `11√ε > 1` the hypothesis-testing term is unbounded and the margin is `−∞`.
pub fn condition_converse(
    rho_omega_r: &DensityOperator,
    omega: &ConstraintSubspace,
    eps: f64,
    delta: f64,
) -> Result<f64> {
    check_unit_interval(eps, "ε")?;
    if delta <= 0.0 || eps <= 4.0 * delta.sqrt() {
        return Err(Error::Domain(format!(
            "converse condition needs ε > 4√δ: ε = {eps}, 4√δ = {:.4}",
            4.0 * delta.max(0.0).sqrt()
        )));
    }
    let f = converse_f(eps, delta);
    let penalty = (1.0 / f).log2()
        + 3.0 * (1.0 / one_minus_sqrt_one_minus(f)).log2()
        + 2.5 * (3.0 / eps).log2()
        + (2.0 / (1.0 - eps)).log2();
    let smoothing = 11.0 * eps.sqrt();
    if smoothing > 1.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let rho = as_omega_r(rho_omega_r, omega)?;
    let h = h_hyp(&rho, smoothing)?.bits + h_hyp(&omega.pi_e()?, 1.0)?.bits;
    Ok(-h - penalty)
}

/// Leading-order converse margin `−[H_H^ε(Ω|R)_ρ + H_H^1(E)_π]`, with the
/// logarithmic penalty terms dropped. Positive marks the converse regime.
pub fn converse_leading_order(rho_omega_r: &DensityOperator, omega: &ConstraintSubspace, eps: f64) -> Result<f64> {
    let rho = as_omega_r(rho_omega_r, omega)?;
    Ok(-(h_hyp(&rho, eps)?.bits + h_hyp(&omega.pi_e()?, 1.0)?.bits))
}

/// Smoothing parameters for [`evaluate_conditions`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionParams {
    pub eps_direct: f64,
    pub eps_dimension: f64,
    pub eps_converse: f64,
    /// Smoothing used for the leading-order converse regime flag.
    pub eps_regime: f64,
}

impl Default for ConditionParams {
    fn default() -> Self {
        Self { eps_direct: 1e-4, eps_dimension: 1e-4, eps_converse: 0.01, eps_regime: 0.01 }
    }
}

/// Condition margins for one state; `None` where the parameters are outside
/// the admissible domain (explained in `notes`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub direct: Option<f64>,
    pub dimension: Option<f64>,
    pub converse: Option<f64>,
    pub converse_leading_order: f64,
    pub converse_regime: bool,
    pub notes: Vec<String>,
}

pub fn evaluate_conditions(
    rho_omega_r: &DensityOperator,
    omega: &ConstraintSubspace,
    delta: f64,
    params: &ConditionParams,
) -> Result<ConditionSummary> {
    let mut notes = Vec::new();
    let mut keep = |r: Result<f64>, name: &str| match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Domain(msg)) => {
            notes.push(format!("{name}: {msg}"));
            Ok(None)
        }
        Err(e) => Err(e),
    };
    let direct = keep(condition_direct(rho_omega_r, omega, params.eps_direct, delta), "direct")?;
    let dimension = keep(condition_dimension(rho_omega_r, omega, params.eps_dimension, delta), "dimension")?;
    let converse = keep(condition_converse(rho_omega_r, omega, params.eps_converse, delta), "converse")?;
    let lead = converse_leading_order(rho_omega_r, omega, params.eps_regime)?;
    Ok(ConditionSummary {
        direct,
        dimension,
        converse,
        converse_leading_order: lead,
        converse_regime: lead > 0.0,
        notes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalizationReport {
    pub delta: f64,
    pub n_trials: usize,
    pub omega_dim: usize,
    pub violating_trials: usize,
    pub empirical_fraction_violating: f64,
    pub haar_tail_bound: f64,
    /// Binomial standard error at the tail-bound rate, `√(p(1−p)/n)`.
    pub binomial_sigma: f64,
    pub condition_margin_direct: Option<f64>,
    pub condition_margin_dimension: Option<f64>,
    pub condition_margin_converse: Option<f64>,
    pub converse_regime: bool,
    pub notes: Vec<String>,
    pub seed: Seed,
    pub distances: Vec<f64>,
}

impl ThermalizationReport {
    pub fn with_conditions(mut self, c: &ConditionSummary) -> Self {
        self.condition_margin_direct = c.direct;
        self.condition_margin_dimension = c.dimension;
        self.condition_margin_converse = c.converse;
        self.converse_regime = c.converse_regime;
        self.notes.extend(c.notes.iter().cloned());
        self
    }

    /// `fraction ≤ tail bound + k σ`.
    pub fn within_tail_bound(&self, k_sigma: f64) -> bool {
        self.empirical_fraction_violating <= self.haar_tail_bound.min(1.0) + k_sigma * self.binomial_sigma
    }
}

/// Distances after `n_trials` Haar unitaries on `Ω`; trial `t` uses stream
/// `t` of `seed`. A trial violates when its distance exceeds `δ`.
pub fn sample_fraction(
    rho_omega_r: &DensityOperator,
    omega: &ConstraintSubspace,
    delta: f64,
    n_trials: usize,
    seed: Seed,
) -> Result<ThermalizationReport> {
    if n_trials == 0 {
        return Err(Error::Domain("n_trials must be at least 1".into()));
    }
    let ctx = DistanceContext::new(rho_omega_r, omega)?;
    let n = omega.dim();
    let distances = (0..n_trials)
        .into_par_iter()
        .map(|t| {
            let u = haar_unitary(n, &mut seed.stream(t as u64));
            ctx.distance(rho_omega_r, &u, omega)
        })
        .collect::<Result<Vec<f64>>>()?;
    let violating = distances.iter().filter(|&&d| d > delta).count();
    let bound = haar_tail_bound(n, delta);
    let p = bound.min(1.0);
    Ok(ThermalizationReport {
        delta,
        n_trials,
        omega_dim: n,
        violating_trials: violating,
        empirical_fraction_violating: violating as f64 / n_trials as f64,
        haar_tail_bound: bound,
        binomial_sigma: (p * (1.0 - p) / n_trials as f64).sqrt(),
        condition_margin_direct: None,
        condition_margin_dimension: None,
        condition_margin_converse: None,
        converse_regime: false,
        notes: Vec::new(),
        seed,
        distances,
    })
}

/// Margin `H_min^ε(A|R)_ρ + H_min^ε(A'|B)_τ − 2 log 1/(Δ − 12ε)` of the
/// decoupling condition, for `ρ_AR` and the Choi state `τ_{A'B}` of the map.
pub fn decoupling_check(rho_ar: &DensityOperator, choi: &DensityOperator, eps: f64, delta_cap: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::Domain(format!("ε = {eps} must lie in [0, 1)")));
    }
    let slack = delta_cap - 12.0 * eps;
    if slack <= 0.0 {
        return Err(Error::Domain(format!("decoupling needs Δ > 12ε: Δ = {delta_cap}, ε = {eps}")));
    }
    let da = rho_ar.dims().factors()[0];
    let da2 = choi.dims().factors()[0];
    if da != da2 {
        return Err(Error::Dimension(format!("input dimension {da} differs from Choi input {da2}")));
    }
    let h_ar = h_min_smooth(rho_ar, eps)?.bits;
    let h_choi = h_min_smooth(choi, eps)?.bits;
    Ok(h_ar + h_choi - 2.0 * (1.0 / slack).log2())
}

/// Normalized Choi state `(1 ⊗ T)(Φ)` with `Φ` maximally entangled on `A' ⊗ A`,
/// for a linear map given by its action on matrices. Factors `[|A|, d_out]`.
pub fn choi_state(d_in: usize, d_out: usize, map: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Result<DensityOperator> {
    let mut tau = ComplexMatrix::zeros(d_in * d_out, d_in * d_out);
    for i in 0..d_in {
        for j in 0..d_in {
            let mut e = ComplexMatrix::zeros(d_in, d_in);
            e[(i, j)] = Complex64::new(1.0, 0.0);
            let out = map(&e);
            if out.nrows() != d_out || out.ncols() != d_out {
                return Err(Error::Dimension("map output has the wrong size".into()));
            }
            let mut unit = ComplexMatrix::zeros(d_in, d_in);
            unit[(i, j)] = Complex64::new(1.0, 0.0);
            tau += kron(&unit, &out);
        }
    }
    DensityOperator::new(tau.unscale(d_in as f64), DimensionSpec::new(vec![d_in, d_out])?)
}

pub fn choi_identity(d: usize) -> Result<DensityOperator> {
    choi_state(d, d, |x| x.clone())
}

/// Choi state of `X ↦ Tr(X) 1/d_out`.
pub fn choi_depolarizing(d_in: usize, d_out: usize) -> Result<DensityOperator> {
    choi_state(d_in, d_out, |x| ComplexMatrix::identity(d_out, d_out).scale(x.trace().re / d_out as f64))
}

/// Choi state `τ_{Ω'S}` of `Tr_E` restricted to `Ω`.
pub fn choi_partial_trace(omega: &ConstraintSubspace) -> Result<DensityOperator> {
    let n = omega.dim();
    choi_state(n, omega.dim_s, |x| omega.embed_trace_env(x, 1).expect("square operator on Ω"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, ComplexVector, PureState};
    use crate::random::random_state;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    fn max_entangled(d: usize) -> DensityOperator {
        let mut v = ComplexVector::zeros(d * d);
        for i in 0..d {
            v[i * d + i] = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
        }
        PureState::new(v, DimensionSpec::new(vec![d, d]).unwrap()).unwrap().density()
    }

    #[test]
    fn microcanonical_examples() {
        let full = ConstraintSubspace::full(2, 3).unwrap();
        let (pi, pi_s) = microcanonical(&full).unwrap();
        assert!((pi_s.matrix() - identity(2).scale(0.5)).norm() < 1e-12);
        assert!((pi.trace() - 1.0).abs() < 1e-12);
        // span{|01>, |10>} of two spins, S = first spin.
        let sym = ConstraintSubspace::new(vec![vec![(1, one())], vec![(2, one())]], 2, 2).unwrap();
        let (_, pi_s) = microcanonical(&sym).unwrap();
        assert!((pi_s.matrix() - identity(2).scale(0.5)).norm() < 1e-12);
        // Three spins with one up, S = first spin: up with probability 1/3.
        let shell = ConstraintSubspace::new(vec![vec![(1, one())], vec![(2, one())], vec![(4, one())]], 2, 4).unwrap();
        let pi_s = shell.pi_s().unwrap();
        assert!((pi_s.matrix()[(0, 0)].re - 2.0 / 3.0).abs() < 1e-12);
        assert!((pi_s.matrix()[(1, 1)].re - 1.0 / 3.0).abs() < 1e-12);
        let empty = ConstraintSubspace::new(vec![], 2, 2).unwrap();
        assert!(microcanonical(&empty).is_err());
    }

    #[test]
    fn rejects_non_orthonormal_bases() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v1 = vec![(0, one())];
        let v2 = vec![(0, Complex64::new(s, 0.0)), (1, Complex64::new(s, 0.0))];
        assert!(ConstraintSubspace::new(vec![v1, v2], 2, 1).is_err());
        assert!(ConstraintSubspace::new(vec![vec![(5, one())]], 2, 2).is_err());
    }

    #[test]
    fn distance_examples() {
        let omega = ConstraintSubspace::full(2, 2).unwrap();
        let rho_r = random_state(&[2], 2, &mut Seed(1).rng()).unwrap();
        let rho = DensityOperator::maximally_mixed(DimensionSpec::single(4).unwrap()).tensor(&rho_r);
        assert!(therm_distance(&rho, &identity(4), &omega).unwrap() < 1e-12);
        // Ω = S (trivial E), R maximally entangled with S.
        let omega = ConstraintSubspace::full(2, 1).unwrap();
        let d = therm_distance(&max_entangled(2), &identity(2), &omega).unwrap();
        assert!((d - 0.75).abs() < 1e-12);
        assert!(therm_distance(&max_entangled(2), &identity(2).scale(2.0), &omega).is_err());
    }

    #[test]
    fn embed_trace_matches_dense_isometry() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let omega = ConstraintSubspace::new(
            vec![
                vec![(1, Complex64::new(s, 0.0)), (2, Complex64::new(0.0, s))],
                vec![(1, Complex64::new(s, 0.0)), (2, Complex64::new(0.0, -s))],
                vec![(5, one())],
            ],
            2,
            3,
        )
        .unwrap();
        let rho = random_state(&[3, 2], 6, &mut Seed(2).rng()).unwrap();
        let v = kron(&omega.isometry(), &identity(2));
        let full = &v * rho.matrix() * v.adjoint();
        let expect = partial_trace_matrix(&full, &[2, 3, 2], &[0, 2]).unwrap();
        let got = omega.embed_trace_env(rho.matrix(), 2).unwrap();
        assert!((got - expect).norm() < 1e-12);
    }

    #[test]
    fn condition_values() {
        let omega = ConstraintSubspace::full(2, 16).unwrap();
        assert!((dimension_term(&omega) - 3.0).abs() < 1e-12);
        assert!((haar_tail_bound(4096, 0.3) - 2.0 * (-4096.0f64 * 0.09 / 16.0).exp()).abs() < 1e-25);
        let f = converse_f(0.01, 1e-4);
        assert!(f > 5e-10 && f < 1.5e-9, "f = {f}");
        let rho = DensityOperator::maximally_mixed(DimensionSpec::single(32).unwrap())
            .tensor(&DensityOperator::maximally_mixed(DimensionSpec::single(2).unwrap()));
        assert!(matches!(condition_direct(&rho, &omega, 1e-4, 0.3), Err(Error::Domain(_))));
        let m = condition_dimension(&rho, &omega, 1e-4, 0.3).unwrap();
        let expect = 5.0 + 3.0 - 2.0 * (1.0 / (0.3 - (2e-4f64).sqrt())).log2();
        assert!((m - expect).abs() < 1e-6, "{m} vs {expect}");
        assert!(matches!(condition_converse(&rho, &omega, 0.01, 0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn sampling_is_deterministic_and_sound_for_decoupled_inputs() {
        let omega = ConstraintSubspace::full(2, 4).unwrap();
        let rho_r = random_state(&[2], 2, &mut Seed(3).rng()).unwrap();
        let rho = DensityOperator::maximally_mixed(DimensionSpec::single(8).unwrap()).tensor(&rho_r);
        let a = sample_fraction(&rho, &omega, 0.1, 20, Seed(4)).unwrap();
        let b = sample_fraction(&rho, &omega, 0.1, 20, Seed(4)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.violating_trials, 0);
        assert!(a.distances.iter().all(|&d| d < 1e-9));
        assert!(sample_fraction(&rho, &omega, 0.1, 0, Seed(4)).is_err());
    }

    #[test]
    fn choi_states() {
        let id = choi_identity(2).unwrap();
        assert!((id.matrix() - max_entangled(2).matrix()).norm() < 1e-12);
        let dep = choi_depolarizing(2, 3).unwrap();
        assert!((dep.matrix() - identity(6).unscale(6.0)).norm() < 1e-12);
        let omega = ConstraintSubspace::full(2, 4).unwrap();
        let tau = choi_partial_trace(&omega).unwrap();
        let tau_s = tau.partial_trace(&[1]).unwrap();
        assert!((tau_s.matrix() - omega.pi_s().unwrap().matrix()).norm() < 1e-12);
    }

    #[test]
    fn decoupling_margins() {
        let rho = max_entangled(2);
        // Identity channel: −1 − 1 − 2 log(1/Δ).
        let m = decoupling_check(&rho, &choi_identity(2).unwrap(), 0.0, 0.5).unwrap();
        assert!((m - (-2.0 - 2.0)).abs() < 1e-5, "{m}");
        // Depolarizing channel: −1 + 1 + 2 log Δ.
        let m = decoupling_check(&rho, &choi_depolarizing(2, 2).unwrap(), 0.0, 1.0).unwrap();
        assert!(m.abs() < 1e-5, "{m}");
        assert!(decoupling_check(&rho, &choi_identity(2).unwrap(), 0.1, 1.0).is_err());
    }
}
