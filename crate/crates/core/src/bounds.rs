//! Randomized invariant suite: entropy inequalities, metric relations, SDP
//! certificates and thermalization sanity checks.
//!
//! Every check evaluates a slack on random instances (non-negative when the
//! inequality holds) and passes when the worst slack is at least
//! `−tolerance`. Trial `t` of a check draws from stream `t` of its seed.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropies::{cq_state, d_hyp, d_hyp_sdp, h_hyp, h_max, h_max_smooth, h_min, h_min_smooth, von_neumann};
use crate::error::{Error, Result};
use crate::heatflow::{energy_conserving_grid_search, heat_exchange, ThermalPair};
use crate::linalg::{identity, kron, partial_trace_matrix, ComplexMatrix, DensityOperator, DimensionSpec};
use crate::metrics::{fidelity, purified_distance, trace_distance};
use crate::random::{ginibre, haar_unitary, random_pure, random_state, SampleRng, Seed};
use crate::sdp::{solve_with, Relation, SdpProblem, SdpSettings, SdpStatus, Sense};
use crate::spin_model::{binomial, energy_shell, hypergeometric_marginals, SpinShellSpec};
use crate::thermalization::{therm_distance, ConstraintSubspace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub trials: usize,
    /// Smallest slack observed; `+∞` when every trial was vacuous.
    pub worst_slack: f64,
    pub tolerance: f64,
    /// Trials where the bound was vacuous (an infinite side).
    pub vacuous: usize,
    pub passed: bool,
}

/// Runs `slack` on `trials` instances in parallel.
pub fn run_check<F>(name: &str, trials: usize, tolerance: f64, seed: Seed, slack: F) -> Result<BoundCheck>
where
    F: Fn(&mut SampleRng) -> Result<f64> + Sync,
{
    let values =
        (0..trials).into_par_iter().map(|t| slack(&mut seed.stream(t as u64))).collect::<Result<Vec<f64>>>()?;
    if let Some(v) = values.iter().find(|v| v.is_nan()) {
        return Err(Error::Numerical(format!("{name}: slack evaluated to {v}")));
    }
    let worst = values.iter().copied().fold(f64::INFINITY, f64::min);
    let vacuous = values.iter().filter(|v| v.is_infinite()).count();
    Ok(BoundCheck {
        name: name.to_string(),
        trials,
        worst_slack: worst,
        tolerance,
        vacuous,
        passed: worst >= -tolerance,
    })
}

fn log2(x: f64) -> f64 {
    x.log2()
}

/// `log 1/(1 − √(1 − ε²))`.
fn chain_penalty(eps: f64) -> f64 {
    let e2 = eps * eps;
    log2((1.0 + (1.0 - e2).sqrt()) / e2)
}

fn random_rank<R: Rng + ?Sized>(d: usize, rng: &mut R) -> usize {
    rng.random_range(1..=d)
}

fn random_tripartite(rng: &mut SampleRng, max_dim: usize) -> Result<DensityOperator> {
    let dims: Vec<usize> = (0..3).map(|_| rng.random_range(2..=max_dim)).collect();
    let d: usize = dims.iter().product();
    let rank = random_rank(d, rng);
    random_state(&dims, rank, rng)
}

/// Parts `(AB|C)`, `(A|BC)` and `(B|C)` of a tripartite state.
fn tripartite_views(rho: &DensityOperator) -> Result<[DensityOperator; 3]> {
    Ok([rho.bipartition(&[0, 1], &[2])?, rho.bipartition(&[0], &[1, 2])?, rho.bipartition(&[1], &[2])?])
}

/// `½‖ρ−σ‖₁ + ½|Trρ−Trσ| ≤ d(ρ,σ) ≤ √(‖ρ−σ‖₁ + |Trρ−Trσ|)` on subnormalized pairs.
pub fn metric_sandwich(trials: usize, seed: Seed) -> Result<BoundCheck> {
    run_check("metric sandwich", trials, 1e-9, seed, |rng| {
        let d = rng.random_range(2..=8);
        let mut sub = || -> Result<DensityOperator> {
            let rank = random_rank(d, rng);
            let t: f64 = rng.random_range(0.05..=1.0);
            let rho = random_state(&[d], rank, rng)?;
            DensityOperator::new(rho.matrix().scale(t), rho.dims().clone())
        };
        let (rho, sigma) = (sub()?, sub()?);
        let td = 2.0 * trace_distance(&rho, &sigma)?;
        let dtr = (rho.trace() - sigma.trace()).abs();
        let pd = purified_distance(&rho, &sigma)?;
        Ok((pd - 0.5 * (td + dtr)).min((td + dtr).sqrt() - pd))
    })
}

/// Trace and purified distances do not increase under partial trace.
pub fn metric_monotonicity(trials: usize, seed: Seed) -> Result<BoundCheck> {
    run_check("metric monotonicity", trials, 1e-9, seed, |rng| {
        let (a, b) = (rng.random_range(2..=3), rng.random_range(2..=3));
        let r1 = random_rank(a * b, rng);
        let rho = random_state(&[a, b], r1, rng)?;
        let r2 = random_rank(a * b, rng);
        let sigma = random_state(&[a, b], r2, rng)?;
        let (ra, sa) = (rho.partial_trace(&[0])?, sigma.partial_trace(&[0])?);
        let td = trace_distance(&rho, &sigma)? - trace_distance(&ra, &sa)?;
        let pd = purified_distance(&rho, &sigma)? - purified_distance(&ra, &sa)?;
        Ok(td.min(pd))
    })
}

/// `F(ρ,σ) = F(σ,ρ)`, as slack `−|difference|`.
pub fn fidelity_symmetry(trials: usize, seed: Seed) -> Result<BoundCheck> {
    run_check("fidelity symmetry", trials, 1e-10, seed, |rng| {
        let d = rng.random_range(2..=6);
        let (r1, r2) = (random_rank(d, rng), random_rank(d, rng));
        let rho = random_state(&[d], r1, rng)?;
        let sigma = random_state(&[d], r2, rng)?;
        Ok(-(fidelity(&rho, &sigma, true)? - fidelity(&sigma, &rho, true)?).abs())
    })
}

/// `H_H^1(A) = log |supp ρ|` for dims ≤ 8 and ranks 1–6.
pub fn h1_support(trials: usize, seed: Seed) -> Result<BoundCheck> {
    run_check("H_H^1 equals log rank", trials, 1e-5, seed, |rng| {
        let d = rng.random_range(2..=8);
        let rank = rng.random_range(1..=d.min(6));
        let rho = random_state(&[d], rank, rng)?;
        Ok(-(h_hyp(&rho, 1.0)?.bits - log2(rank as f64)).abs())
    })
}

/// `H(A|B) ∈ [−min(log|A|, log|B|), log|A|]` for von Neumann, min, max and `H_H^{0.1}`.
pub fn trivial_bounds(trials: usize, seed: Seed) -> Result<BoundCheck> {
    run_check("trivial bounds", trials, 1e-5, seed, |rng| {
        let (a, b) = (rng.random_range(2..=4), rng.random_range(2..=4));
        let rank = random_rank(a * b, rng);
        let rho = random_state(&[a, b], rank, rng)?;
        let upper = log2(a as f64);
        let lower = -log2(a.min(b) as f64);
        let values = [von_neumann(&rho, Some(1))?.bits, h_min(&rho)?.bits, h_max(&rho)?.bits, h_hyp(&rho, 0.1)?.bits];
        Ok(values.iter().map(|&h| (h - lower).min(upper - h)).fold(f64::INFINITY, f64::min))
    })
}

/// Applies `X ↦ Tr_E[(1⊗V) X (1⊗V)†]` with `V: B → B'E` a Haar isometry.
fn random_channel_on_b(rho: &DensityOperator, b_out: usize, e: usize, rng: &mut SampleRng) -> Result<DensityOperator> {
    let f = rho.dims().factors();
    let (a, b) = (f[0], f[1]);
    let u = haar_unitary(b_out * e, rng);
    let v = u.columns(0, b).into_owned();
    let big = kron(&identity(a), &v);
    let out = &big * rho.matrix() * big.adjoint();
    let reduced = partial_trace_matrix(&out, &[a, b_out, e], &[0, 1])?;
    DensityOperator::new(reduced, DimensionSpec::new(vec![a, b_out])?)
}

/// `H_H^ε(A|B) ≤ H_H^ε(A|B')` after a channel on `B` (ε = 0.1).
pub fn data_processing(trials: usize, seed: Seed) -> Result<BoundCheck> {
    run_check("data processing", trials, 1e-5, seed, |rng| {
        let rank = random_rank(4, rng);
        let rho = random_state(&[2, 2], rank, rng)?;
        let out = random_channel_on_b(&rho, 2, 2, rng)?;
        Ok(h_hyp(&out, 0.1)?.bits - h_hyp(&rho, 0.1)?.bits)
    })
}

/// Smoothing parameters of the chain-rule checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub eps: f64,
    pub eps1: f64,
    pub eps2: f64,
    /// Largest factor dimension of the random tripartite states.
    pub max_dim: usize,
}

impl Default for ChainParams {
    fn default() -> Self {
        Self { eps: 0.1, eps1: 0.01, eps2: 0.01, max_dim: 2 }
    }
}

/// `H_H^{ε+√(8ε')}(AB|C) ≥ H_H^ε(A|BC) + H_H^{ε'}(B|C) − log((ε+√(8ε'))/ε)`.
pub fn chain_rule_hh(trials: usize, seed: Seed, p: ChainParams) -> Result<BoundCheck> {
    let big = p.eps + (8.0 * p.eps1).sqrt();
    if big > 1.0 {
        return Err(Error::Domain(format!("ε + √(8ε') = {big} exceeds 1")));
    }
    run_check("chain rule H_H", trials, 1e-4, seed, |rng| {
        let [ab_c, a_bc, b_c] = tripartite_views(&random_tripartite(rng, p.max_dim)?)?;
        let lhs = h_hyp(&ab_c, big)?.bits;
        let rhs = h_hyp(&a_bc, p.eps)?.bits + h_hyp(&b_c, p.eps1)?.bits - log2(big / p.eps);
        Ok(lhs - rhs)
    })
}

/// `H_min^{ε'}(A|BC) ≤ H_min^{ε+2ε'+ε''}(AB|C) − H_min^{ε''}(B|C) + log 1/(1−√(1−ε²))`.
pub fn chain_rule_min_min(trials: usize, seed: Seed, p: ChainParams) -> Result<BoundCheck> {
    run_check("chain rule min-min", trials, 1e-4, seed, |rng| {
        let [ab_c, a_bc, b_c] = tripartite_views(&random_tripartite(rng, p.max_dim)?)?;
        let rhs = h_min_smooth(&ab_c, p.eps + 2.0 * p.eps1 + p.eps2)?.bits - h_min_smooth(&b_c, p.eps2)?.bits
            + chain_penalty(p.eps);
        Ok(rhs - h_min_smooth(&a_bc, p.eps1)?.bits)
    })
}

/// `H_max^{2ε+ε'+2ε''}(A|BC) ≤ H_max^{ε'}(AB|C) − H_min^{ε''}(B|C) + 3 log 1/(1−√(1−ε²))`.
pub fn chain_rule_max_min(trials: usize, seed: Seed, p: ChainParams) -> Result<BoundCheck> {
    run_check("chain rule max-min", trials, 1e-4, seed, |rng| {
        let [ab_c, a_bc, b_c] = tripartite_views(&random_tripartite(rng, p.max_dim)?)?;
        let rhs = h_max_smooth(&ab_c, p.eps1)?.bits - h_min_smooth(&b_c, p.eps2)?.bits + 3.0 * chain_penalty(p.eps);
        Ok(rhs - h_max_smooth(&a_bc, 2.0 * p.eps + p.eps1 + 2.0 * p.eps2)?.bits)
    })
}

/// `H_min^{ε+ε'+ε''}(A|BC) ≥ H_min^{ε'}(AB|C) − H_max^{ε''}(B|C) − 2 log 1/(1−√(1−ε²))`.
pub fn chain_rule_min_max(trials: usize, seed: Seed, p: ChainParams) -> Result<BoundCheck> {
    run_check("chain rule min-max", trials, 1e-4, seed, |rng| {
        let [ab_c, a_bc, b_c] = tripartite_views(&random_tripartite(rng, p.max_dim)?)?;
        let rhs = h_min_smooth(&ab_c, p.eps1)?.bits - h_max_smooth(&b_c, p.eps2)?.bits - 2.0 * chain_penalty(p.eps);
        Ok(h_min_smooth(&a_bc, p.eps + p.eps1 + p.eps2)?.bits - rhs)
    })
}

/// `H_max^{ε''}(A|BC) ≥ H_max^{ε+2ε'+ε''}(AB|C) − H_max^{ε'}(B|C) − log 1/(1−√(1−ε²))`.
pub fn chain_rule_max_max(trials: usize, seed: Seed, p: ChainParams) -> Result<BoundCheck> {
    run_check("chain rule max-max", trials, 1e-4, seed, |rng| {
        let [ab_c, a_bc, b_c] = tripartite_views(&random_tripartite(rng, p.max_dim)?)?;
        let rhs = h_max_smooth(&ab_c, p.eps + 2.0 * p.eps1 + p.eps2)?.bits
            - h_max_smooth(&b_c, p.eps1)?.bits
            - chain_penalty(p.eps);
        Ok(h_max_smooth(&a_bc, p.eps2)?.bits - rhs)
    })
}

fn random_bipartite(rng: &mut SampleRng, max_dim: usize) -> Result<DensityOperator> {
    let (a, b) = (rng.random_range(2..=max_dim), rng.random_range(2..=max_dim));
    let rank = random_rank(a * b, rng);
    random_state(&[a, b], rank, rng)
}

/// `H_H^{ε²/2}(A|B) ≤ H_min^ε(A|B)`.
pub fn interpolation_lower(trials: usize, seed: Seed, eps: f64) -> Result<BoundCheck> {
    run_check(&format!("interpolation lower (eps = {eps})"), trials, 1e-4, seed, |rng| {
        let rho = random_bipartite(rng, 2)?;
        Ok(h_min_smooth(&rho, eps)?.bits - h_hyp(&rho, eps * eps / 2.0)?.bits)
    })
}

/// `H_min^ε ≤ H_H^{11√ε} + (5/2) log(3/ε) + log(2/(1−ε))`; vacuous when `11√ε > 1`.
pub fn interpolation_upper(trials: usize, seed: Seed, eps: f64) -> Result<BoundCheck> {
    run_check(&format!("interpolation upper (eps = {eps})"), trials, 1e-4, seed, |rng| {
        let rho = random_bipartite(rng, 2)?;
        let smoothing = 11.0 * eps.sqrt();
        if smoothing > 1.0 {
            return Ok(f64::INFINITY);
        }
        let rhs = h_hyp(&rho, smoothing)?.bits + 2.5 * log2(3.0 / eps) + log2(2.0 / (1.0 - eps));
        Ok(rhs - h_min_smooth(&rho, eps)?.bits)
    })
}

/// `H_max(A|B) + log(1/ε²) ≥ H_H^{1−ε}(A|B)` with ε = 0.1.
pub fn hmax_relation(trials: usize, seed: Seed) -> Result<BoundCheck> {
    let eps = 0.1;
    run_check("H_max relation", trials, 1e-4, seed, |rng| {
        let rho = random_bipartite(rng, 3)?;
        Ok(h_max(&rho)?.bits + log2(1.0 / (eps * eps)) - h_hyp(&rho, 1.0 - eps)?.bits)
    })
}

/// `H_H^ε(ρ) ≤ H_H^{ε+δ+2√(2δ)}(σ) + log((ε+δ+2√(2δ))/ε)` for `‖ρ−σ‖₁ ≤ δ` (ε = 0.1).
pub fn hh_smoothness(trials: usize, seed: Seed, delta: f64) -> Result<BoundCheck> {
    let eps = 0.1;
    let big = eps + delta + 2.0 * (2.0 * delta).sqrt();
    if big > 1.0 {
        return Err(Error::Domain(format!("ε + δ + 2√(2δ) = {big} exceeds 1")));
    }
    run_check(&format!("H_H smoothness (delta = {delta})"), trials, 1e-4, seed, |rng| {
        let rho = random_bipartite(rng, 2)?;
        let rank = random_rank(rho.dim(), rng);
        let tau = random_state(rho.dims().factors(), rank, rng)?;
        // ‖ρ − σ‖₁ = t‖ρ − τ‖₁ ≤ 2t = δ.
        let t = delta / 2.0;
        let sigma = DensityOperator::new(rho.matrix().scale(1.0 - t) + tau.matrix().scale(t), rho.dims().clone())?;
        Ok(h_hyp(&sigma, big)?.bits + log2(big / eps) - h_hyp(&rho, eps)?.bits)
    })
}

/// Closed forms for classical conditioning against the SDP values, as `−|difference|`.
pub fn cq_closed_forms(trials: usize, seed: Seed) -> Result<BoundCheck> {
    run_check("cq closed forms", trials, 1e-5, seed, |rng| {
        let k = rng.random_range(2..=3);
        let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = weights.iter().sum();
        let mut parts = Vec::with_capacity(k);
        for w in &weights {
            let rank = random_rank(4, rng);
            parts.push((w / total, random_state(&[2, 2], rank, rng)?));
        }
        let rho = cq_state(&parts)?;
        let mut min_sum = 0.0;
        let mut max_sum = 0.0;
        for (p, tau) in &parts {
            min_sum += p * (-h_min(tau)?.bits).exp2();
            max_sum += p * h_max(tau)?.bits.exp2();
        }
        let dmin = (h_min(&rho)?.bits + log2(min_sum)).abs();
        let dmax = (h_max(&rho)?.bits - log2(max_sum)).abs();
        Ok(-dmin.max(dmax))
    })
}

/// `H_max^ε(A|B) = −H_min^ε(A|C)` on pure `ABC`, as `−|sum|`.
pub fn duality(trials: usize, seed: Seed, eps: f64) -> Result<BoundCheck> {
    run_check(&format!("min/max duality (eps = {eps})"), trials, 1e-4, seed, |rng| {
        let dims: Vec<usize> = (0..3).map(|_| rng.random_range(2..=3)).collect();
        let psi = random_pure(&dims, rng)?.density();
        let hmax = h_max_smooth(&psi.bipartition(&[0], &[1])?, eps)?.bits;
        let hmin = h_min_smooth(&psi.bipartition(&[0], &[2])?, eps)?.bits;
        Ok(-(hmax + hmin).abs())
    })
}

/// `H_min^ε − 0.05 ≤ H(A|B) ≤ H_max^ε + 0.05` at ε = 10⁻³.
pub fn von_neumann_sandwich(trials: usize, seed: Seed) -> Result<BoundCheck> {
    run_check("von Neumann sandwich", trials, 1e-9, seed, |rng| {
        let rho = random_bipartite(rng, 2)?;
        let h = von_neumann(&rho, Some(1))?.bits;
        let lo = h_min_smooth(&rho, 1e-3)?.bits - 0.05;
        let hi = h_max_smooth(&rho, 1e-3)?.bits + 0.05;
        Ok((h - lo).min(hi - h))
    })
}

/// `(1/n) H_H^{0.1}(Aⁿ|Bⁿ)` for `n = 1, 2, 3` approaches `H(A|B)` monotonically.
///
/// Uses a correlated classical two-bit state so every instance takes the
/// exact commuting path. Slack is the smallest decrease of the distance.
pub fn aep_trend(seed: Seed) -> Result<BoundCheck> {
    run_check("AEP trend", 1, 1e-6, seed, |rng| {
        let p: f64 = rng.random_range(0.05..0.2);
        let q: f64 = rng.random_range(0.05..0.2);
        let probs = [(1.0 - p) * (1.0 - q), (1.0 - p) * q, p * q, p * (1.0 - q)];
        let rho = DensityOperator::diagonal(&probs, DimensionSpec::new(vec![2, 2])?)?;
        let target = von_neumann(&rho, Some(1))?.bits;
        let mut power = rho.clone();
        let mut dist = Vec::new();
        for n in 1..=3usize {
            if n > 1 {
                power = power.tensor(&rho);
            }
            // Factors are A1 B1 A2 B2 ...; regroup as Aⁿ | Bⁿ.
            let a: Vec<usize> = (0..n).map(|i| 2 * i).collect();
            let b: Vec<usize> = (0..n).map(|i| 2 * i + 1).collect();
            let grouped = power.bipartition(&a, &b)?;
            dist.push((h_hyp(&grouped, 0.1)?.bits / n as f64 - target).abs());
        }
        Ok(dist.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min))
    })
}

fn random_hermitian(n: usize, rng: &mut SampleRng) -> ComplexMatrix {
    let g = ginibre(n, n, rng);
    (&g + g.adjoint()).scale(0.5)
}

fn random_pd(n: usize, rng: &mut SampleRng) -> ComplexMatrix {
    let g = ginibre(n, n, rng);
    &g * g.adjoint() + identity(n).scale(0.1)
}

/// Random primal- and dual-strictly-feasible Hermitian SDP of size `n`.
pub fn random_feasible_sdp(rng: &mut SampleRng) -> SdpProblem {
    let n = rng.random_range(2..=8);
    let m = rng.random_range(1..=n.min(5));
    let x0 = random_pd(n, rng);
    let mut c = random_pd(n, rng);
    let mut problem_constraints = Vec::with_capacity(m);
    for _ in 0..m {
        let a = random_hermitian(n, rng);
        let y: f64 = rng.random_range(-1.0..1.0);
        c += a.scale(y);
        let b = (&a * &x0).trace().re;
        problem_constraints.push((a, b));
    }
    let mut p = SdpProblem::new(c, Sense::Minimize);
    for (a, b) in problem_constraints {
        p = p.with_constraint(a, Relation::Eq, b);
    }
    p
}

/// Duality gap `≤ 1e-7` and weak duality on random feasible programs.
pub fn sdp_gap(trials: usize, seed: Seed) -> Result<BoundCheck> {
    let settings = SdpSettings { gap_abs: 1e-9, gap_rel: 1e-9, ..SdpSettings::default() };
    run_check("SDP duality gap", trials, 0.0, seed, |rng| {
        let problem = random_feasible_sdp(rng);
        let sol = solve_with(&problem, &settings)?;
        if sol.status != SdpStatus::Optimal {
            return Ok(f64::NEG_INFINITY);
        }
        let gap = sol.primal_value - sol.dual_value;
        Ok((1e-7 - gap.abs()).min(gap + 1e-9))
    })
}

/// Diagonal hypothesis tests: exact commuting path against the general SDP.
pub fn neyman_pearson_vs_sdp(trials: usize, seed: Seed) -> Result<BoundCheck> {
    run_check("D_H commuting path vs SDP", trials, 1e-6, seed, |rng| {
        let d = rng.random_range(2..=6);
        let r: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.0)).collect();
        let s: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..1.0)).collect();
        let rt: f64 = r.iter().sum();
        let rho = DensityOperator::diagonal(&r.iter().map(|x| x / rt).collect::<Vec<_>>(), DimensionSpec::single(d)?)?;
        let sigma = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            d,
            s.iter().map(|&x| Complex64::new(x, 0.0)),
        ));
        let eps: f64 = rng.random_range(0.05..1.0);
        let fast = d_hyp(&rho, &sigma, eps)?.bits;
        let sdp = d_hyp_sdp(&rho, &sigma, eps)?.bits;
        // Compare the test values 2^{−D}, which is the LP objective.
        Ok(-((-fast).exp2() - (-sdp).exp2()).abs())
    })
}

/// `therm_distance(π_Ω ⊗ ρ_R, U) = 0` for Haar `U`, as `−distance`.
pub fn decoupled_input_distance(trials: usize, seed: Seed) -> Result<BoundCheck> {
    let omega = ConstraintSubspace::full(2, 4)?;
    run_check("relative thermalization of decoupled inputs", trials, 1e-9, seed, |rng| {
        let rank = random_rank(2, rng);
        let rho_r = random_state(&[2], rank, rng)?;
        let rho = DensityOperator::maximally_mixed(DimensionSpec::single(8)?).tensor(&rho_r);
        Ok(-therm_distance(&rho, &haar_unitary(8, rng), &omega)?)
    })
}

/// Hypergeometric shell marginals for every `N ≤ 10`, as `−max deviation`.
pub fn shell_marginals(seed: Seed) -> Result<BoundCheck> {
    run_check("energy shell marginals", 1, 1e-10, seed, |_| {
        let mut worst: f64 = 0.0;
        for n in 2..=10 {
            for m in 1..n {
                for k in 0..=n {
                    let spec = SpinShellSpec::new(n, k, m, n)?;
                    let pi_s = energy_shell(&spec)?.pi_s()?;
                    let probs = hypergeometric_marginals(&spec);
                    for s in 0..(1usize << m) {
                        let j = s.count_ones() as usize;
                        let expect = probs[j] / binomial(m, j) as f64;
                        worst = worst.max((pi_s.matrix()[(s, s)].re - expect).abs());
                    }
                }
            }
        }
        Ok(-worst)
    })
}

/// Clausius on product Gibbs qubits (`dQ_C ≥ 0` on the energy-conserving grid)
/// and the energy bookkeeping identity.
pub fn clausius_product(seed: Seed) -> Result<BoundCheck> {
    run_check("Clausius for product Gibbs pairs", 4, 1e-9, seed, |rng| {
        let beta_h: f64 = rng.random_range(0.1..1.0);
        let beta_c: f64 = beta_h + rng.random_range(0.1..2.0);
        let gap: f64 = rng.random_range(0.5..2.0);
        let ham = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(gap, 0.0),
        ]));
        let pair = ThermalPair::product(beta_h, ham.clone(), beta_c, ham)?;
        let grid = energy_conserving_grid_search(&pair, 10)?;
        let u = haar_unitary(4, rng);
        let ex = heat_exchange(&pair, &u)?;
        let bookkeeping = -(ex.dq_h + ex.dq_c - ex.total).abs();
        Ok(grid.min_dq_c.min(bookkeeping * 1e1))
    })
}

/// Trial counts for [`run_suite`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    /// Multiplies the default trial count of every randomized check (at least one trial).
    pub scale: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { scale: 1.0 }
    }
}

/// Runs the whole suite; checks are seeded from `seed` by their position.
pub fn run_suite(seed: Seed, config: SuiteConfig) -> Result<Vec<BoundCheck>> {
    let n = |default: usize| ((default as f64 * config.scale).round() as usize).max(1);
    let s = |i: u64| Seed(seed.0.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i));
    let chain = ChainParams::default();
    let mut out = vec![
        metric_sandwich(n(500), s(0))?,
        metric_monotonicity(n(200), s(1))?,
        fidelity_symmetry(n(100), s(2))?,
        h1_support(n(50), s(3))?,
        trivial_bounds(n(300), s(4))?,
        data_processing(n(100), s(5))?,
        chain_rule_hh(n(100), s(6), chain)?,
        chain_rule_min_min(n(100), s(7), chain)?,
        chain_rule_max_min(n(100), s(8), chain)?,
        chain_rule_min_max(n(100), s(9), chain)?,
        chain_rule_max_max(n(100), s(10), chain)?,
    ];
    for (i, eps) in [0.01, 0.04].into_iter().enumerate() {
        out.push(interpolation_lower(n(50), s(11 + i as u64), eps)?);
        out.push(interpolation_upper(n(50), s(13 + i as u64), eps)?);
    }
    out.push(interpolation_upper(n(50), s(15), 0.005)?);
    out.push(hmax_relation(n(50), s(16))?);
    for (i, delta) in [0.01, 0.05].into_iter().enumerate() {
        out.push(hh_smoothness(n(50), s(17 + i as u64), delta)?);
    }
    out.push(cq_closed_forms(n(30), s(19))?);
    for (i, eps) in [0.0, 0.05].into_iter().enumerate() {
        out.push(duality(n(30), s(20 + i as u64), eps)?);
    }
    out.push(von_neumann_sandwich(n(30), s(22))?);
    out.push(aep_trend(s(23))?);
    out.push(sdp_gap(n(100), s(24))?);
    out.push(neyman_pearson_vs_sdp(n(50), s(25))?);
    out.push(decoupled_input_distance(n(20), s(26))?);
    out.push(shell_marginals(s(27))?);
    out.push(clausius_product(s(28))?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let checks = run_suite(Seed(1), SuiteConfig { scale: 0.05 }).unwrap();
        for c in &checks {
            assert!(c.passed, "{c:?}");
        }
        let vacuous = checks.iter().find(|c| c.name == "interpolation upper (eps = 0.01)").unwrap();
        assert_eq!(vacuous.vacuous, vacuous.trials);
    }

    #[test]
    fn chain_penalty_matches_definition() {
        let e: f64 = 0.1;
        assert!((chain_penalty(e) - (1.0 / (1.0 - (1.0 - e * e).sqrt())).log2()).abs() < 1e-9);
    }

    #[test]
    fn run_check_reports_failures() {
        let c = run_check("always negative", 3, 0.1, Seed(0), |_| Ok(-1.0)).unwrap();
        assert!(!c.passed);
        assert_eq!(c.worst_slack, -1.0);
    }
}
