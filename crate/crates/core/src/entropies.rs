//! Entropy measures in bits: von Neumann, min-, max- and hypothesis-testing
//! entropies, with smoothing over the purified-distance ball.
//!
//! Bipartite inputs carry dimensions `[|A|, |B|]`; a single factor means `B`
//! is trivial. Infinite values use `f64::INFINITY` / `f64::NEG_INFINITY`.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    eigh, eigvalsh, identity, kron, psd_factor, purify_minimal, sqrt_psd, support_projector_matrix, ComplexMatrix,
    DensityOperator, DimensionSpec, ONE, RANK_THRESHOLD, ZERO,
};
use crate::metrics::purified_distance;
use crate::sdp::lmi::{Lmi, LmiSolution};
use crate::sdp::{SdpSettings, SdpSolution, SdpStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum EntropyKind {
    VonNeumann,
    HMin,
    HMax,
    HHyp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyValue {
    pub bits: f64,
    pub epsilon: f64,
    pub kind: EntropyKind,
    /// For SDP-backed values: bracketing objective values, gap, status and
    /// the optimizer of the defining program in its natural variable.
    pub certificate: Option<SdpSolution>,
}

impl EntropyValue {
    fn plain(bits: f64, epsilon: f64, kind: EntropyKind) -> Self {
        Self { bits, epsilon, kind, certificate: None }
    }
}

/// Tolerance for the cross-check between the two smooth max-entropy routes.
pub const SMOOTH_MAX_AGREEMENT: f64 = 1e-4;

/// Solver settings used by every entropy program.
pub fn sdp_settings() -> SdpSettings {
    SdpSettings { gap_abs: 1e-9, gap_rel: 1e-9, feasibility_tol: 1e-8, ..SdpSettings::default() }
}

fn bipartite_dims(rho: &DensityOperator) -> Result<(usize, usize)> {
    match rho.dims().factors() {
        [a] => Ok((*a, 1)),
        [a, b] => Ok((*a, *b)),
        f => Err(Error::Dimension(format!(
            "expected a bipartite operator [|A|, |B|], got factors {f:?}; use bipartition()"
        ))),
    }
}

fn require_normalized(rho: &DensityOperator, what: &str) -> Result<()> {
    if !rho.is_normalized() {
        return Err(Error::InvalidState(format!("{what} requires a normalized state")));
    }
    Ok(())
}

fn shannon_bits(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum()
}

/// `H(A) = −Tr ρ log ρ`, or `H(AB) − H(B)` when conditioning on factor `B`.
pub fn von_neumann(rho: &DensityOperator, condition_on: Option<usize>) -> Result<EntropyValue> {
    require_normalized(rho, "von Neumann entropy")?;
    let joint = shannon_bits(rho.eigenvalues());
    let bits = match condition_on {
        None => joint,
        Some(b) => joint - shannon_bits(rho.partial_trace(&[b])?.eigenvalues()),
    };
    Ok(EntropyValue::plain(bits, 0.0, EntropyKind::VonNeumann))
}

/// Accepts optimal runs and near-optimal stalls with a small gap.
fn check(sol: &LmiSolution, what: &str) -> Result<()> {
    let c = &sol.conic;
    let scale = 1.0 + sol.lower.abs().max(sol.upper.abs());
    let near = c.gap() <= 1e-6 * scale && c.primal_infeasibility <= 1e-6 && c.dual_infeasibility <= 1e-6;
    if c.status == SdpStatus::Optimal || (c.status == SdpStatus::NumericalFailure && near) {
        Ok(())
    } else {
        Err(Error::Solver(format!(
            "{what}: status {:?} after {} iterations (gap {:e}, residuals {:e}/{:e})",
            c.status,
            c.iterations,
            c.gap(),
            c.primal_infeasibility,
            c.dual_infeasibility
        )))
    }
}

/// Certificate in the natural objective: `value = sign · (LMI objective)`.
fn certificate(sol: &LmiSolution, sign: f64, primal_matrix: ComplexMatrix) -> SdpSolution {
    let (a, b) = (sign * sol.lower, sign * sol.upper);
    SdpSolution {
        primal_value: a.max(b),
        dual_value: a.min(b),
        primal_matrix,
        dual_certificate: Vec::new(),
        gap: sol.conic.gap(),
        status: sol.conic.status,
        iterations: sol.conic.iterations,
    }
}

/// `H_min(A|B) = −log min{Tr σ : 1_A ⊗ σ ⪰ ρ_AB}`.
pub fn h_min(rho_ab: &DensityOperator) -> Result<EntropyValue> {
    let (da, db) = bipartite_dims(rho_ab)?;
    if rho_ab.trace() <= 0.0 {
        return Err(Error::InvalidState("min-entropy of the zero operator".into()));
    }
    let mut lmi = Lmi::default();
    let s = lmi.herm(db);
    let k = lmi.block(-rho_ab.matrix());
    lmi.place_herm(k, s, 0, da, 1, 1.0);
    lmi.add_objective(&s.trace(), -1.0);
    let sol = lmi.solve(&sdp_settings());
    check(&sol, "min-entropy")?;
    let tr = -sol.lower;
    Ok(EntropyValue {
        bits: -tr.log2(),
        epsilon: 0.0,
        kind: EntropyKind::HMin,
        certificate: Some(certificate(&sol, -1.0, s.value(sol.y()))),
    })
}

/// `H_max(A|B) = log max_σ F(ρ_AB, 1_A ⊗ σ_B)²` via the block-matrix
/// fidelity program with `ρ = V V†`.
pub fn h_max(rho_ab: &DensityOperator) -> Result<EntropyValue> {
    let (da, db) = bipartite_dims(rho_ab)?;
    if rho_ab.trace() <= 0.0 {
        return Err(Error::InvalidState("max-entropy of the zero operator".into()));
    }
    let d = da * db;
    let v = psd_factor(rho_ab.matrix());
    let r = v.ncols();
    let mut lmi = Lmi::default();
    let y = lmi.cplx(r, d);
    let s = lmi.herm(db);
    let mut c0 = ComplexMatrix::zeros(r + d, r + d);
    c0.view_mut((0, 0), (r, r)).fill_with_identity();
    let k = lmi.block(c0);
    lmi.place_offdiag(k, y, 0, r);
    lmi.place_herm(k, s, r, da, 1, 1.0);
    let tr: Vec<(usize, f64)> = s.trace().into_iter().map(|(i, c)| (i, -c)).collect();
    lmi.scalar(1.0, &tr);
    lmi.add_objective(&y.re_trace_with(&v), 1.0);
    let sol = lmi.solve(&sdp_settings());
    check(&sol, "max-entropy")?;
    Ok(EntropyValue {
        bits: 2.0 * sol.lower.log2(),
        epsilon: 0.0,
        kind: EntropyKind::HMax,
        certificate: Some(certificate(&sol, 1.0, s.value(sol.y()))),
    })
}

fn check_eps_hyp(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain(format!("hypothesis-testing parameter {eps} must lie in (0, 1]")));
    }
    Ok(())
}

fn infinite_d_hyp(eps: f64) -> EntropyValue {
    EntropyValue::plain(f64::INFINITY, eps, EntropyKind::HHyp)
}

/// `D_H^ε(ρ‖σ) = −log min{Tr(Qσ)/ε : Tr(Qρ) ≥ ε, 0 ⪯ Q ⪯ 1}`.
///
/// Commuting inputs are solved exactly as a Neyman–Pearson linear program
/// in a joint eigenbasis; everything else goes through the SDP. Perfectly
/// distinguishable inputs give `+∞`.
pub fn d_hyp(rho: &DensityOperator, sigma: &ComplexMatrix, eps: f64) -> Result<EntropyValue> {
    d_hyp_impl(rho, sigma, eps, true)
}

/// [`d_hyp`] without the commuting fast path.
pub fn d_hyp_sdp(rho: &DensityOperator, sigma: &ComplexMatrix, eps: f64) -> Result<EntropyValue> {
    d_hyp_impl(rho, sigma, eps, false)
}

fn d_hyp_impl(rho: &DensityOperator, sigma: &ComplexMatrix, eps: f64, fast: bool) -> Result<EntropyValue> {
    check_eps_hyp(eps)?;
    require_normalized(rho, "hypothesis-testing entropy")?;
    let d = rho.dim();
    if sigma.nrows() != d || sigma.ncols() != d {
        return Err(Error::Dimension(format!("σ must be {d}x{d}")));
    }
    if eigvalsh(sigma)[0] < -1e-10 * (1.0 + sigma.norm()) {
        return Err(Error::InvalidState("σ must be positive semidefinite".into()));
    }
    let kernel = identity(d) - support_projector_matrix(sigma);
    if (&kernel * rho.matrix()).trace().re >= eps * (1.0 - 1e-12) {
        return Ok(infinite_d_hyp(eps));
    }
    if fast {
        if let Some(basis) = joint_eigenbasis(rho.matrix(), sigma) {
            return Ok(d_hyp_commuting(rho.matrix(), sigma, &basis, eps));
        }
    }
    let mut lmi = Lmi::default();
    let q = lmi.herm(d);
    let k = lmi.block(ComplexMatrix::zeros(d, d));
    lmi.place_herm(k, q, 0, 1, 1, 1.0);
    let k = lmi.block(identity(d));
    lmi.place_herm(k, q, 0, 1, 1, -1.0);
    lmi.scalar(-eps, &q.trace_with(rho.matrix()));
    lmi.add_objective(&q.trace_with(sigma), -1.0 / eps);
    let sol = lmi.solve(&sdp_settings());
    check(&sol, "hypothesis-testing entropy")?;
    let value = -sol.lower;
    if value <= 0.0 {
        return Ok(infinite_d_hyp(eps));
    }
    Ok(EntropyValue {
        bits: -value.log2(),
        epsilon: eps,
        kind: EntropyKind::HHyp,
        certificate: Some(certificate(&sol, -1.0, q.value(sol.y()))),
    })
}

/// Unitary diagonalizing both matrices, if they commute.
fn joint_eigenbasis(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Option<ComplexMatrix> {
    let scale = (1.0 + rho.norm()) * (1.0 + sigma.norm());
    if (rho * sigma - sigma * rho).norm() > 1e-10 * scale {
        return None;
    }
    let es = eigh(sigma);
    let d = rho.nrows();
    let vals: Vec<f64> = es.values.iter().copied().collect();
    let tol = 1e-9 * (1.0 + vals.iter().fold(0.0f64, |a, b| a.max(b.abs())));
    let mut basis = ComplexMatrix::zeros(d, d);
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && vals[end] - vals[end - 1] <= tol {
            end += 1;
        }
        let w = es.vectors.columns(start, end - start).into_owned();
        let inner = eigh(&(w.adjoint() * rho * &w));
        let rotated = &w * &inner.vectors;
        basis.columns_mut(start, end - start).copy_from(&rotated);
        start = end;
    }
    let off = |m: &ComplexMatrix| {
        let t = basis.adjoint() * m * &basis;
        let mut worst = 0.0f64;
        for j in 0..d {
            for i in 0..d {
                if i != j {
                    worst = worst.max(t[(i, j)].norm());
                }
            }
        }
        worst
    };
    (off(rho) <= 1e-9 * (1.0 + rho.norm()) && off(sigma) <= 1e-9 * (1.0 + sigma.norm())).then_some(basis)
}

/// Exact Neyman–Pearson test on the joint eigenbasis, with the LP dual as
/// certificate.
fn d_hyp_commuting(rho: &ComplexMatrix, sigma: &ComplexMatrix, basis: &ComplexMatrix, eps: f64) -> EntropyValue {
    let d = rho.nrows();
    let rd = basis.adjoint() * rho * basis;
    let sd = basis.adjoint() * sigma * basis;
    // Populations at round-off level are outside the support.
    let r: Vec<f64> = (0..d).map(|i| rd[(i, i)].re).map(|x| if x > RANK_THRESHOLD { x } else { 0.0 }).collect();
    let s: Vec<f64> = (0..d).map(|i| sd[(i, i)].re.max(0.0)).collect();
    let (q, value) = neyman_pearson(&r, &s, eps);
    if value <= 0.0 {
        return infinite_d_hyp(eps);
    }
    // Dual: max εμ − Σx s.t. μ r_i − x_i ≤ s_i/ε, with μ the threshold ratio.
    let mu = (0..d).filter(|&i| q[i] > 0.0 && r[i] > 0.0).map(|i| s[i] / (eps * r[i])).fold(0.0f64, f64::max);
    let dual = eps * mu - (0..d).map(|i| (mu * r[i] - s[i] / eps).max(0.0)).sum::<f64>();
    let qd = DVector::from_iterator(d, q.iter().map(|&x| Complex64::new(x, 0.0)));
    let qmat = basis * ComplexMatrix::from_diagonal(&qd) * basis.adjoint();
    EntropyValue {
        bits: -value.log2(),
        epsilon: eps,
        kind: EntropyKind::HHyp,
        certificate: Some(SdpSolution {
            primal_value: value,
            dual_value: dual,
            primal_matrix: qmat,
            dual_certificate: vec![mu],
            gap: (value - dual).abs(),
            status: SdpStatus::Optimal,
            iterations: 0,
        }),
    }
}

/// Optimal test `q ∈ [0,1]^n` for `min Σ q s / ε` s.t. `Σ q r ≥ ε`: fill by
/// decreasing likelihood ratio `r/s`.
pub(crate) fn neyman_pearson(r: &[f64], s: &[f64], eps: f64) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..r.len()).filter(|&i| r[i] > 0.0).collect();
    order.sort_by(|&a, &b| (r[b] * s[a]).total_cmp(&(r[a] * s[b])));
    let mut q = vec![0.0; r.len()];
    let mut need = eps;
    let mut cost = 0.0;
    for &i in &order {
        // A requirement left over from rounding must not pull in further outcomes.
        if need <= 1e-14 * eps {
            break;
        }
        let take = (need / r[i]).min(1.0);
        q[i] = take;
        need -= take * r[i];
        cost += take * s[i];
    }
    (q, cost / eps)
}

/// `H_H^ε(A|B) = −D_H^ε(ρ_AB ‖ 1_A ⊗ ρ_B)`.
pub fn h_hyp(rho_ab: &DensityOperator, eps: f64) -> Result<EntropyValue> {
    let (da, db) = bipartite_dims(rho_ab)?;
    check_eps_hyp(eps)?;
    require_normalized(rho_ab, "hypothesis-testing entropy")?;
    let rho_b = if db == 1 { ComplexMatrix::identity(1, 1) } else { rho_ab.partial_trace(&[1])?.into_matrix() };
    let sigma = kron(&identity(da), &rho_b);
    let mut v = d_hyp(rho_ab, &sigma, eps)?;
    v.bits = -v.bits;
    Ok(v)
}

fn check_eps_smooth(eps: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::Domain(format!("smoothing parameter {eps} must lie in [0, 1)")));
    }
    Ok(())
}

/// Smooth min-entropy over the purified-distance ball.
///
/// Writing `σ̃ = 2^{−λ} σ_B` turns the defining problem into one SDP:
/// minimize `Tr σ̃` subject to `1_A ⊗ σ̃ ⪰ ρ̃`, `Tr ρ̃ ≤ 1` and the
/// block-matrix fidelity constraint `F(ρ̃, ρ) ≥ √(1−ε²)`.
pub fn h_min_smooth(rho_ab: &DensityOperator, eps: f64) -> Result<EntropyValue> {
    check_eps_smooth(eps)?;
    require_normalized(rho_ab, "smooth min-entropy")?;
    if eps == 0.0 {
        return h_min(rho_ab);
    }
    let (da, db) = bipartite_dims(rho_ab)?;
    let d = da * db;
    let v = psd_factor(rho_ab.matrix());
    let r = v.ncols();
    let mut lmi = Lmi::default();
    let rt = lmi.herm(d);
    let s = lmi.herm(db);
    let y = lmi.cplx(r, d);
    let k = lmi.block(ComplexMatrix::zeros(d, d));
    lmi.place_herm(k, s, 0, da, 1, 1.0);
    lmi.place_herm(k, rt, 0, 1, 1, -1.0);
    let mut c0 = ComplexMatrix::zeros(r + d, r + d);
    c0.view_mut((0, 0), (r, r)).fill_with_identity();
    let k = lmi.block(c0);
    lmi.place_offdiag(k, y, 0, r);
    lmi.place_herm(k, rt, r, 1, 1, 1.0);
    let tr: Vec<(usize, f64)> = rt.trace().into_iter().map(|(i, c)| (i, -c)).collect();
    lmi.scalar(1.0, &tr);
    lmi.scalar(-(1.0 - eps * eps).sqrt(), &y.re_trace_with(&v));
    lmi.add_objective(&s.trace(), -1.0);
    let sol = lmi.solve(&sdp_settings());
    check(&sol, "smooth min-entropy")?;
    let tr = -sol.lower;
    Ok(EntropyValue {
        bits: -tr.log2(),
        epsilon: eps,
        kind: EntropyKind::HMin,
        certificate: Some(certificate(&sol, -1.0, rt.value(sol.y()))),
    })
}

/// Smooth min-entropy by bisection over `λ`, each step an SDP maximizing the
/// fidelity to `ρ` over `{ρ̃ : 2^{−λ} 1_A ⊗ σ ⪰ ρ̃, Tr σ ≤ 1, Tr ρ̃ ≤ 1}`.
/// Slower than [`h_min_smooth`]; kept as an independent route.
pub fn h_min_smooth_bisection(rho_ab: &DensityOperator, eps: f64, tol: f64) -> Result<EntropyValue> {
    check_eps_smooth(eps)?;
    require_normalized(rho_ab, "smooth min-entropy")?;
    let (da, db) = bipartite_dims(rho_ab)?;
    let d = da * db;
    let v = psd_factor(rho_ab.matrix());
    let r = v.ncols();
    let target = (1.0 - eps * eps).sqrt();
    let feasible = |lambda: f64| -> Result<bool> {
        let mut lmi = Lmi::default();
        let rt = lmi.herm(d);
        let s = lmi.herm(db);
        let y = lmi.cplx(r, d);
        let k = lmi.block(ComplexMatrix::zeros(d, d));
        lmi.place_herm(k, s, 0, da, 1, 2f64.powf(-lambda));
        lmi.place_herm(k, rt, 0, 1, 1, -1.0);
        let mut c0 = ComplexMatrix::zeros(r + d, r + d);
        c0.view_mut((0, 0), (r, r)).fill_with_identity();
        let k = lmi.block(c0);
        lmi.place_offdiag(k, y, 0, r);
        lmi.place_herm(k, rt, r, 1, 1, 1.0);
        let neg = |t: Vec<(usize, f64)>| t.into_iter().map(|(i, c)| (i, -c)).collect::<Vec<_>>();
        lmi.scalar(1.0, &neg(rt.trace()));
        lmi.scalar(1.0, &neg(s.trace()));
        lmi.add_objective(&y.re_trace_with(&v), 1.0);
        let sol = lmi.solve(&sdp_settings());
        check(&sol, "smooth min-entropy feasibility step")?;
        Ok(sol.lower >= target)
    };
    let mut lo = -((da * db) as f64).log2();
    let mut hi = (da as f64).log2() + 1.0;
    if !feasible(lo)? {
        return Err(Error::Numerical("bisection lower end is infeasible".into()));
    }
    for _ in 0..60 {
        if hi - lo <= tol {
            return Ok(EntropyValue::plain(0.5 * (lo + hi), eps, EntropyKind::HMin));
        }
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Numerical("smooth min-entropy bisection did not converge in 60 steps".into()))
}

/// Smooth max-entropy via duality with a minimal purification `ABC`:
/// `H_max^ε(A|B) = −H_min^ε(A|C)`.
///
/// The result is cross-checked against a direct evaluation: the optimal
/// `ρ̃_AC` is lifted by Uhlmann's theorem to a ball point `ρ̃_AB`, whose
/// non-smooth max-entropy must agree within [`SMOOTH_MAX_AGREEMENT`].
pub fn h_max_smooth(rho_ab: &DensityOperator, eps: f64) -> Result<EntropyValue> {
    check_eps_smooth(eps)?;
    require_normalized(rho_ab, "smooth max-entropy")?;
    if eps == 0.0 {
        return h_max(rho_ab);
    }
    let (value, direct, _) = h_max_smooth_both(rho_ab, eps)?;
    if (value.bits - direct.bits).abs() > SMOOTH_MAX_AGREEMENT {
        return Err(Error::Numerical(format!(
            "smooth max-entropy routes disagree: duality {} vs direct {}",
            value.bits, direct.bits
        )));
    }
    Ok(value)
}

/// Direct route: the non-smooth max-entropy of an explicit point of the
/// ε-ball, together with that point.
pub fn h_max_smooth_direct(rho_ab: &DensityOperator, eps: f64) -> Result<(EntropyValue, DensityOperator)> {
    check_eps_smooth(eps)?;
    require_normalized(rho_ab, "smooth max-entropy")?;
    if eps == 0.0 {
        return Ok((h_max(rho_ab)?, rho_ab.clone()));
    }
    let (_, direct, point) = h_max_smooth_both(rho_ab, eps)?;
    Ok((direct, point))
}

fn h_max_smooth_both(rho_ab: &DensityOperator, eps: f64) -> Result<(EntropyValue, EntropyValue, DensityOperator)> {
    let (da, db) = bipartite_dims(rho_ab)?;
    let rho = rho_ab.with_dims(DimensionSpec::new(vec![da, db])?)?;
    let psi = purify_minimal(&rho)?;
    let rc = psi.dims().factors()[2];
    let rho_ac = psi.density().bipartition(&[0], &[2])?;
    let hmin = h_min_smooth(&rho_ac, eps)?;
    let mut value = hmin.clone();
    value.bits = -hmin.bits;
    value.kind = EntropyKind::HMax;

    let tilde_ac = &hmin.certificate.as_ref().expect("smooth min-entropy certificate").primal_matrix;
    let dac = da * rc;
    // Ψ with rows (a, c) and columns b, so that ρ_AC = ΨΨ†.
    let pv = psi.vector();
    let big_psi = ComplexMatrix::from_fn(dac, db, |row, b| {
        let (a, c) = (row / rc, row % rc);
        pv[(a * db + b) * rc + c]
    });
    let root = sqrt_psd(tilde_ac);
    let m = big_psi.adjoint() * &root;
    let svd = m.svd(true, true);
    let (u, vt) = (svd.u.expect("left singular vectors"), svd.v_t.expect("right singular vectors"));
    let tilde_psi = &root * vt.adjoint() * u.adjoint();
    let mut tilde_ab = ComplexMatrix::zeros(da * db, da * db);
    for a in 0..da {
        for b in 0..db {
            for a2 in 0..da {
                for b2 in 0..db {
                    let mut acc = ZERO;
                    for c in 0..rc {
                        acc += tilde_psi[(a * rc + c, b)] * tilde_psi[(a2 * rc + c, b2)].conj();
                    }
                    tilde_ab[(a * db + b, a2 * db + b2)] = acc;
                }
            }
        }
    }
    let tr = tilde_ab.trace().re;
    if tr > 1.0 {
        tilde_ab.unscale_mut(tr);
    }
    let point = DensityOperator::new(tilde_ab, rho_ab.dims().clone())?;
    let dist = purified_distance(&point, rho_ab)?;
    if dist > eps + 1e-6 {
        return Err(Error::Numerical(format!("lifted point lies outside the ball (distance {dist})")));
    }
    let mut direct = h_max(&point)?;
    direct.epsilon = eps;
    Ok((value, direct, point))
}

/// Classical-quantum state `Σ_k p_k τ^k_AB ⊗ |k⟩⟨k|_C` with factors `[|A|, |B|·K]`.
pub fn cq_state(parts: &[(f64, DensityOperator)]) -> Result<DensityOperator> {
    let k = parts.len();
    let first = parts.first().ok_or_else(|| Error::Domain("empty ensemble".into()))?;
    let (da, db) = bipartite_dims(&first.1)?;
    let d = da * db;
    let mut m = ComplexMatrix::zeros(d * k, d * k);
    for (idx, (p, tau)) in parts.iter().enumerate() {
        if bipartite_dims(tau)? != (da, db) {
            return Err(Error::Dimension("ensemble members differ in dimension".into()));
        }
        let mut proj = ComplexMatrix::zeros(k, k);
        proj[(idx, idx)] = ONE;
        m += kron(tau.matrix(), &proj).scale(*p);
    }
    DensityOperator::new(m, DimensionSpec::new(vec![da, db * k])?)
}
