//! Heat exchange between two locally thermal systems `H` (hot) and `C` (cold),
//! and a search for energy-conserving unitaries that move heat from cold to hot.
//!
//! Heat is the local energy change `Tr(H_X(ρ′_X − ρ_X))`; no work/heat split.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    eigh, identity, kron, trace_norm_hermitian, unitarity_defect, ComplexMatrix, DensityOperator, DimensionSpec,
};
use crate::random::{haar_unitary, Seed};

/// Tolerance on the local Gibbs marginals of a [`ThermalPair`].
pub const MARGINAL_TOL: f64 = 1e-8;

/// Eigenvalues closer than this (relative to the spectral scale) share a block.
const DEGENERACY_TOL: f64 = 1e-9;

/// `exp(−βH)/Z`. `β = +∞` gives the normalized projector onto the ground space.
pub fn gibbs_state(beta: f64, hamiltonian: &ComplexMatrix) -> Result<DensityOperator> {
    if beta.is_nan() || beta < 0.0 {
        return Err(Error::Domain(format!("inverse temperature {beta} must be non-negative")));
    }
    let d = hamiltonian.nrows();
    if d == 0 || hamiltonian.ncols() != d {
        return Err(Error::Dimension("Hamiltonian must be square and non-empty".into()));
    }
    if (hamiltonian - hamiltonian.adjoint()).norm() > 1e-10 * hamiltonian.norm().max(1.0) {
        return Err(Error::InvalidState("Hamiltonian is not Hermitian".into()));
    }
    let eig = eigh(hamiltonian);
    let e0 = eig.values[0];
    let scale = eig.values.iter().map(|e| e.abs()).fold(1.0, f64::max);
    let weights: Vec<f64> = if beta.is_infinite() {
        eig.values.iter().map(|&e| if e - e0 <= DEGENERACY_TOL * scale { 1.0 } else { 0.0 }).collect()
    } else {
        eig.values.iter().map(|&e| (-beta * (e - e0)).exp()).collect()
    };
    let z: f64 = weights.iter().sum();
    let mut v = eig.vectors.clone();
    for (j, w) in weights.iter().enumerate() {
        let s = (w / z).sqrt();
        for x in v.column_mut(j).iter_mut() {
            *x *= s;
        }
    }
    DensityOperator::new(&v * v.adjoint(), DimensionSpec::single(d)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalPair {
    rho_hc: DensityOperator,
    hamiltonian_h: ComplexMatrix,
    hamiltonian_c: ComplexMatrix,
    beta_h: f64,
    beta_c: f64,
}

impl ThermalPair {
    /// Checks that both marginals are Gibbs within [`MARGINAL_TOL`] in trace distance.
    pub fn new(
        rho_hc: DensityOperator,
        hamiltonian_h: ComplexMatrix,
        hamiltonian_c: ComplexMatrix,
        beta_h: f64,
        beta_c: f64,
    ) -> Result<Self> {
        let (dh, dc) = (hamiltonian_h.nrows(), hamiltonian_c.nrows());
        if rho_hc.dim() != dh * dc {
            return Err(Error::Dimension(format!("state dimension {} is not {dh}·{dc}", rho_hc.dim())));
        }
        let rho_hc = rho_hc.with_dims(DimensionSpec::new(vec![dh, dc])?)?;
        for (keep, beta, h, name) in [(0, beta_h, &hamiltonian_h, "H"), (1, beta_c, &hamiltonian_c, "C")] {
            let marginal = rho_hc.partial_trace(&[keep])?;
            let gibbs = gibbs_state(beta, h)?;
            let dist = 0.5 * trace_norm_hermitian(&(marginal.matrix() - gibbs.matrix()));
            if dist > MARGINAL_TOL {
                return Err(Error::InvalidState(format!("marginal on {name} is {dist:e} from Gibbs")));
            }
        }
        Ok(Self { rho_hc, hamiltonian_h, hamiltonian_c, beta_h, beta_c })
    }

    /// `γ_H ⊗ γ_C`.
    pub fn product(
        beta_h: f64,
        hamiltonian_h: ComplexMatrix,
        beta_c: f64,
        hamiltonian_c: ComplexMatrix,
    ) -> Result<Self> {
        let rho = gibbs_state(beta_h, &hamiltonian_h)?.tensor(&gibbs_state(beta_c, &hamiltonian_c)?);
        Self::new(rho, hamiltonian_h, hamiltonian_c, beta_h, beta_c)
    }

    /// Entangled two-qubit pair with Gibbs marginals for `H = C = diag(0, gap)`.
    ///
    /// Half of the `|11⟩` population is moved to `|01⟩` and `|10⟩` (and taken
    /// from `|00⟩`), which leaves the marginals unchanged, and the
    /// `{|01⟩, |10⟩}` block is made pure with coherence `i√(p₀₁p₁₀)`.
    /// The coherence exceeds `√(p₀₀p₁₁)`, so the state is not PPT.
    pub fn correlated_reference(beta_h: f64, beta_c: f64, gap: f64) -> Result<Self> {
        if gap.is_nan() || gap <= 0.0 {
            return Err(Error::Domain(format!("energy gap {gap} must be positive")));
        }
        let ham = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(gap, 0.0),
        ]));
        let gh = gibbs_state(beta_h, &ham)?;
        let gc = gibbs_state(beta_c, &ham)?;
        let (h0, h1) = (gh.matrix()[(0, 0)].re, gh.matrix()[(1, 1)].re);
        let (c0, c1) = (gc.matrix()[(0, 0)].re, gc.matrix()[(1, 1)].re);
        let t = 0.5 * h1 * c1;
        let (p00, p01, p10, p11) = (h0 * c0 - t, h0 * c1 + t, h1 * c0 + t, h1 * c1 - t);
        let mut m = ComplexMatrix::zeros(4, 4);
        m[(0, 0)] = p00.into();
        m[(1, 1)] = p01.into();
        m[(2, 2)] = p10.into();
        m[(3, 3)] = p11.into();
        let c = Complex64::new(0.0, (p01 * p10).sqrt());
        m[(1, 2)] = c;
        m[(2, 1)] = c.conj();
        let rho = DensityOperator::new(m, DimensionSpec::new(vec![2, 2])?)?;
        Self::new(rho, ham.clone(), ham, beta_h, beta_c)
    }

    pub fn state(&self) -> &DensityOperator {
        &self.rho_hc
    }

    pub fn hamiltonian_h(&self) -> &ComplexMatrix {
        &self.hamiltonian_h
    }

    pub fn hamiltonian_c(&self) -> &ComplexMatrix {
        &self.hamiltonian_c
    }

    pub fn beta_h(&self) -> f64 {
        self.beta_h
    }

    pub fn beta_c(&self) -> f64 {
        self.beta_c
    }

    fn dims(&self) -> (usize, usize) {
        (self.hamiltonian_h.nrows(), self.hamiltonian_c.nrows())
    }

    /// `H_H ⊗ 1 + 1 ⊗ H_C`.
    pub fn total_hamiltonian(&self) -> ComplexMatrix {
        let (dh, dc) = self.dims();
        kron(&self.hamiltonian_h, &identity(dc)) + kron(&identity(dh), &self.hamiltonian_c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatExchange {
    pub dq_h: f64,
    pub dq_c: f64,
    /// `Tr((H_H + H_C)(ρ′ − ρ))`; zero for energy-conserving unitaries.
    pub total: f64,
}

fn exchange_unchecked(pair: &ThermalPair, u: &ComplexMatrix) -> HeatExchange {
    let (dh, dc) = pair.dims();
    let rho = pair.rho_hc.matrix();
    let diff = u * rho * u.adjoint() - rho;
    let eh = kron(&pair.hamiltonian_h, &identity(dc));
    let ec = kron(&identity(dh), &pair.hamiltonian_c);
    let dq_h = (&eh * &diff).trace().re;
    let dq_c = (&ec * &diff).trace().re;
    let total = ((eh + ec) * diff).trace().re;
    HeatExchange { dq_h, dq_c, total }
}

/// Local energy changes after `ρ ↦ UρU†`.
pub fn heat_exchange(pair: &ThermalPair, u: &ComplexMatrix) -> Result<HeatExchange> {
    let n = pair.rho_hc.dim();
    if u.nrows() != n || u.ncols() != n {
        return Err(Error::Dimension(format!("unitary must be {n}x{n}")));
    }
    let defect = unitarity_defect(u);
    if defect > 1e-8 {
        return Err(Error::InvalidState(format!("matrix is not unitary (defect {defect:e})")));
    }
    Ok(exchange_unchecked(pair, u))
}

/// Eigenbasis of the total Hamiltonian split into degenerate blocks.
#[derive(Debug, Clone)]
pub struct EnergyBlocks {
    basis: ComplexMatrix,
    /// Column ranges of `basis` per block.
    ranges: Vec<(usize, usize)>,
}

impl EnergyBlocks {
    pub fn new(pair: &ThermalPair) -> Self {
        let eig = eigh(&pair.total_hamiltonian());
        let scale = eig.values.iter().map(|e| e.abs()).fold(1.0, f64::max);
        let mut ranges = Vec::new();
        let mut start = 0;
        for j in 1..=eig.values.len() {
            if j == eig.values.len() || eig.values[j] - eig.values[j - 1] > DEGENERACY_TOL * scale {
                ranges.push((start, j));
                start = j;
            }
        }
        Self { basis: eig.vectors, ranges }
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.ranges.iter().map(|(a, b)| b - a).collect()
    }

    /// `W (⊕ U_k) W†` from per-block unitaries.
    pub fn assemble(&self, blocks: &[ComplexMatrix]) -> ComplexMatrix {
        let n = self.basis.nrows();
        let mut d = ComplexMatrix::zeros(n, n);
        for (&(a, b), u) in self.ranges.iter().zip(blocks) {
            d.view_mut((a, a), (b - a, b - a)).copy_from(u);
        }
        &self.basis * d * self.basis.adjoint()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalySearch {
    /// Row-major `(re, im)` entries of the best unitary.
    pub unitary: Vec<(f64, f64)>,
    pub dim: usize,
    pub exchange: HeatExchange,
    /// Best `dQ_H` among the Haar samples, before refinement.
    pub sampled_dq_h: f64,
    /// First sample index with `dQ_H > 0`, if any.
    pub first_anomalous_sample: Option<usize>,
    pub samples: usize,
}

impl AnomalySearch {
    pub fn unitary_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_row_iterator(
            self.dim,
            self.dim,
            self.unitary.iter().map(|&(re, im)| Complex64::new(re, im)),
        )
    }

    pub fn is_anomalous(&self) -> bool {
        self.exchange.dq_h > 0.0
    }
}

/// `exp(i h G)` for Hermitian `G`.
fn expi(g: &ComplexMatrix, h: f64) -> ComplexMatrix {
    let eig = eigh(g);
    let mut v = eig.vectors.clone();
    for j in 0..v.ncols() {
        let phase = Complex64::from_polar(1.0, h * eig.values[j]);
        for x in v.column_mut(j).iter_mut() {
            *x *= phase;
        }
    }
    v * eig.vectors.adjoint()
}

/// Hermitian generators of `u(m)`: diagonal units, then symmetric and antisymmetric pairs.
fn generators(m: usize) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(m * m);
    for i in 0..m {
        let mut g = ComplexMatrix::zeros(m, m);
        g[(i, i)] = Complex64::new(1.0, 0.0);
        out.push(g);
    }
    for i in 0..m {
        for j in i + 1..m {
            let mut g = ComplexMatrix::zeros(m, m);
            g[(i, j)] = Complex64::new(1.0, 0.0);
            g[(j, i)] = Complex64::new(1.0, 0.0);
            out.push(g);
            let mut g = ComplexMatrix::zeros(m, m);
            g[(i, j)] = Complex64::new(0.0, -1.0);
            g[(j, i)] = Complex64::new(0.0, 1.0);
            out.push(g);
        }
    }
    out
}

/// Coordinate ascent of `dQ_H` over the block generators.
fn refine(pair: &ThermalPair, blocks: &EnergyBlocks, mut units: Vec<ComplexMatrix>) -> Vec<ComplexMatrix> {
    let gens: Vec<Vec<ComplexMatrix>> = blocks.sizes().into_iter().map(generators).collect();
    let mut best = exchange_unchecked(pair, &blocks.assemble(&units)).dq_h;
    let mut step = 0.5;
    while step > 1e-10 {
        let mut improved = false;
        for k in 0..units.len() {
            for g in &gens[k] {
                for h in [step, -step] {
                    let candidate = expi(g, h) * &units[k];
                    let saved = std::mem::replace(&mut units[k], candidate);
                    let value = exchange_unchecked(pair, &blocks.assemble(&units)).dq_h;
                    if value > best + 1e-15 {
                        best = value;
                        improved = true;
                    } else {
                        units[k] = saved;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    units
}

/// Searches energy-conserving unitaries for the largest `dQ_H`.
///
/// Sample `t` draws independent Haar unitaries on each degenerate block of
/// `H_H + H_C` from stream `t` of `seed`; the best sample is then refined by
/// coordinate ascent.
pub fn find_anomalous_flow(pair: &ThermalPair, n_search: usize, seed: Seed) -> Result<AnomalySearch> {
    if n_search == 0 {
        return Err(Error::Domain("search budget must be at least 1".into()));
    }
    if pair.beta_h.is_nan() || pair.beta_c.is_nan() || pair.beta_h >= pair.beta_c {
        return Err(Error::Domain(format!("H must be hotter than C: β_H = {}, β_C = {}", pair.beta_h, pair.beta_c)));
    }
    let blocks = EnergyBlocks::new(pair);
    let sizes = blocks.sizes();
    let samples: Vec<(Vec<ComplexMatrix>, f64)> = (0..n_search)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed.stream(t as u64);
            let units: Vec<ComplexMatrix> = sizes.iter().map(|&m| haar_unitary(m, &mut rng)).collect();
            let dq = exchange_unchecked(pair, &blocks.assemble(&units)).dq_h;
            (units, dq)
        })
        .collect();
    let first = samples.iter().position(|(_, dq)| *dq > 0.0);
    let (best_idx, _) =
        samples
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, (_, dq))| if *dq > acc.1 { (i, *dq) } else { acc });
    let sampled = samples[best_idx].1;
    let units = refine(pair, &blocks, samples[best_idx].0.clone());
    let u = blocks.assemble(&units);
    let exchange = exchange_unchecked(pair, &u);
    let dim = u.nrows();
    let unitary = u.transpose().iter().map(|z| (z.re, z.im)).collect();
    Ok(AnomalySearch {
        unitary,
        dim,
        exchange,
        sampled_dq_h: sampled,
        first_anomalous_sample: first,
        samples: n_search,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSearch {
    pub points: usize,
    pub min_dq_c: f64,
    pub max_dq_h: f64,
}

/// Exhaustive grid over energy-conserving unitaries whose degenerate blocks
/// have size at most 2. Each 2-block runs over
/// `[[e^{ia} cos θ, e^{ib} sin θ], [−e^{−ib} sin θ, e^{−ia} cos θ]]`
/// with `resolution` points per angle; 1-blocks are left fixed, which is
/// exact for states without coherence between energy levels.
pub fn energy_conserving_grid_search(pair: &ThermalPair, resolution: usize) -> Result<GridSearch> {
    if resolution < 2 {
        return Err(Error::Domain("grid resolution must be at least 2".into()));
    }
    let blocks = EnergyBlocks::new(pair);
    let sizes = blocks.sizes();
    if sizes.iter().any(|&m| m > 2) {
        return Err(Error::Domain(format!("grid search supports blocks of size ≤ 2, got {sizes:?}")));
    }
    let pi = std::f64::consts::PI;
    let mut grid = Vec::with_capacity(resolution.pow(3));
    for i in 0..resolution {
        let theta = 0.5 * pi * i as f64 / (resolution - 1) as f64;
        for j in 0..resolution {
            let a = 2.0 * pi * j as f64 / resolution as f64;
            for k in 0..resolution {
                let b = 2.0 * pi * k as f64 / resolution as f64;
                let (c, s) = (theta.cos(), theta.sin());
                grid.push(ComplexMatrix::from_row_slice(
                    2,
                    2,
                    &[
                        Complex64::from_polar(c, a),
                        Complex64::from_polar(s, b),
                        -Complex64::from_polar(s, -b),
                        Complex64::from_polar(c, -a),
                    ],
                ));
            }
        }
    }
    let two: Vec<usize> = sizes.iter().enumerate().filter(|(_, &m)| m == 2).map(|(i, _)| i).collect();
    let mut result = GridSearch { points: 0, min_dq_c: f64::INFINITY, max_dq_h: f64::NEG_INFINITY };
    let mut counter = vec![0usize; two.len()];
    loop {
        let units: Vec<ComplexMatrix> = sizes
            .iter()
            .enumerate()
            .map(|(i, &m)| match two.iter().position(|&t| t == i) {
                Some(p) => grid[counter[p]].clone(),
                None => identity(m),
            })
            .collect();
        let ex = exchange_unchecked(pair, &blocks.assemble(&units));
        result.points += 1;
        result.min_dq_c = result.min_dq_c.min(ex.dq_c);
        result.max_dq_h = result.max_dq_h.max(ex.dq_h);
        // Odometer over the product grid.
        let mut p = 0;
        while p < counter.len() {
            counter[p] += 1;
            if counter[p] < grid.len() {
                break;
            }
            counter[p] = 0;
            p += 1;
        }
        if p == counter.len() {
            break;
        }
    }
    Ok(result)
}
