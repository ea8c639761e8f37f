//! Dense complex linear algebra with tensor-factor bookkeeping.
//!
//! Factor ordering follows the Kronecker convention: for factors
//! `[d0, d1, ..., dn]` the linear index of `(i0, ..., in)` is
//! `((i0 * d1 + i1) * d2 + i2) ...`, so factor 0 is the most significant.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Tolerance used to validate Hermiticity, positivity and trace.
pub const STATE_TOL: f64 = 1e-10;
/// Relative eigenvalue cutoff for support and rank decisions.
pub const RANK_THRESHOLD: f64 = 1e-10;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Ordered list of tensor-factor dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DimensionSpec {
    factors: Vec<usize>,
}

impl DimensionSpec {
    pub fn new(factors: Vec<usize>) -> Result<Self> {
        if factors.is_empty() || factors.contains(&0) {
            return Err(Error::Dimension(format!("factor dimensions must be positive, got {factors:?}")));
        }
        Ok(Self { factors })
    }

    pub fn single(d: usize) -> Result<Self> {
        Self::new(vec![d])
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn total(&self) -> usize {
        self.factors.iter().product()
    }

    /// Product of the dimensions of the listed factors.
    pub fn product_of(&self, idx: &[usize]) -> usize {
        idx.iter().map(|&i| self.factors[i]).product()
    }

    pub fn concat(&self, other: &DimensionSpec) -> DimensionSpec {
        let mut f = self.factors.clone();
        f.extend_from_slice(&other.factors);
        DimensionSpec { factors: f }
    }
}

/// Hermitian positive semidefinite operator with tensor structure.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    dims: DimensionSpec,
    normalized: bool,
}

impl DensityOperator {
    /// Validates and wraps a matrix. The stored matrix is symmetrized.
    ///
    /// Unit-trace inputs are flagged normalized; inputs with trace in
    /// `[0, 1]` are accepted as subnormalized.
    pub fn new(matrix: ComplexMatrix, dims: DimensionSpec) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::Dimension(format!("density operator must be square, got {}x{}", n, matrix.ncols())));
        }
        if dims.total() != n {
            return Err(Error::Dimension(format!("factors {:?} do not multiply to {n}", dims.factors())));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        let asym = (&matrix - matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if asym > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {asym:e})")));
        }
        let matrix = hermitian_part(&matrix);
        let min_eig = eigh(&matrix).values.min();
        if min_eig < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:e}")));
        }
        let tr = matrix.trace().re;
        let normalized = (tr - 1.0).abs() <= STATE_TOL;
        if !normalized && !(-STATE_TOL..=1.0 + STATE_TOL).contains(&tr) {
            return Err(Error::InvalidState(format!("trace {tr} outside [0, 1]")));
        }
        Ok(Self { matrix, dims, normalized })
    }

    /// Builds a state from any PSD matrix by dividing by its trace.
    pub fn from_unnormalized(matrix: ComplexMatrix, dims: DimensionSpec) -> Result<Self> {
        let tr = matrix.trace().re;
        if tr <= 0.0 {
            return Err(Error::InvalidState("trace must be positive".into()));
        }
        Self::new(matrix.unscale(tr), dims)
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let v = psi.vector();
        Self { matrix: v * v.adjoint(), dims: psi.dims().clone(), normalized: true }
    }

    pub fn maximally_mixed(dims: DimensionSpec) -> Self {
        let d = dims.total();
        Self { matrix: ComplexMatrix::identity(d, d).unscale(d as f64), dims, normalized: true }
    }

    /// Diagonal state with the given probabilities.
    pub fn diagonal(probs: &[f64], dims: DimensionSpec) -> Result<Self> {
        let m = ComplexMatrix::from_diagonal(&DVector::from_iterator(
            probs.len(),
            probs.iter().map(|&p| Complex64::new(p, 0.0)),
        ));
        Self::new(m, dims)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dims(&self) -> &DimensionSpec {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigh(&self.matrix).values.iter().copied().collect()
    }

    /// Numerical rank with the relative cutoff [`RANK_THRESHOLD`].
    pub fn rank(&self) -> usize {
        let ev = self.eigenvalues();
        let cut = support_cutoff(&ev);
        ev.iter().filter(|&&l| l > cut).count()
    }

    /// Reduced operator on the kept factors (in ascending factor order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        partial_trace(self, keep)
    }

    pub fn tensor(&self, other: &DensityOperator) -> Self {
        Self {
            matrix: kron(&self.matrix, &other.matrix),
            dims: self.dims.concat(&other.dims),
            normalized: self.normalized && other.normalized,
        }
    }

    /// Reorders the tensor factors; `order[k]` is the old index of new factor `k`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        let matrix = permute_factors(&self.matrix, self.dims.factors(), order)?;
        let dims = DimensionSpec::new(order.iter().map(|&i| self.dims.factors()[i]).collect())?;
        Ok(Self { matrix, dims, normalized: self.normalized })
    }

    /// Traces out every factor not listed and regroups the remainder into a
    /// two-factor operator `[prod a, prod b]`.
    pub fn bipartition(&self, a: &[usize], b: &[usize]) -> Result<Self> {
        let n = self.dims.len();
        let mut seen = vec![false; n];
        for &i in a.iter().chain(b) {
            if i >= n || seen[i] {
                return Err(Error::Dimension(format!("invalid or repeated factor index {i} for {n} factors")));
            }
            seen[i] = true;
        }
        let mut keep: Vec<usize> = a.iter().chain(b).copied().collect();
        keep.sort_unstable();
        let reduced = self.partial_trace(&keep)?;
        let order: Vec<usize> = a.iter().chain(b).map(|i| keep.iter().position(|k| k == i).unwrap()).collect();
        let permuted = reduced.permute(&order)?;
        let dims = DimensionSpec::new(vec![self.dims.product_of(a), self.dims.product_of(b)])?;
        Ok(Self { matrix: permuted.matrix, dims, normalized: self.normalized })
    }

    /// Same matrix with a different factorization of the same total dimension.
    pub fn with_dims(&self, dims: DimensionSpec) -> Result<Self> {
        if dims.total() != self.dim() {
            return Err(Error::Dimension(format!("factors {:?} do not multiply to {}", dims.factors(), self.dim())));
        }
        Ok(Self { matrix: self.matrix.clone(), dims, normalized: self.normalized })
    }

    /// Conjugates by `u`: returns `u rho u^dagger` (trace is kept if `u` is unitary).
    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.ncols() != self.dim() || u.nrows() != self.dim() {
            return Err(Error::Dimension("unitary size mismatch".into()));
        }
        Ok(Self {
            matrix: hermitian_part(&(u * &self.matrix * u.adjoint())),
            dims: self.dims.clone(),
            normalized: self.normalized,
        })
    }
}

/// Unit vector with tensor structure.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    vector: ComplexVector,
    dims: DimensionSpec,
}

impl PureState {
    pub fn new(vector: ComplexVector, dims: DimensionSpec) -> Result<Self> {
        if dims.total() != vector.len() {
            return Err(Error::Dimension(format!("factors {:?} do not multiply to {}", dims.factors(), vector.len())));
        }
        let norm = vector.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("vector norm {norm} is not 1")));
        }
        Ok(Self { vector, dims })
    }

    pub fn vector(&self) -> &ComplexVector {
        &self.vector
    }

    pub fn dims(&self) -> &DimensionSpec {
        &self.dims
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator::from_pure(self)
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: DVector<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `V f(D) V^dagger`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let s = f(self.values[j]);
            scaled.column_mut(j).scale_mut(s);
        }
        scaled * self.vectors.adjoint()
    }
}

pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Hermitian eigendecomposition of `(m + m^dagger)/2`, eigenvalues ascending.
pub fn eigh(m: &ComplexMatrix) -> HermitianEigen {
    let eig = hermitian_part(m).symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, idx.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (k, &i) in idx.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    HermitianEigen { values, vectors }
}

pub fn eigvalsh(m: &ComplexMatrix) -> Vec<f64> {
    eigh(m).values.iter().copied().collect()
}

/// Principal square root of a PSD matrix; negative round-off is clamped.
pub fn sqrt_psd(m: &ComplexMatrix) -> ComplexMatrix {
    eigh(m).map(|x| x.max(0.0).sqrt())
}

/// Cutoff below which an eigenvalue counts as zero.
pub(crate) fn support_cutoff(values: &[f64]) -> f64 {
    let lmax = values.iter().copied().fold(0.0, f64::max);
    RANK_THRESHOLD * lmax
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Kronecker product of a list of matrices.
pub fn kron_all(ms: &[&ComplexMatrix]) -> ComplexMatrix {
    let mut out = ComplexMatrix::identity(1, 1);
    for m in ms {
        out = out.kronecker(*m);
    }
    out
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

fn check_factor_indices(dims: &[usize], idx: &[usize]) -> Result<()> {
    let mut seen = vec![false; dims.len()];
    for &i in idx {
        if i >= dims.len() || seen[i] {
            return Err(Error::Dimension(format!("invalid or repeated factor index {i} for {} factors", dims.len())));
        }
        seen[i] = true;
    }
    Ok(())
}

/// Offsets of every multi-index over the listed factors, in row-major order
/// of those factors, expressed as contributions to the full linear index.
fn factor_offsets(dims: &[usize], which: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let mut offsets = vec![0usize];
    for &f in which {
        let mut next = Vec::with_capacity(offsets.len() * dims[f]);
        for &o in &offsets {
            for i in 0..dims[f] {
                next.push(o + i * strides[f]);
            }
        }
        offsets = next;
    }
    offsets
}

/// Partial trace of a raw matrix over every factor not in `keep`.
/// Kept factors appear in ascending order.
pub fn partial_trace_matrix(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    check_factor_indices(dims, keep)?;
    let n: usize = dims.iter().product();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::Dimension(format!("matrix is not {n}x{n}")));
    }
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let ko = factor_offsets(dims, &keep);
    let to = factor_offsets(dims, &traced);
    let dk = ko.len();
    let mut out = ComplexMatrix::zeros(dk, dk);
    for (j, &oj) in ko.iter().enumerate() {
        for (i, &oi) in ko.iter().enumerate() {
            let mut acc = ZERO;
            for &t in &to {
                acc += m[(oi + t, oj + t)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

pub fn partial_trace(rho: &DensityOperator, keep: &[usize]) -> Result<DensityOperator> {
    let dims = rho.dims().factors();
    let m = partial_trace_matrix(rho.matrix(), dims, keep)?;
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    let new_dims = if kept.is_empty() {
        DimensionSpec::single(1)?
    } else {
        DimensionSpec::new(kept.iter().map(|&i| dims[i]).collect())?
    };
    Ok(DensityOperator { matrix: hermitian_part(&m), dims: new_dims, normalized: rho.is_normalized() })
}

/// Reorders tensor factors of a square matrix; `order[k]` is the old index
/// of new factor `k`.
pub fn permute_factors(m: &ComplexMatrix, dims: &[usize], order: &[usize]) -> Result<ComplexMatrix> {
    if order.len() != dims.len() {
        return Err(Error::Dimension("permutation length mismatch".into()));
    }
    check_factor_indices(dims, order)?;
    // Offsets enumerated in new-order row-major are exactly old linear indices.
    let map = factor_offsets(dims, order);
    let n = map.len();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::Dimension(format!("matrix is not {n}x{n}")));
    }
    Ok(ComplexMatrix::from_fn(n, n, |i, j| m[(map[i], map[j])]))
}

/// Applies `u` to the first factor of a bipartite operator: `(u ⊗ 1) m (u ⊗ 1)^dagger`.
/// `u` may be rectangular, mapping dimension `u.ncols()` to `u.nrows()`.
pub fn conjugate_first_factor(m: &ComplexMatrix, u: &ComplexMatrix, d_rest: usize) -> Result<ComplexMatrix> {
    let (dout, din) = (u.nrows(), u.ncols());
    if m.nrows() != din * d_rest || m.ncols() != din * d_rest {
        return Err(Error::Dimension("operator does not match the unitary".into()));
    }
    if d_rest == 1 {
        return Ok(u * m * u.adjoint());
    }
    // Left multiplication: rows indexed (a, r) -> (a', r).
    let mut left = ComplexMatrix::zeros(dout * d_rest, din * d_rest);
    for col in 0..din * d_rest {
        for r in 0..d_rest {
            for a2 in 0..dout {
                let mut acc = ZERO;
                for a in 0..din {
                    acc += u[(a2, a)] * m[(a * d_rest + r, col)];
                }
                left[(a2 * d_rest + r, col)] = acc;
            }
        }
    }
    let ua = u.adjoint();
    let mut out = ComplexMatrix::zeros(dout * d_rest, dout * d_rest);
    for b2 in 0..dout {
        for r in 0..d_rest {
            for row in 0..dout * d_rest {
                let mut acc = ZERO;
                for b in 0..din {
                    acc += left[(row, b * d_rest + r)] * ua[(b, b2)];
                }
                out[(row, b2 * d_rest + r)] = acc;
            }
        }
    }
    Ok(out)
}

/// Purification on `A ⊗ A'` with `|A'| = |A|`.
pub fn purify(rho: &DensityOperator) -> Result<PureState> {
    if !rho.is_normalized() {
        return Err(Error::InvalidState("purification requires a normalized state".into()));
    }
    let d = rho.dim();
    let (vec, _) = purification_vector(rho.matrix(), d);
    let dims = rho.dims().concat(&DimensionSpec::single(d)?);
    PureState::new(vec, dims)
}

/// Purification with the smallest ancilla, `|A'| = rank(rho)`.
pub fn purify_minimal(rho: &DensityOperator) -> Result<PureState> {
    if !rho.is_normalized() {
        return Err(Error::InvalidState("purification requires a normalized state".into()));
    }
    let (vec, r) = purification_vector(rho.matrix(), 0);
    let dims = rho.dims().concat(&DimensionSpec::single(r)?);
    PureState::new(vec, dims)
}

/// `sum_k sqrt(l_k) |v_k> ⊗ |k>`. With `ancilla == 0` only the support is kept.
fn purification_vector(m: &ComplexMatrix, ancilla: usize) -> (ComplexVector, usize) {
    let eig = eigh(m);
    let vals: Vec<f64> = eig.values.iter().copied().collect();
    let cut = support_cutoff(&vals);
    let d = m.nrows();
    let support: Vec<usize> = (0..d).rev().filter(|&k| vals[k] > cut).collect();
    let r = if ancilla == 0 { support.len().max(1) } else { ancilla };
    let mut v = ComplexVector::zeros(d * r);
    for (slot, &k) in support.iter().enumerate() {
        let s = vals[k].max(0.0).sqrt();
        for a in 0..d {
            v[a * r + slot] += eig.vectors[(a, k)] * s;
        }
    }
    let norm = v.norm();
    if norm > 0.0 {
        v.unscale_mut(norm);
    }
    (v, r)
}

/// Factorization `rho = V V^dagger` with `V` of size `d x rank`.
pub fn psd_factor(m: &ComplexMatrix) -> ComplexMatrix {
    let eig = eigh(m);
    let vals: Vec<f64> = eig.values.iter().copied().collect();
    let cut = support_cutoff(&vals);
    let support: Vec<usize> = (0..vals.len()).rev().filter(|&k| vals[k] > cut).collect();
    let d = m.nrows();
    let r = support.len().max(1);
    let mut v = ComplexMatrix::zeros(d, r);
    for (slot, &k) in support.iter().enumerate() {
        let s = vals[k].max(0.0).sqrt();
        v.set_column(slot, &(eig.vectors.column(k) * Complex64::new(s, 0.0)));
    }
    v
}

/// Projector onto eigenvectors with eigenvalue above `1e-10 * lambda_max`.
pub fn support_projector(rho: &DensityOperator) -> ComplexMatrix {
    support_projector_matrix(rho.matrix())
}

pub fn support_projector_matrix(m: &ComplexMatrix) -> ComplexMatrix {
    let eig = eigh(m);
    let vals: Vec<f64> = eig.values.iter().copied().collect();
    let cut = support_cutoff(&vals);
    eig.map(|l| if l > cut { 1.0 } else { 0.0 })
}

/// Largest absolute entry of `u u^dagger - 1`.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    let p = u * u.adjoint() - identity(u.nrows());
    p.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &ComplexMatrix) -> f64 {
    eigvalsh(m).iter().map(|l| l.abs()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pseudo_random(n: usize, m: usize, seed: u64) -> ComplexMatrix {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        ComplexMatrix::from_fn(n, m, |_, _| c(next(), next()))
    }

    fn random_state(dims: Vec<usize>, seed: u64) -> DensityOperator {
        let d: usize = dims.iter().product();
        let g = pseudo_random(d, d, seed);
        DensityOperator::from_unnormalized(&g * g.adjoint(), DimensionSpec::new(dims).unwrap()).unwrap()
    }

    #[test]
    fn kron_identity_and_shape() {
        let i2 = identity(2);
        assert_eq!(kron(&i2, &i2), identity(4));
        let k = kron(&ComplexMatrix::zeros(2, 3), &ComplexMatrix::zeros(4, 5));
        assert_eq!((k.nrows(), k.ncols()), (8, 15));
    }

    #[test]
    fn kron_mixed_product_matches_index_sum() {
        let a = pseudo_random(2, 2, 1);
        let b = pseudo_random(2, 2, 2);
        let cm = pseudo_random(2, 2, 3);
        let d = pseudo_random(2, 2, 4);
        let lhs = kron(&a, &b) * kron(&cm, &d);
        // Direct index-summation oracle for (AC) ⊗ (BD).
        for i1 in 0..2 {
            for i2 in 0..2 {
                for j1 in 0..2 {
                    for j2 in 0..2 {
                        let mut ac = ZERO;
                        let mut bd = ZERO;
                        for k in 0..2 {
                            ac += a[(i1, k)] * cm[(k, j1)];
                            bd += b[(i2, k)] * d[(k, j2)];
                        }
                        assert!((lhs[(i1 * 2 + i2, j1 * 2 + j2)] - ac * bd).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn partial_trace_product_and_bell() {
        let ra = random_state(vec![2], 5);
        let rb = random_state(vec![3], 6);
        let red = ra.tensor(&rb).partial_trace(&[0]).unwrap();
        assert!((red.matrix() - ra.matrix()).norm() < 1e-12);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = PureState::new(
            ComplexVector::from_vec(vec![c(s, 0.0), ZERO, ZERO, c(s, 0.0)]),
            DimensionSpec::new(vec![2, 2]).unwrap(),
        )
        .unwrap();
        let red = bell.density().partial_trace(&[1]).unwrap();
        assert!((red.matrix() - identity(2).scale(0.5)).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_matches_double_index_sum() {
        let rho = random_state(vec![2, 3], 7);
        let m = rho.matrix();
        let ra = rho.partial_trace(&[0]).unwrap();
        let rb = rho.partial_trace(&[1]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let s: Complex64 = (0..3).map(|b| m[(i * 3 + b, j * 3 + b)]).sum();
                assert!((ra.matrix()[(i, j)] - s).norm() < 1e-12);
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                let s: Complex64 = (0..2).map(|a| m[(a * 3 + i, a * 3 + j)]).sum();
                assert!((rb.matrix()[(i, j)] - s).norm() < 1e-12);
            }
        }
        let all = rho.partial_trace(&[]).unwrap();
        assert!((all.matrix()[(0, 0)].re - rho.trace()).abs() < 1e-12);
        assert!(rho.partial_trace(&[2]).is_err());
    }

    #[test]
    fn permute_and_bipartition() {
        let ra = random_state(vec![2], 8);
        let rb = random_state(vec![3], 9);
        let rc = random_state(vec![2], 10);
        let abc = ra.tensor(&rb).tensor(&rc);
        let cb = abc.bipartition(&[2], &[1]).unwrap();
        assert_eq!(cb.dims().factors(), &[2, 3]);
        assert!((cb.matrix() - kron(rc.matrix(), rb.matrix())).norm() < 1e-12);
        let p = abc.permute(&[1, 2, 0]).unwrap();
        let expect = kron_all(&[rb.matrix(), rc.matrix(), ra.matrix()]);
        assert!((p.matrix() - expect).norm() < 1e-12);
    }

    #[test]
    fn conjugate_first_factor_matches_kron() {
        let u = pseudo_random(3, 3, 11);
        let m = random_state(vec![3, 2], 12);
        let full = kron(&u, &identity(2));
        let expect = &full * m.matrix() * full.adjoint();
        let got = conjugate_first_factor(m.matrix(), &u, 2).unwrap();
        assert!((got - expect).norm() < 1e-12);
    }

    #[test]
    fn purify_round_trip() {
        let pure = PureState::new(ComplexVector::from_vec(vec![ONE, ZERO]), DimensionSpec::single(2).unwrap()).unwrap();
        let psi = purify(&pure.density()).unwrap();
        assert!((psi.vector()[0].norm() - 1.0).abs() < 1e-12);
        let mixed = DensityOperator::maximally_mixed(DimensionSpec::single(2).unwrap());
        let psi = purify(&mixed).unwrap();
        let red = psi.density().partial_trace(&[1]).unwrap();
        assert!((red.matrix() - identity(2).scale(0.5)).norm() < 1e-12);
        // rank-3 state on dimension 4
        let g = pseudo_random(4, 3, 13);
        let rho = DensityOperator::from_unnormalized(&g * g.adjoint(), DimensionSpec::single(4).unwrap()).unwrap();
        assert_eq!(rho.rank(), 3);
        for psi in [purify(&rho).unwrap(), purify_minimal(&rho).unwrap()] {
            let back = psi.density().partial_trace(&[0]).unwrap();
            assert!((back.matrix() - rho.matrix()).norm() < 1e-10);
        }
        assert_eq!(purify_minimal(&rho).unwrap().dims().factors(), &[4, 3]);
    }

    #[test]
    fn support_projector_examples() {
        let d = DensityOperator::diagonal(&[0.6, 0.4], DimensionSpec::single(2).unwrap()).unwrap();
        assert!((support_projector(&d) - identity(2)).norm() < 1e-12);
        let d = DensityOperator::diagonal(&[0.5, 0.5, 0.0], DimensionSpec::single(3).unwrap()).unwrap();
        let p = support_projector(&d);
        let expect = ComplexMatrix::from_diagonal(&DVector::from_vec(vec![ONE, ONE, ZERO]));
        assert!((p - expect).norm() < 1e-12);
    }

    #[test]
    fn rejects_invalid_states() {
        let dims = DimensionSpec::single(2).unwrap();
        assert!(DensityOperator::diagonal(&[1.2, -0.2], dims.clone()).is_err());
        assert!(DensityOperator::diagonal(&[0.8, 0.8], dims.clone()).is_err());
        let sub = DensityOperator::diagonal(&[0.3, 0.2], dims.clone()).unwrap();
        assert!(!sub.is_normalized());
        assert!(purify(&sub).is_err());
        let mut m = identity(2).scale(0.5);
        m[(0, 1)] = c(0.1, 0.0);
        assert!(DensityOperator::new(m, dims).is_err());
        assert!(DimensionSpec::new(vec![2, 0]).is_err());
    }
}
