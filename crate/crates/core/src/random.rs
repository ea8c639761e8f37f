//! Reproducible sampling of Haar unitaries and random states.
//!
//! The generator is ChaCha20 (via `rand_chacha`), keyed by the 64-bit seed.
//! Trial `k` draws from stream `k` of that key, so per-trial streams never
//! overlap and results do not depend on scheduling order.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DensityOperator, DimensionSpec, PureState};

pub type SampleRng = ChaCha20Rng;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    /// Generator for stream 0.
    pub fn rng(self) -> SampleRng {
        self.stream(0)
    }

    /// Independent generator for sub-stream `index`.
    pub fn stream(self, index: u64) -> SampleRng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.0);
        rng.set_stream(index);
        rng
    }
}

/// `d x m` matrix of i.i.d. standard complex Gaussians (unit variance per entry).
pub fn ginibre<R: Rng + ?Sized>(d: usize, m: usize, rng: &mut R) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(d, m, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * s, im * s)
    })
}

/// Haar-distributed `d x d` unitary.
///
/// QR of a Ginibre matrix followed by the phase fix `U = Q diag(r_ii/|r_ii|)`,
/// which makes the factorization unique and the result Haar.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    assert!(d >= 1, "unitary dimension must be positive");
    let qr = ginibre(d, d, rng).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let rjj = r[(j, j)];
        let n = rjj.norm();
        let phase = if n > 0.0 { rjj / n } else { Complex64::new(1.0, 0.0) };
        for z in q.column_mut(j).iter_mut() {
            *z *= phase;
        }
    }
    q
}

/// Haar-random unit vector in dimension `d`.
pub fn haar_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DVector<Complex64> {
    let g = ginibre(d, 1, rng);
    let v = g.column(0).into_owned();
    let n = v.norm();
    v.unscale(n)
}

pub fn random_pure<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<PureState> {
    let dims = DimensionSpec::new(dims.to_vec())?;
    PureState::new(haar_vector(dims.total(), rng), dims)
}

/// Random state of dimension `d` and rank `rank` from the induced measure
/// (reduction of a Haar-random pure state on `d ⊗ rank`).
pub fn random_density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> Result<DensityOperator> {
    random_state(&[d], rank, rng)
}

/// [`random_density`] with declared tensor factors.
pub fn random_state<R: Rng + ?Sized>(dims: &[usize], rank: usize, rng: &mut R) -> Result<DensityOperator> {
    let dims = DimensionSpec::new(dims.to_vec())?;
    let d = dims.total();
    if rank == 0 || rank > d {
        return Err(Error::Domain(format!("rank {rank} must lie in 1..={d}")));
    }
    let g = ginibre(d, rank, rng);
    DensityOperator::from_unnormalized(&g * g.adjoint(), dims)
}
