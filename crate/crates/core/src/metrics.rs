//! Trace distance, fidelity and purified distance for (sub)normalized states.

use crate::error::{Error, Result};
use crate::linalg::{sqrt_psd, trace_norm_hermitian, ComplexMatrix, DensityOperator};

/// Radicands down to this value are treated as round-off and clamped to zero.
const RADICAND_FLOOR: f64 = -1e-12;

fn check_dims(rho: &DensityOperator, sigma: &DensityOperator) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Dimension(format!("states have dimensions {} and {}", rho.dim(), sigma.dim())));
    }
    Ok(())
}

fn clamped_sqrt(x: f64, what: &str) -> Result<f64> {
    if x < RADICAND_FLOOR {
        return Err(Error::Numerical(format!("negative radicand {x:e} in {what}")));
    }
    Ok(x.max(0.0).sqrt())
}

/// `½‖ρ − σ‖₁`.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    check_dims(rho, sigma)?;
    Ok(0.5 * trace_norm_hermitian(&(rho.matrix() - sigma.matrix())))
}

/// `‖√ρ√σ‖₁`, as the sum of singular values of `√ρ√σ`.
///
/// A direct SVD keeps tiny singular values accurate to round-off; taking
/// square roots of eigenvalues of `M†M` would amplify `1e-17` noise to `1e-9`.
pub fn fidelity_matrices(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> f64 {
    let m = sqrt_psd(rho) * sqrt_psd(sigma);
    m.singular_values().iter().sum()
}

/// Fidelity; the generalized form adds `√((1−Trρ)(1−Trσ))`.
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator, generalized: bool) -> Result<f64> {
    check_dims(rho, sigma)?;
    let f = fidelity_matrices(rho.matrix(), sigma.matrix());
    if !generalized || rho.is_normalized() || sigma.is_normalized() {
        return Ok(f);
    }
    let defect = (1.0 - rho.trace()) * (1.0 - sigma.trace());
    Ok(f + clamped_sqrt(defect, "generalized fidelity")?)
}

/// `√(1 − F̄²)` with the generalized fidelity.
pub fn purified_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    let f = fidelity(rho, sigma, true)?;
    clamped_sqrt(1.0 - f * f, "purified distance")
}
