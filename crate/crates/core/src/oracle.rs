//! Exact Gaussian reference values.
//!
//! For `G ~ N(0, σ²I)` and symmetric `A` with eigenvalues `e_i`, rotational
//! invariance gives `GᵀAG = Σ μ_i W_i²` with `W` standard normal and
//! `μ_i = σ²·e_i`, hence `E exp(λ GᵀAG) = Π (1 − 2λμ_i)^(−1/2)` whenever every
//! factor is positive. Negative `λ` is accepted.

use crate::error::{Error, Result};
use crate::linalg::{eigen_decompose, trace, Matrix, SymMatrix};
use crate::subgauss::SubGaussianDist;

/// `μ_i = σ²·eig_i(a)`.
pub fn gaussian_spectrum(a: &SymMatrix, sigma2: f64) -> Result<Vec<f64>> {
    Ok(eigen_decompose(a)?.eigenvalues.into_iter().map(|e| sigma2 * e).collect())
}

/// `Π (1 − 2λμ_i)^(−1/2)` for a given spectrum.
pub fn gaussian_chi2_mgf(mu: &[f64], lambda: f64) -> Result<f64> {
    let mut log_sum = 0.0;
    for &m in mu {
        let x = 2.0 * lambda * m;
        if !(x < 1.0) {
            let hi = if m > 0.0 { 1.0 / (2.0 * m) } else { f64::INFINITY };
            return Err(Error::domain("lambda", lambda, f64::NEG_INFINITY, hi, false));
        }
        log_sum += (-x).ln_1p();
    }
    Ok((-0.5 * log_sum).exp())
}

/// `E exp(λ·GᵀAG)` for `G ~ N(0, σ²I)`.
pub fn exact_gaussian_quadratic_mgf(a: &SymMatrix, sigma2: f64, lambda: f64) -> Result<f64> {
    check_sigma2(sigma2)?;
    if lambda == 0.0 {
        return Ok(1.0);
    }
    gaussian_chi2_mgf(&gaussian_spectrum(a, sigma2)?, lambda)
}

/// `E exp(λ(Z² − σ²)) = e^(−λσ²)·(1 − 2λσ²)^(−1/2)` for `Z ~ N(0, σ²)`.
pub fn exact_gaussian_centered_square_mgf(sigma2: f64, lambda: f64) -> Result<f64> {
    check_sigma2(sigma2)?;
    let x = 2.0 * lambda * sigma2;
    if !(x < 1.0) {
        return Err(Error::domain("lambda", lambda, f64::NEG_INFINITY, 1.0 / (2.0 * sigma2), false));
    }
    Ok((-lambda * sigma2 - 0.5 * (-x).ln_1p()).exp())
}

/// `E[XᵀMX] = m₂·tr(M)` for iid mean-zero entries with second moment `m₂`.
pub fn exact_quadratic_mean(m: &Matrix, d: &SubGaussianDist) -> f64 {
    d.second_moment() * trace(m)
}

/// Exact centred MGF of `XᵀMX` for Gaussian entries:
/// `e^(−λσ² tr A)·Π(1 − 2λμ_i)^(−1/2)`.
pub fn exact_gaussian_centered_form_mgf(m: &Matrix, sigma2: f64, lambda: f64) -> Result<f64> {
    let a = crate::linalg::symmetrize(m);
    let mu = gaussian_spectrum(&a, sigma2)?;
    let raw = gaussian_chi2_mgf(&mu, lambda)?;
    Ok(raw * (-lambda * sigma2 * trace(&a)).exp())
}

fn check_sigma2(sigma2: f64) -> Result<()> {
    if sigma2.is_finite() && sigma2 > 0.0 {
        Ok(())
    } else {
        Err(Error::Validation(format!("sigma2 must be positive and finite, got {sigma2}")))
    }
}
