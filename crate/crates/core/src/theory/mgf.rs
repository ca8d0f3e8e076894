//! Moment generating function of the Gaussian quadratic form `Gamma = ||v||^2`,
//! `v ~ N(m, C)`:
//!
//! `M(x) = det(I - 2xC)^{-1/2} exp(x m^T (I - 2xC)^{-1} m)`.
//!
//! The exponent is the usual `-1/2 m^T [I - (I - 2xC)^{-1}] C^{-1} m` with the
//! `C^{-1}` cancelled, so singular covariances need no special treatment.

use nalgebra::{DMatrix, DVector};

use super::stats::DifferenceStatistics;
use super::TheoryError;

/// Dense evaluation over the full vector via a Cholesky factorization of `I - 2xC`.
pub fn mgf_dense(mean: &DVector<f64>, cov: &DMatrix<f64>, x: f64) -> Result<f64, TheoryError> {
    Ok(log_mgf_dense(mean, cov, x)?.exp())
}

fn log_mgf_dense(mean: &DVector<f64>, cov: &DMatrix<f64>, x: f64) -> Result<f64, TheoryError> {
    let dim = mean.len();
    let a = DMatrix::<f64>::identity(dim, dim) - cov * (2.0 * x);
    let chol = a.cholesky().ok_or(TheoryError::Indefinite { x })?;
    let log_det: f64 = chol.l_dirty().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
    let mut log = -0.5 * log_det;
    if mean.iter().any(|&v| v != 0.0) {
        let z = chol.solve(mean);
        log += x * mean.dot(&z);
    }
    Ok(log)
}

/// Blockwise evaluation: the product of per-block MGFs. Zero-mean blocks skip
/// the exponent.
pub fn mgf_quadratic_form(stats: &DifferenceStatistics, x: f64) -> Result<f64, TheoryError> {
    stats.check_psd()?;
    let mut log = 0.0;
    for b in 0..stats.blocks().len() {
        log += log_mgf_dense(&stats.block_mean(b), &stats.block_cov(b), x)?;
    }
    Ok(log.exp())
}

/// Eigen-decomposed form for evaluating one quadratic form at many arguments:
/// `ln M(x) = sum_j [-1/2 ln(1 - 2x lambda_j) + x b_j^2 / (1 - 2x lambda_j)]`
/// with `b = Q^T m` in each block's eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralForm {
    /// `(lambda_j, b_j^2)` pairs.
    terms: Vec<(f64, f64)>,
}

impl SpectralForm {
    pub fn new(stats: &DifferenceStatistics) -> Result<Self, TheoryError> {
        let scale = stats.cov.abs().max().max(f64::MIN_POSITIVE);
        let mut terms = Vec::with_capacity(stats.dim());
        for b in 0..stats.blocks().len() {
            let m = stats.block_mean(b);
            let eig = stats.block_cov(b).symmetric_eigen();
            for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
                if lambda < -1e-9 * scale {
                    return Err(TheoryError::NotPsd {
                        min_eigenvalue: lambda,
                    });
                }
                let proj = eig.eigenvectors.column(j).dot(&m);
                terms.push((lambda.max(0.0), proj * proj));
            }
        }
        Ok(Self { terms })
    }

    pub fn ln_mgf(&self, x: f64) -> Result<f64, TheoryError> {
        let mut log = 0.0;
        for &(lambda, b2) in &self.terms {
            let d = 1.0 - 2.0 * x * lambda;
            if d <= 0.0 {
                return Err(TheoryError::Indefinite { x });
            }
            log += -0.5 * d.ln() + x * b2 / d;
        }
        Ok(log)
    }

    pub fn mgf(&self, x: f64) -> Result<f64, TheoryError> {
        Ok(self.ln_mgf(x)?.exp())
    }
}
