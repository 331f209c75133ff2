//! Dense complex non-Hermitian eigenvalues and smallest singular values.
//!
//! The eigenvalue path is Householder reduction to upper Hessenberg form
//! followed by complex single-shift QR with Wilkinson shifts and deflation.
//! Only eigenvalues are computed; eigenvectors appear solely as residual
//! probes obtained by inverse iteration on the Hessenberg matrix.
//!
//! [`EigBackend::Faer`] routes the same contract through the `faer` crate,
//! which is faster for dimensions in the thousands.

mod faer_backend;
mod hessenberg;
mod qr;
mod svd;

pub use hessenberg::{hessenberg_reduce, Hessenberg};
pub use qr::{qr_eigenvalues, residual_probe, EigResult, DEFAULT_DEFLATION_TOL};
pub use svd::{bidiagonalize, singular_min, singular_values};

use num_complex::Complex64;

use crate::matrix::CMatrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EigError {
    #[error("eigensolver requires a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("eigensolver requires a non-empty matrix")]
    Empty,
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("QR iteration did not converge after {sweeps} sweeps ({converged} of {dimension} eigenvalues found)")]
    ConvergenceFailure {
        sweeps: usize,
        converged: usize,
        dimension: usize,
    },
}

/// Kernel used by [`eigenvalues`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigBackend {
    /// Householder–Hessenberg reduction and single-shift QR from this crate.
    #[default]
    Native,
    /// Dense eigendecomposition from `faer`.
    Faer,
}

/// Options for [`eigenvalues`].
#[derive(Debug, Clone, Copy)]
pub struct EigOptions {
    /// Relative deflation threshold on subdiagonal entries.
    pub tol: f64,
    /// Cap on QR sweeps; `None` means `100 * n`.
    pub max_sweeps: Option<usize>,
    /// Number of eigenvalues checked with an inverse-iteration residual probe.
    pub residual_probes: usize,
    pub backend: EigBackend,
}

impl Default for EigOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_DEFLATION_TOL,
            max_sweeps: None,
            residual_probes: 32,
            backend: EigBackend::Native,
        }
    }
}

/// All eigenvalues of a general square complex matrix.
///
/// `max_residual` of the result is the largest relative residual
/// `‖Av − λv‖ / ‖A‖_F` over the probed eigenpairs.
pub fn eigenvalues(a: &CMatrix, opts: &EigOptions) -> Result<EigResult, EigError> {
    if !a.is_square() {
        return Err(EigError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let n = a.nrows();
    if n == 0 {
        return Err(EigError::Empty);
    }
    if a.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(EigError::NonFinite);
    }
    let scale = a.max_abs();
    if scale == 0.0 {
        return Ok(EigResult {
            eigenvalues: vec![Complex64::new(0.0, 0.0); n],
            max_residual: 0.0,
            iterations: 0,
        });
    }
    let scaled = a.scaled(Complex64::new(1.0 / scale, 0.0));
    if opts.backend == EigBackend::Faer {
        let mut result = faer_backend::eigenvalues(&scaled, opts.residual_probes)?;
        for z in &mut result.eigenvalues {
            *z *= scale;
        }
        return Ok(result);
    }
    let hess = hessenberg_reduce(&scaled, false);
    let max_sweeps = opts.max_sweeps.unwrap_or(100 * n);
    let mut result = qr_eigenvalues(&hess.h, opts.tol, max_sweeps)?;

    let norm = hess.h.frobenius_norm().max(f64::MIN_POSITIVE);
    let probes = opts.residual_probes.min(n);
    let mut max_residual: f64 = 0.0;
    for p in 0..probes {
        // evenly spread over the returned list
        let idx = if probes == 1 { 0 } else { p * (n - 1) / (probes - 1) };
        let r = residual_probe(&hess.h, result.eigenvalues[idx]);
        max_residual = max_residual.max(r / norm);
    }
    for z in &mut result.eigenvalues {
        *z *= scale;
    }
    result.max_residual = max_residual;
    Ok(result)
}
