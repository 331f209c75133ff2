//! Eigenvalues through the `faer` dense eigendecomposition, with residual
//! probes taken from its eigenvectors.

use faer::Mat;
use num_complex::Complex64;

use super::{EigError, EigResult};
use crate::matrix::CMatrix;

/// Eigenvalues of `a` and the largest relative residual over `probes`
/// evenly spread eigenpairs.
pub(super) fn eigenvalues(a: &CMatrix, probes: usize) -> Result<EigResult, EigError> {
    let n = a.nrows();
    let m = Mat::<Complex64>::from_fn(n, n, |i, j| a[(i, j)]);
    let evd = m.eigen().map_err(|_| EigError::ConvergenceFailure {
        sweeps: 0,
        converged: 0,
        dimension: n,
    })?;
    let s = evd.S();
    let u = evd.U();
    let eigenvalues: Vec<Complex64> = (0..n).map(|i| s[i]).collect();
    let norm = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let probes = probes.min(n);
    let mut max_residual: f64 = 0.0;
    for p in 0..probes {
        let idx = if probes == 1 { 0 } else { p * (n - 1) / (probes - 1) };
        let v: Vec<Complex64> = (0..n).map(|i| u[(i, idx)]).collect();
        let vn = crate::matrix::vec_norm(&v);
        if vn == 0.0 {
            continue;
        }
        let av = a.matvec(&v);
        let r: Vec<Complex64> = av.iter().zip(&v).map(|(x, y)| x - eigenvalues[idx] * y).collect();
        max_residual = max_residual.max(crate::matrix::vec_norm(&r) / (vn * norm));
    }
    Ok(EigResult {
        eigenvalues,
        max_residual,
        iterations: 0,
    })
}
