//! Fourier-mode energy shells and the shell matrix of `−h²Δ + iεq`.
//!
//! On `L²(𝕋²)` the operator acts on `e^{i(jx+ky)}` through
//! `h²(j²+k²)` on the diagonal and convolution with the symbol
//! coefficients, where the `ξ, η` factors of `q₁, q₂` act on the column
//! frequency `(hj̃, hk̃)`. Truncating to the modes with
//! `h²(j²+k²) ∈ [E₁, E₂]` gives a dense `#𝓔 × #𝓔` matrix.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::classical::BandBounds;
use crate::eig::{eigenvalues, EigError, EigOptions};
use crate::matrix::{CMatrix, ZERO};
use crate::symbol::SymbolCoefficients;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("invalid shell parameters h = {h}, [E1, E2] = [{e1}, {e2}]")]
    BadShell { h: f64, e1: f64, e2: f64 },
    #[error("no lattice mode satisfies {e1} <= h^2 (j^2 + k^2) <= {e2} for h = {h}")]
    EmptyShell { h: f64, e1: f64, e2: f64 },
    #[error("epsilon must be nonnegative and finite, got {0}")]
    BadEpsilon(f64),
    #[error(transparent)]
    Eig(#[from] EigError),
}

/// Lattice modes `(j, k)` with `h²(j² + k²) ∈ [E₁, E₂]`, in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeShell {
    h: f64,
    e1: f64,
    e2: f64,
    modes: Vec<(i64, i64)>,
}

/// `h²(j² + k²)`.
pub fn mode_energy(h: f64, j: i64, k: i64) -> f64 {
    h * h * (j * j + k * k) as f64
}

impl ModeShell {
    pub fn new(h: f64, e1: f64, e2: f64) -> Result<Self, SpectralError> {
        if !(h > 0.0 && h.is_finite() && e1 > 0.0 && e1 < e2 && e2.is_finite()) {
            return Err(SpectralError::BadShell { h, e1, e2 });
        }
        let r = (e2.sqrt() / h).floor() as i64 + 1;
        // lattice points on the bounding circles count as members
        let lo = e1 / (h * h) * (1.0 - 1e-12);
        let hi = e2 / (h * h) * (1.0 + 1e-12);
        let mut modes = Vec::new();
        for j in -r..=r {
            for k in -r..=r {
                let s = (j * j + k * k) as f64;
                if lo <= s && s <= hi {
                    modes.push((j, k));
                }
            }
        }
        if modes.is_empty() {
            return Err(SpectralError::EmptyShell { h, e1, e2 });
        }
        Ok(Self { h, e1, e2, modes })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn e1(&self) -> f64 {
        self.e1
    }

    pub fn e2(&self) -> f64 {
        self.e2
    }

    pub fn modes(&self) -> &[(i64, i64)] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Annulus area `π(E₂ − E₁)/h²`.
    pub fn area_estimate(&self) -> f64 {
        PI * (self.e2 - self.e1) / (self.h * self.h)
    }

    /// Boundary term `2π(√E₁ + √E₂)/h` bounding `|#𝓔 − area|` up to a constant.
    pub fn boundary_estimate(&self) -> f64 {
        2.0 * PI * (self.e1.sqrt() + self.e2.sqrt()) / self.h
    }
}

/// `buildModeShell`.
pub fn build_mode_shell(h: f64, e1: f64, e2: f64) -> Result<ModeShell, SpectralError> {
    ModeShell::new(h, e1, e2)
}

/// The matrix `𝓐_ε` over a mode shell.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellMatrix {
    shell: ModeShell,
    epsilon: f64,
    entries: CMatrix,
}

impl ShellMatrix {
    pub fn shell(&self) -> &ModeShell {
        &self.shell
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn dimension(&self) -> usize {
        self.entries.nrows()
    }

    /// Spectrum of the matrix.
    pub fn spectrum(&self, opts: &EigOptions) -> Result<SpectrumRecord, SpectralError> {
        compute_spectrum(self.shell.h, self.epsilon, &self.entries, opts)
    }
}

/// `assembleMatrix`: entry `((j,k),(j̃,k̃))` is
/// `h²(j²+k²)δ + iε(q̂₀ + q̂₁·hj̃ + q̂₂·hk̃)(j−j̃, k−k̃)`.
pub fn assemble_matrix(q: &SymbolCoefficients, shell: &ModeShell, epsilon: f64) -> Result<ShellMatrix, SpectralError> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(SpectralError::BadEpsilon(epsilon));
    }
    let h = shell.h;
    let n = shell.len();
    let index: HashMap<(i64, i64), usize> = shell.modes.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let f = q.degree() as i64;
    let ie = Complex64::new(0.0, epsilon);
    let mut a = CMatrix::zeros(n, n);
    for (r, &(j, k)) in shell.modes.iter().enumerate() {
        let row = a.row_mut(r);
        row[r] = Complex64::new(mode_energy(h, j, k), 0.0);
        if epsilon == 0.0 {
            continue;
        }
        for dj in -f..=f {
            for dk in -f..=f {
                let Some(&c) = index.get(&(j - dj, k - dk)) else {
                    continue;
                };
                let (jt, kt) = (h * (j - dj) as f64, h * (k - dk) as f64);
                let v = q.coeff_at(dj, dk, jt, kt);
                if v != ZERO {
                    row[c] += ie * v;
                }
            }
        }
    }
    Ok(ShellMatrix { shell: shell.clone(), epsilon, entries: a })
}

/// Computed spectrum with its rescaled representation.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRecord {
    pub h: f64,
    pub epsilon: f64,
    pub eigenvalues: Vec<Complex64>,
    /// Largest probed `‖Av − λv‖ / ‖A‖`.
    pub residual_bound: f64,
    /// `(Re z, Im z/ε)`; empty when `ε = 0`.
    pub rescaled: Vec<(f64, f64)>,
    /// `|Σλ − tr A|`.
    pub trace_error: f64,
    /// `10⁻⁸ · n · max|entry|`.
    pub trace_tolerance: f64,
    pub iterations: usize,
}

impl SpectrumRecord {
    pub fn trace_identity_holds(&self) -> bool {
        self.trace_error <= self.trace_tolerance
    }

    /// `(Re z, Im z/ε)` for every eigenvalue, sorted by `Im z/ε`.
    pub fn sorted_rescaled(&self) -> Vec<(f64, f64)> {
        let mut r = self.rescaled.clone();
        r.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
        r
    }
}

/// Eigenvalues of `a` with the trace check and rescaled coordinates.
pub fn compute_spectrum(h: f64, epsilon: f64, a: &CMatrix, opts: &EigOptions) -> Result<SpectrumRecord, SpectralError> {
    let res = eigenvalues(a, opts)?;
    let n = a.nrows();
    let sum: Complex64 = res.eigenvalues.iter().sum();
    let rescaled = if epsilon > 0.0 {
        res.eigenvalues.iter().map(|z| (z.re, z.im / epsilon)).collect()
    } else {
        Vec::new()
    };
    Ok(SpectrumRecord {
        h,
        epsilon,
        trace_error: (sum - a.trace()).norm(),
        trace_tolerance: 1e-8 * n as f64 * a.max_abs(),
        eigenvalues: res.eigenvalues,
        residual_bound: res.max_residual,
        rescaled,
        iterations: res.iterations,
    })
}

/// Default distance `3·max(h, ε)` of the interior window from each shell end.
pub fn interior_margin(h: f64, epsilon: f64) -> f64 {
    3.0 * h.max(epsilon)
}

/// Fitted slack of the band containment `Im z/ε ∈ [inf − δ, sup + δ]`
/// over the eigenvalues with `Re z ∈ [E₁ + margin, E₂ − margin]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandContainment {
    pub interior_count: usize,
    pub min_scaled_im: f64,
    pub max_scaled_im: f64,
    pub inf_band: f64,
    pub sup_band: f64,
    pub delta: f64,
}

impl BandContainment {
    /// `δ / (sup_band − inf_band)`, or `δ` itself for a degenerate band.
    pub fn relative_delta(&self) -> f64 {
        let w = self.sup_band - self.inf_band;
        if w > 0.0 {
            self.delta / w
        } else {
            self.delta
        }
    }
}

pub fn band_containment(record: &SpectrumRecord, shell: &ModeShell, band: &BandBounds, margin: f64) -> BandContainment {
    let (lo, hi) = (shell.e1 + margin, shell.e2 - margin);
    let mut out = BandContainment {
        interior_count: 0,
        min_scaled_im: f64::INFINITY,
        max_scaled_im: f64::NEG_INFINITY,
        inf_band: band.inf_band,
        sup_band: band.sup_band,
        delta: 0.0,
    };
    for &(re, s) in &record.rescaled {
        if lo <= re && re <= hi {
            out.interior_count += 1;
            out.min_scaled_im = out.min_scaled_im.min(s);
            out.max_scaled_im = out.max_scaled_im.max(s);
        }
    }
    if out.interior_count > 0 {
        out.delta = (band.inf_band - out.min_scaled_im).max(out.max_scaled_im - band.sup_band).max(0.0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::generate_random_symbol;
    use crate::testutil::assert_multiset_close;

    #[test]
    fn unit_shell_has_four_modes() {
        let s = build_mode_shell(1.0, 0.5, 1.5).unwrap();
        assert_eq!(s.modes(), &[(-1, 0), (0, -1), (0, 1), (1, 0)]);
    }

    #[test]
    fn shell_matches_exhaustive_scan() {
        let h = 1.0 / 20.0;
        let s = build_mode_shell(h, 0.85, 1.0).unwrap();
        let mut brute = Vec::new();
        for j in -30i64..=30 {
            for k in -30i64..=30 {
                let s2 = j * j + k * k;
                if (340..=400).contains(&s2) {
                    brute.push((j, k));
                }
            }
        }
        assert_eq!(s.modes(), brute.as_slice());
        assert!((s.len() as f64 - s.area_estimate()).abs() <= s.boundary_estimate());
    }

    #[test]
    fn shell_errors() {
        assert!(matches!(build_mode_shell(1.0, 0.1, 0.5), Err(SpectralError::EmptyShell { .. })));
        assert!(matches!(build_mode_shell(0.1, 1.0, 0.5), Err(SpectralError::BadShell { .. })));
        assert!(matches!(build_mode_shell(-0.1, 0.5, 1.0), Err(SpectralError::BadShell { .. })));
    }

    #[test]
    fn zero_epsilon_gives_diagonal() {
        let q = generate_random_symbol(2, 2.0, 1).unwrap();
        let s = build_mode_shell(0.1, 0.5, 1.0).unwrap();
        let a = assemble_matrix(&q, &s, 0.0).unwrap();
        for (r, &(j, k)) in s.modes().iter().enumerate() {
            for c in 0..s.len() {
                let want = if r == c { Complex64::new(0.1 * 0.1 * (j * j + k * k) as f64, 0.0) } else { ZERO };
                assert_eq!(a.entries()[(r, c)], want);
            }
        }
    }

    #[test]
    fn single_mode_symbol_couples_neighbours() {
        let mut q = SymbolCoefficients::zeros(1, 1.0).unwrap();
        q.set_real_mode(0, 1, 0, Complex64::new(0.5, 0.0)).unwrap();
        let s = build_mode_shell(0.1, 0.5, 1.0).unwrap();
        let eps = 0.3;
        let a = assemble_matrix(&q, &s, eps).unwrap();
        for (r, &(j, k)) in s.modes().iter().enumerate() {
            for (c, &(jt, kt)) in s.modes().iter().enumerate() {
                if r == c {
                    continue;
                }
                let want = if k == kt && (j - jt).abs() == 1 { Complex64::new(0.0, eps / 2.0) } else { ZERO };
                assert_eq!(a.entries()[(r, c)], want);
            }
        }
    }

    #[test]
    fn trace_matches_independent_sum() {
        let q = generate_random_symbol(2, 2.0, 9).unwrap();
        let h = 0.1;
        let eps = 0.2;
        let s = build_mode_shell(h, 0.6, 1.0).unwrap();
        let a = assemble_matrix(&q, &s, eps).unwrap();
        let (c0, c1, c2) = (q.coeff(0, 0, 0), q.coeff(1, 0, 0), q.coeff(2, 0, 0));
        let mut want = ZERO;
        for &(j, k) in s.modes() {
            let (hj, hk) = (h * j as f64, h * k as f64);
            want += Complex64::new(hj * hj + hk * hk, 0.0) + Complex64::new(0.0, eps) * (c0 + c1 * hj + c2 * hk);
        }
        assert!((a.entries().trace() - want).norm() < 1e-12 * s.len() as f64);
    }

    #[test]
    fn bandwidth_in_difference_index_is_at_most_degree() {
        let q = generate_random_symbol(2, 2.0, 4).unwrap();
        let s = build_mode_shell(0.1, 0.5, 1.0).unwrap();
        let a = assemble_matrix(&q, &s, 0.2).unwrap();
        for (r, &(j, k)) in s.modes().iter().enumerate() {
            for (c, &(jt, kt)) in s.modes().iter().enumerate() {
                if (j - jt).abs() > 2 || (k - kt).abs() > 2 {
                    assert_eq!(a.entries()[(r, c)], ZERO);
                }
            }
        }
    }

    #[test]
    fn diagonal_and_two_by_two_spectra() {
        let d: Vec<Complex64> = (0..6).map(|i| Complex64::new(i as f64 * 0.3 - 1.0, 0.1 * i as f64)).collect();
        let r = compute_spectrum(0.1, 0.1, &CMatrix::from_diagonal(&d), &EigOptions::default()).unwrap();
        assert_multiset_close(&r.eigenvalues, &d, 1e-14);
        let eps = 0.01;
        let a = CMatrix::from_row_major(2, 2, vec![ZERO, Complex64::new(1.0, 0.0), Complex64::new(0.0, eps), ZERO]);
        let r = compute_spectrum(0.1, eps, &a, &EigOptions::default()).unwrap();
        let root = Complex64::new(0.0, eps).sqrt();
        assert_multiset_close(&r.eigenvalues, &[root, -root], 1e-14);
        assert!(r.trace_identity_holds());
    }

    #[test]
    fn spectrum_is_invariant_under_permutation() {
        let q = generate_random_symbol(2, 2.0, 12).unwrap();
        let s = build_mode_shell(0.2, 0.4, 1.0).unwrap();
        let a = assemble_matrix(&q, &s, 0.4).unwrap();
        let n = a.dimension();
        assert!(n >= 40);
        let perm: Vec<usize> = (0..n).map(|i| (i * 7 + 3) % n).collect();
        let perm = if n.is_multiple_of(7) { (0..n).rev().collect() } else { perm };
        let opts = EigOptions::default();
        let r1 = a.spectrum(&opts).unwrap();
        let r2 = compute_spectrum(0.2, 0.4, &a.entries().permuted(&perm), &opts).unwrap();
        assert_multiset_close(&r1.eigenvalues, &r2.eigenvalues, 1e-8);
        assert_eq!(r1.rescaled.len(), n);
    }

    #[test]
    fn zero_epsilon_spectrum_is_the_diagonal() {
        let q = generate_random_symbol(2, 2.0, 2).unwrap();
        let s = build_mode_shell(0.1, 0.5, 1.0).unwrap();
        let a = assemble_matrix(&q, &s, 0.0).unwrap();
        let r = a.spectrum(&EigOptions::default()).unwrap();
        assert!(r.rescaled.is_empty());
        assert_multiset_close(&r.eigenvalues, &a.entries().diagonal(), 1e-10 * a.entries().max_abs());
    }
}
