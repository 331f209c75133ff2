//! Band-limited real symbols `q(x,y;ξ,η) = q₀(x,y) + q₁(x,y)ξ + q₂(x,y)η`.
//!
//! Each `q_ℓ` is a trigonometric polynomial with coefficients on the square
//! `[-F, F]²` of the Fourier lattice. Reality of `q_ℓ` is the Hermitian
//! symmetry `q̂_ℓ(−j,−k) = conj q̂_ℓ(j,k)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::matrix::ZERO;

/// Largest supported band limit.
pub const MAX_DEGREE: usize = 8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SymbolError {
    #[error("band limit {0} exceeds the supported maximum {MAX_DEGREE}")]
    DegreeTooLarge(usize),
    #[error("decay rate must be positive and finite, got {0}")]
    BadDecay(f64),
    #[error("coefficient index ({j}, {k}) lies outside [-{degree}, {degree}]²")]
    OutOfBand { j: i64, k: i64, degree: usize },
    #[error("coefficients violate Hermitian symmetry at ({j}, {k}) for q{ell}")]
    NotHermitian { ell: usize, j: i64, k: i64 },
}

/// A point `(x, y; ξ, η)` of `T*𝕋²` with angles reduced to `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub x: f64,
    pub y: f64,
    pub xi: f64,
    pub eta: f64,
}

impl PhasePoint {
    pub fn new(x: f64, y: f64, xi: f64, eta: f64) -> Self {
        Self {
            x: reduce_angle(x),
            y: reduce_angle(y),
            xi,
            eta,
        }
    }
}

pub fn reduce_angle(t: f64) -> f64 {
    let r = t.rem_euclid(2.0 * PI);
    if r >= 2.0 * PI {
        0.0
    } else {
        r
    }
}

/// Fourier coefficient tables of `q₀, q₁, q₂`, stored densely over `[-F, F]²`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolCoefficients {
    degree: usize,
    decay_kappa: f64,
    seed: Option<u64>,
    coeffs: [Vec<Complex64>; 3],
}

impl SymbolCoefficients {
    /// All-zero symbol of band limit `degree`.
    pub fn zeros(degree: usize, decay_kappa: f64) -> Result<Self, SymbolError> {
        if degree > MAX_DEGREE {
            return Err(SymbolError::DegreeTooLarge(degree));
        }
        if !(decay_kappa > 0.0 && decay_kappa.is_finite()) {
            return Err(SymbolError::BadDecay(decay_kappa));
        }
        let side = 2 * degree + 1;
        let table = vec![ZERO; side * side];
        Ok(Self {
            degree,
            decay_kappa,
            seed: None,
            coeffs: [table.clone(), table.clone(), table],
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn decay_kappa(&self) -> f64 {
        self.decay_kappa
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn set_seed(&mut self, seed: Option<u64>) {
        self.seed = seed;
    }

    fn slot(&self, j: i64, k: i64) -> Option<usize> {
        let f = self.degree as i64;
        if j.abs() > f || k.abs() > f {
            return None;
        }
        let side = 2 * f + 1;
        Some(((j + f) * side + (k + f)) as usize)
    }

    /// `q̂_ℓ(j,k)`, zero outside the band.
    pub fn coeff(&self, ell: usize, j: i64, k: i64) -> Complex64 {
        self.slot(j, k).map_or(ZERO, |s| self.coeffs[ell][s])
    }

    /// Sets `q̂_ℓ(j,k)` and its mirror `q̂_ℓ(−j,−k) = conj`, keeping the
    /// symbol real. At `(0,0)` only the real part is kept.
    pub fn set_real_mode(&mut self, ell: usize, j: i64, k: i64, value: Complex64) -> Result<(), SymbolError> {
        let s = self.slot(j, k).ok_or(SymbolError::OutOfBand {
            j,
            k,
            degree: self.degree,
        })?;
        let m = self.slot(-j, -k).expect("band is symmetric");
        if s == m {
            self.coeffs[ell][s] = Complex64::new(value.re, 0.0);
        } else {
            self.coeffs[ell][s] = value;
            self.coeffs[ell][m] = value.conj();
        }
        Ok(())
    }

    /// Sets a single coefficient without enforcing symmetry; call
    /// [`Self::check_hermitian`] afterwards.
    pub fn set_raw(&mut self, ell: usize, j: i64, k: i64, value: Complex64) -> Result<(), SymbolError> {
        let s = self.slot(j, k).ok_or(SymbolError::OutOfBand {
            j,
            k,
            degree: self.degree,
        })?;
        self.coeffs[ell][s] = value;
        Ok(())
    }

    pub fn check_hermitian(&self) -> Result<(), SymbolError> {
        for (ell, j, k) in self.indices() {
            if self.coeff(ell, -j, -k) != self.coeff(ell, j, k).conj() {
                return Err(SymbolError::NotHermitian { ell, j, k });
            }
        }
        Ok(())
    }

    /// All `(ℓ, j, k)` in storage order: `ℓ` outermost, then `j`, then `k`.
    pub fn indices(&self) -> impl Iterator<Item = (usize, i64, i64)> {
        let f = self.degree as i64;
        (0..3).flat_map(move |ell| (-f..=f).flat_map(move |j| (-f..=f).map(move |k| (ell, j, k))))
    }

    /// `q̂(j,k;ξ,η) = q̂₀ + q̂₁ξ + q̂₂η`.
    pub fn coeff_at(&self, j: i64, k: i64, xi: f64, eta: f64) -> Complex64 {
        match self.slot(j, k) {
            None => ZERO,
            Some(s) => self.coeffs[0][s] + self.coeffs[1][s] * xi + self.coeffs[2][s] * eta,
        }
    }

    /// `Σ_{ℓ,(j,k)} |q̂_ℓ(j,k)|`.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().flatten().map(|z| z.norm()).sum()
    }

    /// Raw complex value of the Fourier sum; the imaginary part is roundoff.
    pub fn evaluate_complex(&self, p: &PhasePoint) -> Complex64 {
        let f = self.degree as i64;
        // e^{ijx} and e^{iky} tables
        let ex: Vec<Complex64> = (-f..=f).map(|j| Complex64::from_polar(1.0, j as f64 * p.x)).collect();
        let ey: Vec<Complex64> = (-f..=f).map(|k| Complex64::from_polar(1.0, k as f64 * p.y)).collect();
        let mut acc = ZERO;
        for (a, j) in (-f..=f).enumerate() {
            let mut row = ZERO;
            for (b, k) in (-f..=f).enumerate() {
                row += self.coeff_at(j, k, p.xi, p.eta) * ey[b];
            }
            acc += row * ex[a];
        }
        acc
    }

    /// `q(x,y;ξ,η)`.
    pub fn evaluate(&self, p: &PhasePoint) -> f64 {
        self.evaluate_complex(p).re
    }

    /// `q₀ + q₁ξ + q₂η` restricted to the torus at `(ξ, η)`, as a table over
    /// `[-F, F]²` indexed by `(j + F, k + F)`.
    pub fn torus_slice(&self, xi: f64, eta: f64) -> Vec<Vec<Complex64>> {
        let f = self.degree as i64;
        (-f..=f)
            .map(|j| (-f..=f).map(|k| self.coeff_at(j, k, xi, eta)).collect())
            .collect()
    }
}

/// Standard normal draws by the Box–Muller transform on top of a seeded
/// ChaCha20 stream of uniform 64-bit words.
#[derive(Debug, Clone)]
pub struct GaussianStream {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform in `(0, 1]`, built from the top 53 bits of a 64-bit word.
    fn uniform_open(&mut self) -> f64 {
        let bits = self.rng.gen::<u64>() >> 11;
        (bits as f64 + 1.0) / (1u64 << 53) as f64
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform_open();
        let u2 = self.uniform_open();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

/// Random real symbol with `A_ℓ(j,k) = e^{−κ|j−k|} α^ℓ_{j,k}`, α standard
/// normal, and `q̂_ℓ(j,k) = (A_ℓ(j,k) + conj A_ℓ(−j,−k)) / 2`.
///
/// The draws are real; they are taken in storage order (`ℓ`, then `j`, then
/// `k`, each ascending).
pub fn generate_random_symbol(degree: usize, kappa: f64, seed: u64) -> Result<SymbolCoefficients, SymbolError> {
    let mut sym = SymbolCoefficients::zeros(degree, kappa)?;
    let mut gauss = GaussianStream::new(seed);
    let f = degree as i64;
    let side = 2 * degree + 1;
    for ell in 0..3 {
        let mut a = vec![ZERO; side * side];
        for j in -f..=f {
            for k in -f..=f {
                let alpha = gauss.next_normal();
                let damp = (-kappa * (j - k).abs() as f64).exp();
                a[((j + f) as usize) * side + (k + f) as usize] = Complex64::new(damp * alpha, 0.0);
            }
        }
        for j in -f..=f {
            for k in -f..=f {
                let here = a[((j + f) as usize) * side + (k + f) as usize];
                let mirror = a[((-j + f) as usize) * side + (-k + f) as usize];
                sym.set_raw(ell, j, k, (here + mirror.conj()) * 0.5)?;
            }
        }
    }
    sym.set_seed(Some(seed));
    Ok(sym)
}
