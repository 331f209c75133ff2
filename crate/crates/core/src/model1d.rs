//! One-dimensional model operators `g(hD)(hD)² + iεṼ(x, hD)` on the circle.
//!
//! The Floquet condition shifts the Fourier lattice to `j + θ`; the operator
//! is truncated to `|j| ≤ J_max`. Potentials act by convolution of Fourier
//! coefficients, and the mixed term `k(x, ξ)φ(ξ/ε^δ)` is quantized with its
//! `ξ`-dependence evaluated at the column frequency.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::eig::{eigenvalues, singular_min, EigError, EigOptions};
use crate::matrix::{CMatrix, ZERO};

/// Safety factor in the tail-ellipticity rule.
pub const TAIL_SAFETY: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Model1dError {
    #[error("invalid model parameter: {0}")]
    BadParameter(String),
    #[error("potential is not real: V({nu}) and V({neg}) are not conjugate", neg = -nu)]
    NotHermitian { nu: i64 },
    #[error("multiplier g violates g >= 1 or |xi g'(xi)| <= 0.1 at xi = {xi}")]
    BadMultiplier { xi: f64 },
    #[error("truncation J_max = {j_max} is too small: h^2 (J_max + theta)^2 = {tail} < {required}")]
    TruncationTooSmall { j_max: usize, tail: f64, required: f64 },
    #[error("potential minimum is not unique: values {first} and {second} at x = {x_first} and {x_second}")]
    MinimumNotUnique { first: f64, second: f64, x_first: f64, x_second: f64 },
    #[error("degenerate potential minimum: V''({x}) = {second_derivative:e}")]
    DegenerateMinimum { x: f64, second_derivative: f64 },
    #[error("scan region violates the hypotheses: {0}")]
    RegionViolatesHypotheses(String),
    #[error(transparent)]
    Eig(#[from] EigError),
}

/// Real potential `V(x) = Σ_ν V̂(ν)e^{iνx}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Potential {
    coeffs: BTreeMap<i64, Complex64>,
}

impl Potential {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `V = 1 − cos x`.
    pub fn one_minus_cos() -> Self {
        let mut v = Self::zero();
        v.set(0, Complex64::new(1.0, 0.0));
        v.set(1, Complex64::new(-0.5, 0.0));
        v.set(-1, Complex64::new(-0.5, 0.0));
        v
    }

    pub fn set(&mut self, nu: i64, value: Complex64) {
        if value == ZERO {
            self.coeffs.remove(&nu);
        } else {
            self.coeffs.insert(nu, value);
        }
    }

    pub fn coeff(&self, nu: i64) -> Complex64 {
        self.coeffs.get(&nu).copied().unwrap_or(ZERO)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(&nu, &c)| (nu, c))
    }

    /// Largest `|ν|` with a nonzero coefficient.
    pub fn band(&self) -> i64 {
        self.coeffs.keys().map(|nu| nu.abs()).max().unwrap_or(0)
    }

    pub fn check_hermitian(&self) -> Result<(), Model1dError> {
        for (nu, c) in self.iter() {
            if (c - self.coeff(-nu).conj()).norm() > 1e-14 * c.norm().max(1.0) {
                return Err(Model1dError::NotHermitian { nu });
            }
        }
        Ok(())
    }

    /// `dᵈV/dxᵈ` at `x`.
    pub fn derivative(&self, x: f64, order: u32) -> f64 {
        self.iter()
            .map(|(nu, c)| (c * Complex64::new(0.0, nu as f64).powu(order) * Complex64::from_polar(1.0, nu as f64 * x)).re)
            .sum()
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    /// Maximum of `V` on a uniform grid of 4096 points.
    pub fn sampled_max(&self) -> f64 {
        (0..4096).map(|i| self.value(2.0 * PI * i as f64 / 4096.0)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// The global minimum of `V`, which must be unique and nondegenerate.
    pub fn nondegenerate_minimum(&self) -> Result<PotentialMinimum, Model1dError> {
        let n = 4096;
        let dx = 2.0 * PI / n as f64;
        let vals: Vec<f64> = (0..n).map(|i| self.value(i as f64 * dx)).collect();
        let mut locals: Vec<(f64, f64)> = (0..n)
            .filter(|&i| vals[i] <= vals[(i + n - 1) % n] && vals[i] <= vals[(i + 1) % n])
            .map(|i| {
                let x = self.newton_critical(i as f64 * dx);
                (x, self.value(x))
            })
            .collect();
        locals.sort_by(|a, b| a.1.total_cmp(&b.1));
        let Some(&(x, v)) = locals.first() else {
            // constant potential
            return Err(Model1dError::DegenerateMinimum { x: 0.0, second_derivative: 0.0 });
        };
        let scale = self.iter().map(|(_, c)| c.norm()).sum::<f64>().max(1.0);
        if let Some(&(x2, v2)) = locals
            .iter()
            .skip(1)
            .find(|p| circle_distance(p.0, x) > 1e-6)
        {
            if v2 - v <= 1e-9 * scale {
                return Err(Model1dError::MinimumNotUnique { first: v, second: v2, x_first: x, x_second: x2 });
            }
        }
        let b = self.derivative(x, 2);
        if b < 1e-9 {
            return Err(Model1dError::DegenerateMinimum { x, second_derivative: b });
        }
        Ok(PotentialMinimum { x: x.rem_euclid(2.0 * PI), value: v, second_derivative: b })
    }

    fn newton_critical(&self, x0: f64) -> f64 {
        let mut x = x0;
        for _ in 0..50 {
            let (d1, d2) = (self.derivative(x, 1), self.derivative(x, 2));
            if d2 <= 0.0 {
                return x0;
            }
            let step = d1 / d2;
            if step.abs() > 0.01 {
                return x0;
            }
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        x
    }
}

fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Location, value and curvature of the minimum of a potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialMinimum {
    pub x: f64,
    pub value: f64,
    pub second_derivative: f64,
}

/// Real multiplier `g(ξ)` with `g ≥ 1` and `g − 1` compactly supported.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Multiplier {
    #[default]
    One,
    /// `1 + a·ψ(ξ/r)` with the bump `ψ(s) = e·exp(−1/(1 − s²))` on `|s| < 1`.
    Bump { amplitude: f64, radius: f64 },
}

impl Multiplier {
    pub fn value(&self, xi: f64) -> f64 {
        match *self {
            Multiplier::One => 1.0,
            Multiplier::Bump { amplitude, radius } => {
                let s = xi / radius;
                if s.abs() >= 1.0 {
                    1.0
                } else {
                    1.0 + amplitude * (1.0 - 1.0 / (1.0 - s * s)).exp()
                }
            }
        }
    }

    /// `g′(ξ)`.
    pub fn derivative(&self, xi: f64) -> f64 {
        match *self {
            Multiplier::One => 0.0,
            Multiplier::Bump { amplitude, radius } => {
                let s = xi / radius;
                if s.abs() >= 1.0 {
                    0.0
                } else {
                    let w = 1.0 - s * s;
                    let psi = (1.0 - 1.0 / w).exp();
                    amplitude * psi * (-2.0 * s / (w * w)) / radius
                }
            }
        }
    }
}

/// Smooth cutoff `φ(s)`: 1 on `|s| ≤ 1/2`, 0 on `|s| ≥ 1`.
pub fn cutoff(s: f64) -> f64 {
    let a = s.abs();
    if a <= 0.5 {
        return 1.0;
    }
    if a >= 1.0 {
        return 0.0;
    }
    let t = 2.0 * (a - 0.5);
    let f = |u: f64| if u > 0.0 { (-1.0 / u).exp() } else { 0.0 };
    f(1.0 - t) / (f(1.0 - t) + f(t))
}

/// `k(x, ξ)φ(ξ/ε^δ)` with `k = Σ c_{ν,d} e^{iνx} ξᵈ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedTerm {
    /// `(ν, d, c_{ν,d})`.
    pub terms: Vec<(i64, u32, Complex64)>,
    pub delta: f64,
}

impl MixedTerm {
    /// Symbol value of the `ξ`-part of the `(ν, ·)` terms at frequency `ξ`.
    fn column_factor(&self, nu: i64, xi: f64, epsilon: f64) -> Complex64 {
        let phi = cutoff(xi / epsilon.powf(self.delta));
        if phi == 0.0 {
            return ZERO;
        }
        let s: Complex64 = self
            .terms
            .iter()
            .filter(|t| t.0 == nu)
            .map(|&(_, d, c)| c * xi.powi(d as i32))
            .sum();
        s * phi
    }
}

/// Truncated Fourier realization of `g(hD)(hD)² + iε(V + kφ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Model1D {
    pub h: f64,
    pub epsilon: f64,
    /// Floquet shift in `[0, 1)`.
    pub theta: f64,
    pub potential: Potential,
    pub g: Multiplier,
    pub mixed: Option<MixedTerm>,
    pub j_max: usize,
}

impl Model1D {
    /// Model with `g ≡ 1`, no mixed term and `J_max` from
    /// [`Model1D::required_j_max`] for spectral parameters up to `target_abs_z`.
    pub fn new(h: f64, epsilon: f64, theta: f64, potential: Potential, target_abs_z: f64) -> Result<Self, Model1dError> {
        let mut m = Self { h, epsilon, theta, potential, g: Multiplier::One, mixed: None, j_max: 0 };
        m.validate_parameters()?;
        m.j_max = m.required_j_max(target_abs_z);
        Ok(m)
    }

    fn validate_parameters(&self) -> Result<(), Model1dError> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Model1dError::BadParameter(format!("h = {}", self.h)));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Model1dError::BadParameter(format!("epsilon = {}", self.epsilon)));
        }
        if !(0.0..1.0).contains(&self.theta) {
            return Err(Model1dError::BadParameter(format!("theta = {}", self.theta)));
        }
        self.potential.check_hermitian()
    }

    /// `10·(|z| + ε·max V)`, the tail level the truncation must reach.
    pub fn tail_requirement(&self, target_abs_z: f64) -> f64 {
        TAIL_SAFETY * (target_abs_z + self.epsilon * self.potential.sampled_max().max(0.0))
    }

    /// Smallest `J` with `h²(J + θ)² ≥ 10·(|z| + ε·max V)`.
    pub fn required_j_max(&self, target_abs_z: f64) -> usize {
        let need = self.tail_requirement(target_abs_z);
        let j = (need.sqrt() / self.h - self.theta).ceil().max(1.0) as usize;
        j.max(self.potential.band() as usize)
    }

    pub fn dimension(&self) -> usize {
        2 * self.j_max + 1
    }

    /// Frequencies `h(j + θ)` for `j = −J_max, …, J_max`.
    pub fn frequencies(&self) -> Vec<f64> {
        let j = self.j_max as i64;
        (-j..=j).map(|i| self.h * (i as f64 + self.theta)).collect()
    }

    /// Checks the multiplier conditions and the tail ellipticity for `target_abs_z`.
    pub fn check(&self, target_abs_z: f64) -> Result<(), Model1dError> {
        self.validate_parameters()?;
        for xi in self.frequencies() {
            if self.g.value(xi) < 1.0 || (xi * self.g.derivative(xi)).abs() > 0.1 {
                return Err(Model1dError::BadMultiplier { xi });
            }
        }
        let t = self.h * (self.j_max as f64 + self.theta);
        let tail = t * t;
        let required = self.tail_requirement(target_abs_z);
        if tail < required {
            return Err(Model1dError::TruncationTooSmall { j_max: self.j_max, tail, required });
        }
        Ok(())
    }

    /// `assemble1D` with the tail checked at `|z| = 0`.
    pub fn assemble(&self) -> Result<CMatrix, Model1dError> {
        self.check(0.0)?;
        Ok(self.assemble_unchecked())
    }

    fn assemble_unchecked(&self) -> CMatrix {
        let xi = self.frequencies();
        let n = xi.len();
        let ie = Complex64::new(0.0, self.epsilon);
        let mut a = CMatrix::zeros(n, n);
        for (r, &x) in xi.iter().enumerate() {
            a.row_mut(r)[r] = Complex64::new(self.g.value(x) * x * x, 0.0);
        }
        if self.epsilon == 0.0 {
            return a;
        }
        for (nu, c) in self.potential.iter() {
            for col in 0..n {
                let row = col as i64 + nu;
                if (0..n as i64).contains(&row) {
                    a.row_mut(row as usize)[col] += ie * c;
                }
            }
        }
        if let Some(m) = &self.mixed {
            let mut nus: Vec<i64> = m.terms.iter().map(|t| t.0).collect();
            nus.sort_unstable();
            nus.dedup();
            for nu in nus {
                for (col, &x) in xi.iter().enumerate() {
                    let row = col as i64 + nu;
                    if (0..n as i64).contains(&row) {
                        a.row_mut(row as usize)[col] += ie * m.column_factor(nu, x, self.epsilon);
                    }
                }
            }
        }
        a
    }

    /// The `count` eigenvalues nearest `iε·min V`, sorted by distance and
    /// then by argument.
    pub fn low_lying_spectrum(&self, count: usize, opts: &EigOptions) -> Result<Vec<Complex64>, Model1dError> {
        let min = self.potential.nondegenerate_minimum()?;
        let a = self.assemble()?;
        let center = Complex64::new(0.0, self.epsilon * min.value);
        let ev = eigenvalues(&a, opts)?.eigenvalues;
        Ok(nearest_to(&ev, center, count))
    }
}

/// The `count` entries of `ev` nearest `center`, by modulus then argument
/// of `z − center`.
pub fn nearest_to(ev: &[Complex64], center: Complex64, count: usize) -> Vec<Complex64> {
    let mut sorted = ev.to_vec();
    sorted.sort_by(|a, b| {
        let (da, db) = (*a - center, *b - center);
        da.norm().total_cmp(&db.norm()).then(da.arg().total_cmp(&db.arg()))
    });
    sorted.truncate(count);
    sorted
}

/// `λ_k = e^{iπ/4}(b/2)^{1/2}(2k+1)` for `k = 0..count`.
pub fn harmonic_levels(b: f64, count: usize) -> Vec<Complex64> {
    let w = Complex64::from_polar((0.5 * b).sqrt(), PI / 4.0);
    (0..count).map(|k| w * (2 * k + 1) as f64).collect()
}

/// `σ_min(A − zI)`.
pub fn smallest_singular_value(a: &CMatrix, z: Complex64) -> f64 {
    singular_min(&a.shifted(z))
}

/// Rectangle of spectral parameters for a resolvent scan of `P_ε/ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRegion {
    pub re_min: f64,
    pub re_max: f64,
    pub re_points: usize,
    pub im_values: Vec<f64>,
    /// `C` in `|z| ≥ C·h̃`.
    pub c_lower: f64,
    /// `C₁` in `Im z ≤ C₁·h̃`.
    pub c_imag: f64,
    /// Upper limit on `|z|`.
    pub max_abs_z: f64,
    /// Upper limit on `h̃|z|^{1/2}`.
    pub smallness: f64,
}

impl ScanRegion {
    pub fn grid(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.re_points * self.im_values.len());
        for &im in &self.im_values {
            for i in 0..self.re_points {
                let t = if self.re_points == 1 { 0.0 } else { i as f64 / (self.re_points - 1) as f64 };
                out.push(Complex64::new(self.re_min + t * (self.re_max - self.re_min), im));
            }
        }
        out
    }

    fn validate(&self, h_tilde: f64) -> Result<(), Model1dError> {
        let fail = |s: String| Err(Model1dError::RegionViolatesHypotheses(s));
        if self.re_points == 0 || self.im_values.is_empty() || self.re_min.partial_cmp(&self.re_max).is_none_or(|o| o.is_gt()) {
            return fail("empty grid".into());
        }
        for z in self.grid() {
            if z.im > self.c_imag * h_tilde {
                return fail(format!("Im z = {} exceeds C1 h~ = {}", z.im, self.c_imag * h_tilde));
            }
            if z.norm() < self.c_lower * h_tilde {
                return fail(format!("|z| = {} is below C h~ = {}", z.norm(), self.c_lower * h_tilde));
            }
            if z.norm() > self.max_abs_z {
                return fail(format!("|z| = {} exceeds {}", z.norm(), self.max_abs_z));
            }
            if h_tilde * z.norm().sqrt() > self.smallness {
                return fail(format!("h~ |z|^(1/2) = {} exceeds {}", h_tilde * z.norm().sqrt(), self.smallness));
            }
        }
        Ok(())
    }
}

/// Smallest singular values of `P_ε/ε − z` over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventProbe {
    pub z_grid: Vec<Complex64>,
    pub sigma_min: Vec<f64>,
    /// `h̃ = h/√ε`.
    pub h_tilde: f64,
}

impl ResolventProbe {
    /// `h̃^{2/3}|z|^{1/3}`.
    pub fn bound_value(&self, z: Complex64) -> f64 {
        self.h_tilde.powf(2.0 / 3.0) * z.norm().cbrt()
    }

    /// `min σ_min/(h̃^{2/3}|z|^{1/3})` over grid points with `|z| ≥ C·h̃`;
    /// `None` when no grid point qualifies.
    pub fn fitted_constant(&self, c_lower: f64) -> Option<f64> {
        self.z_grid
            .iter()
            .zip(&self.sigma_min)
            .filter(|(z, _)| z.norm() >= c_lower * self.h_tilde)
            .map(|(&z, &s)| s / self.bound_value(z))
            .reduce(f64::min)
    }
}

/// Scan result with the fitted constant over the full grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventScan {
    pub probe: ResolventProbe,
    pub fitted_c: f64,
    pub j_max: usize,
}

/// `resolventBoundScan`: `σ_min(P_ε/ε − z)` over the region, with the
/// truncation chosen for `|z|` up to the region maximum.
pub fn resolvent_bound_scan(model: &Model1D, region: &ScanRegion) -> Result<ResolventScan, Model1dError> {
    if model.epsilon <= 0.0 {
        return Err(Model1dError::BadParameter("resolvent scan needs epsilon > 0".into()));
    }
    let h_tilde = model.h / model.epsilon.sqrt();
    region.validate(h_tilde)?;
    let grid = region.grid();
    let zmax = grid.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut m = model.clone();
    m.j_max = m.j_max.max(m.required_j_max(model.epsilon * zmax));
    m.check(model.epsilon * zmax)?;
    let a = m.assemble_unchecked().scaled(Complex64::new(1.0 / model.epsilon, 0.0));
    let sigma_min: Vec<f64> = grid.iter().map(|&z| smallest_singular_value(&a, z)).collect();
    let probe = ResolventProbe { z_grid: grid, sigma_min, h_tilde };
    let fitted_c = probe.fitted_constant(0.0).unwrap_or(0.0);
    Ok(ResolventScan { probe, fitted_c, j_max: m.j_max })
}
