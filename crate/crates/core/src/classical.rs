//! Classical invariants of the flat-torus model `p = ξ² + η²`.
//!
//! The Hamilton flow of `p` at `(ξ, η)` is the straight-line flow with
//! velocity `(2ξ, 2η)`. A torus `Λ_{ξ,η}` is rational when `(ξ, η)` is
//! parallel to `(−n, m)` for a primitive lattice vector `(m, n)`; the closed
//! orbits are then labelled by `t = (x, y)·(m, n)` and the long-time average
//! of `q` along the orbit `t` is the secular average `⟨q⟩₂(t)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::matrix::ZERO;
use crate::symbol::{reduce_angle, PhasePoint, SymbolCoefficients};

/// Uniform sample count for locating extrema of a secular polynomial.
pub const SECULAR_SAMPLES: usize = 8192;
/// Grid side for locating extrema of `q` over a torus.
pub const TORUS_GRID: usize = 512;
/// Minimum admissible `d²⟨q⟩₂/dt²` at the located minimum.
pub const DEGENERACY_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClassicalError {
    #[error("({m}, {n}) is not a primitive lattice direction")]
    NotPrimitive { m: i64, n: i64 },
    #[error("energy must be positive and finite, got {0}")]
    BadEnergy(f64),
    #[error("averaging time must be positive and finite, got {0}")]
    BadTime(f64),
    #[error("at least 64 angle samples are required, got {0}")]
    TooFewSamples(usize),
    #[error("degenerate minimum of the secular average along ({m}, {n}): second derivative {second_derivative:e}")]
    DegenerateMinimum { m: i64, n: i64, second_derivative: f64 },
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Primitive lattice direction `(m, n)` in canonical sign: `m > 0`, or
/// `m = 0` and `n = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalDirection {
    m: i64,
    n: i64,
}

impl RationalDirection {
    /// Canonicalizes the sign of a primitive `(m, n)`.
    pub fn new(m: i64, n: i64) -> Result<Self, ClassicalError> {
        if gcd(m, n) != 1 {
            return Err(ClassicalError::NotPrimitive { m, n });
        }
        let flip = m < 0 || (m == 0 && n < 0);
        Ok(if flip { Self { m: -m, n: -n } } else { Self { m, n } })
    }

    pub fn m(&self) -> i64 {
        self.m
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    /// `|(m, n)|`.
    pub fn length(&self) -> f64 {
        ((self.m * self.m + self.n * self.n) as f64).sqrt()
    }

    /// `max(|m|, |n|)`.
    pub fn sup_norm(&self) -> i64 {
        self.m.abs().max(self.n.abs())
    }

    /// Unit cotangent direction `(−n, m)/|(m, n)|`.
    pub fn cotangent(&self) -> (f64, f64) {
        let l = self.length();
        (-self.n as f64 / l, self.m as f64 / l)
    }

    /// Cotangent direction scaled onto the circle `ξ² + η² = energy`.
    pub fn on_shell(&self, energy: f64) -> (f64, f64) {
        let (a, b) = self.cotangent();
        let r = energy.sqrt();
        (r * a, r * b)
    }

    /// Angle `arg(ξ + iη)` of the unit cotangent direction, in `[0, 2π)`.
    pub fn angle(&self) -> f64 {
        let (a, b) = self.cotangent();
        reduce_angle(b.atan2(a))
    }
}

/// All primitive `(m, n)` with `max(|m|, |n|) ≤ F`, canonical and sorted.
pub fn rational_directions(degree: usize) -> Vec<RationalDirection> {
    let f = degree as i64;
    let mut out = Vec::new();
    for m in 0..=f {
        for n in -f..=f {
            if (m > 0 || n == 1) && gcd(m, n) == 1 {
                out.push(RationalDirection { m, n });
            }
        }
    }
    out.sort();
    out
}

/// The trigonometric polynomial `t ↦ Σ_{|μ|≤M} c_μ e^{iμt}` with
/// `c_μ = q̂(μ(m,n); ξ, η)` and `M = [F / max(|m|,|n|)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecularPolynomial {
    /// `c_{−M}, …, c_M`.
    coeffs: Vec<Complex64>,
}

impl SecularPolynomial {
    pub fn new(q: &SymbolCoefficients, dir: RationalDirection, xi: f64, eta: f64) -> Self {
        let big_m = q.degree() as i64 / dir.sup_norm();
        let coeffs = (-big_m..=big_m)
            .map(|mu| q.coeff_at(mu * dir.m, mu * dir.n, xi, eta))
            .collect();
        Self { coeffs }
    }

    /// Largest frequency `M`.
    pub fn order(&self) -> usize {
        self.coeffs.len() / 2
    }

    /// `c_μ`, zero outside `[−M, M]`.
    pub fn coeff(&self, mu: i64) -> Complex64 {
        let m = self.order() as i64;
        if mu.abs() > m {
            ZERO
        } else {
            self.coeffs[(mu + m) as usize]
        }
    }

    /// The `μ = 0` term, which is the torus average `⟨q⟩_Λ`.
    pub fn mean(&self) -> f64 {
        self.coeff(0).re
    }

    /// True when every `μ ≠ 0` coefficient vanishes.
    pub fn is_constant(&self) -> bool {
        let m = self.order() as i64;
        let scale = 1.0 + self.coeff(0).norm();
        (1..=m).all(|mu| self.coeff(mu).norm() <= 1e-15 * scale && self.coeff(-mu).norm() <= 1e-15 * scale)
    }

    /// `dᵈ/dtᵈ` of the polynomial at `t`.
    pub fn derivative(&self, t: f64, order: u32) -> f64 {
        let m = self.order() as i64;
        let mut acc = 0.0;
        for mu in -m..=m {
            let c = self.coeff(mu);
            let w = Complex64::new(0.0, mu as f64).powu(order);
            acc += (c * w * Complex64::from_polar(1.0, mu as f64 * t)).re;
        }
        acc
    }

    pub fn value(&self, t: f64) -> f64 {
        self.derivative(t, 0)
    }

    /// `Σ_μ |μ c_μ|`, a bound on `|d/dt|`.
    fn slope_scale(&self) -> f64 {
        let m = self.order() as i64;
        (-m..=m).map(|mu| mu.abs() as f64 * self.coeff(mu).norm()).sum()
    }
}

/// `⟨q⟩₂(t)` along `dir` at the cotangent point `(ξ, η)`.
pub fn secular_average(q: &SymbolCoefficients, dir: RationalDirection, xi: f64, eta: f64, t: f64) -> f64 {
    SecularPolynomial::new(q, dir, xi, eta).value(t)
}

/// Location and value of a global extremum of a secular polynomial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub t: f64,
    pub value: f64,
}

/// Global minimum (`sign = 1`) or maximum (`sign = −1`) of `p` over `[0, 2π)`.
fn secular_extremum(p: &SecularPolynomial, sign: f64) -> Extremum {
    let n = SECULAR_SAMPLES;
    let dt = 2.0 * PI / n as f64;
    let vals: Vec<f64> = (0..n).map(|i| sign * p.value(i as f64 * dt)).collect();
    let mut cands: Vec<usize> = (0..n)
        .filter(|&i| vals[i] <= vals[(i + n - 1) % n] && vals[i] <= vals[(i + 1) % n])
        .collect();
    cands.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    cands.truncate(16);
    let tol = 1e-12 * p.slope_scale().max(1.0);
    let mut best = Extremum { t: 0.0, value: f64::INFINITY };
    for i in cands {
        let t = refine_critical_point(p, sign, i as f64 * dt, dt, tol);
        let v = sign * p.value(t);
        if v < best.value {
            best = Extremum { t: reduce_angle(t), value: v };
        }
    }
    Extremum { t: best.t, value: sign * best.value }
}

/// Safeguarded Newton iteration for a zero of `p′` in `[t0 − dt, t0 + dt]`.
fn refine_critical_point(p: &SecularPolynomial, sign: f64, t0: f64, dt: f64, tol: f64) -> f64 {
    let d1 = |t: f64| sign * p.derivative(t, 1);
    let d2 = |t: f64| sign * p.derivative(t, 2);
    let (mut a, mut b) = (t0 - dt, t0 + dt);
    if !(d1(a) <= 0.0 && d1(b) >= 0.0) {
        return t0;
    }
    let mut t = t0;
    for _ in 0..200 {
        let g = d1(t);
        if g.abs() <= tol || b - a <= 1e-15 {
            break;
        }
        if g < 0.0 {
            a = t;
        } else {
            b = t;
        }
        let curv = d2(t);
        let newton = t - g / curv;
        t = if curv > 0.0 && newton > a && newton < b { newton } else { 0.5 * (a + b) };
    }
    t
}

/// Extrema of `q(·, ·; ξ, η)` over the 2-torus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusExtrema {
    pub min: f64,
    pub max: f64,
}

/// Real trigonometric polynomial on the 2-torus used for extremum search.
struct TorusPoly {
    f: i64,
    c: Vec<Vec<Complex64>>,
}

impl TorusPoly {
    /// Value, gradient and Hessian at `(x, y)`.
    fn jet(&self, x: f64, y: f64) -> (f64, [f64; 2], [f64; 3]) {
        let mut v = 0.0;
        let mut g = [0.0; 2];
        let mut hess = [0.0; 3];
        for (a, j) in (-self.f..=self.f).enumerate() {
            for (b, k) in (-self.f..=self.f).enumerate() {
                let c = self.c[a][b];
                if c == ZERO {
                    continue;
                }
                let e = c * Complex64::from_polar(1.0, j as f64 * x + k as f64 * y);
                let (jf, kf) = (j as f64, k as f64);
                v += e.re;
                g[0] -= jf * e.im;
                g[1] -= kf * e.im;
                hess[0] -= jf * jf * e.re;
                hess[1] -= jf * kf * e.re;
                hess[2] -= kf * kf * e.re;
            }
        }
        (v, g, hess)
    }

    /// Samples on the uniform `side × side` grid, row index `x`.
    fn grid(&self, side: usize) -> Vec<f64> {
        let f = self.f;
        let step = 2.0 * PI / side as f64;
        let ey: Vec<Vec<Complex64>> = (0..side)
            .map(|s| (-f..=f).map(|k| Complex64::from_polar(1.0, k as f64 * s as f64 * step)).collect())
            .collect();
        let mut out = Vec::with_capacity(side * side);
        for r in 0..side {
            let x = r as f64 * step;
            let row: Vec<Complex64> = (0..(2 * f + 1) as usize)
                .map(|b| {
                    (-f..=f)
                        .enumerate()
                        .map(|(a, j)| self.c[a][b] * Complex64::from_polar(1.0, j as f64 * x))
                        .sum()
                })
                .collect();
            for e in &ey {
                let s: Complex64 = row.iter().zip(e).map(|(u, w)| u * w).sum();
                out.push(s.re);
            }
        }
        out
    }

    /// Newton refinement of a critical point near `(x, y)`; keeps the start
    /// point when the iteration fails to improve `sign · q`.
    fn refine(&self, x: f64, y: f64, sign: f64) -> f64 {
        let (mut x, mut y) = (x, y);
        let (mut best, _, _) = self.jet(x, y);
        for _ in 0..30 {
            let (_, g, h) = self.jet(x, y);
            let det = h[0] * h[2] - h[1] * h[1];
            if det.abs() < 1e-300 {
                break;
            }
            let dx = (h[2] * g[0] - h[1] * g[1]) / det;
            let dy = (h[0] * g[1] - h[1] * g[0]) / det;
            if dx.abs().max(dy.abs()) > 0.1 {
                break;
            }
            let (v, _, _) = self.jet(x - dx, y - dy);
            if sign * v > sign * best + 1e-15 * best.abs().max(1.0) {
                break;
            }
            x -= dx;
            y -= dy;
            best = v;
            if dx.abs().max(dy.abs()) < 1e-13 {
                break;
            }
        }
        best
    }
}

/// Extrema of `q` over `Λ_{ξ,η}` by grid sampling plus Newton refinement.
pub fn torus_extrema(q: &SymbolCoefficients, xi: f64, eta: f64) -> TorusExtrema {
    torus_extrema_with_grid(q, xi, eta, TORUS_GRID)
}

/// [`torus_extrema`] seeded from a `side × side` grid.
pub fn torus_extrema_with_grid(q: &SymbolCoefficients, xi: f64, eta: f64, side: usize) -> TorusExtrema {
    let poly = TorusPoly { f: q.degree() as i64, c: q.torus_slice(xi, eta) };
    let side = side.max(8);
    let vals = poly.grid(side);
    let step = 2.0 * PI / side as f64;
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let at = |i: usize| ((i / side) as f64 * step, (i % side) as f64 * step);
    let pick = 4.min(order.len());
    let mut min = f64::INFINITY;
    for &i in &order[..pick] {
        let (x, y) = at(i);
        min = min.min(poly.refine(x, y, 1.0));
    }
    let mut max = f64::NEG_INFINITY;
    for &i in order.iter().rev().take(pick) {
        let (x, y) = at(i);
        max = max.max(poly.refine(x, y, -1.0));
    }
    TorusExtrema { min, max }
}

/// `Q∞(Λ)` for a rational torus together with the extrema of `q` on `Λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QInfinityInterval {
    pub direction: RationalDirection,
    /// Cotangent point `(ξ, η)` of the torus.
    pub xi: f64,
    pub eta: f64,
    pub torus_average: f64,
    pub q_inf: f64,
    pub q_sup: f64,
    pub t_min: f64,
    /// Location of `q_sup`.
    pub t_max: f64,
    pub second_derivative_at_min: f64,
    pub torus_min_q: f64,
    pub torus_max_q: f64,
}

impl QInfinityInterval {
    pub fn width(&self) -> f64 {
        self.q_sup - self.q_inf
    }
}

/// `Q∞` along `dir` on the energy circle, canonical orientation
/// `(ξ, η) = √E (−n, m)/|(m, n)|`.
pub fn q_infinity_interval(
    q: &SymbolCoefficients,
    dir: RationalDirection,
    energy: f64,
) -> Result<QInfinityInterval, ClassicalError> {
    if !(energy > 0.0 && energy.is_finite()) {
        return Err(ClassicalError::BadEnergy(energy));
    }
    let (xi, eta) = dir.on_shell(energy);
    let iv = q_infinity_interval_at(q, dir, xi, eta);
    let nonconstant = !SecularPolynomial::new(q, dir, xi, eta).is_constant();
    if nonconstant && iv.second_derivative_at_min < DEGENERACY_THRESHOLD {
        return Err(ClassicalError::DegenerateMinimum {
            m: dir.m,
            n: dir.n,
            second_derivative: iv.second_derivative_at_min,
        });
    }
    Ok(iv)
}

/// `Q∞` along `dir` at an arbitrary cotangent point, without the
/// non-degeneracy check.
pub fn q_infinity_interval_at(q: &SymbolCoefficients, dir: RationalDirection, xi: f64, eta: f64) -> QInfinityInterval {
    let p = SecularPolynomial::new(q, dir, xi, eta);
    let avg = p.mean();
    let (lo, hi, d2) = if p.is_constant() {
        (Extremum { t: 0.0, value: avg }, Extremum { t: 0.0, value: avg }, 0.0)
    } else {
        let lo = secular_extremum(&p, 1.0);
        let hi = secular_extremum(&p, -1.0);
        (lo, hi, p.derivative(lo.t, 2))
    };
    let ext = torus_extrema(q, xi, eta);
    QInfinityInterval {
        direction: dir,
        xi,
        eta,
        torus_average: avg,
        q_inf: lo.value.min(avg),
        q_sup: hi.value.max(avg),
        t_min: lo.t,
        t_max: hi.t,
        second_derivative_at_min: d2,
        torus_min_q: ext.min.min(lo.value),
        torus_max_q: ext.max.max(hi.value),
    }
}

/// `K̂(s) = 2 sin(s/2)/s`, `K̂(0) = 1`.
pub fn k_hat(s: f64) -> f64 {
    if s.abs() < 1e-4 {
        1.0 - s * s / 24.0
    } else {
        2.0 * (0.5 * s).sin() / s
    }
}

/// `⟨q⟩_T(x, ξ) = Σ e^{ik·x} q̂(k; ξ) K̂(T k·(2ξ, 2η))`.
pub fn finite_time_average(q: &SymbolCoefficients, point: &PhasePoint, time: f64) -> Result<f64, ClassicalError> {
    if !(time > 0.0 && time.is_finite()) {
        return Err(ClassicalError::BadTime(time));
    }
    let f = q.degree() as i64;
    let mut acc = ZERO;
    for j in -f..=f {
        for k in -f..=f {
            let c = q.coeff_at(j, k, point.xi, point.eta);
            if c == ZERO {
                continue;
            }
            let s = time * (j as f64 * 2.0 * point.xi + k as f64 * 2.0 * point.eta);
            acc += c * Complex64::from_polar(k_hat(s), j as f64 * point.x + k as f64 * point.y);
        }
    }
    Ok(acc.re)
}

/// `Σ_{k≠0} 2|q̂(k; ξ, η)| / |k·(2ξ, 2η)|`, so that
/// `|⟨q⟩_T − ⟨q⟩_Λ| ≤ C/T` on a torus with no resonant `k ≠ 0`.
pub fn convergence_constant(q: &SymbolCoefficients, xi: f64, eta: f64) -> f64 {
    let f = q.degree() as i64;
    let mut c = 0.0;
    for j in -f..=f {
        for k in -f..=f {
            if (j, k) == (0, 0) {
                continue;
            }
            let a = q.coeff_at(j, k, xi, eta).norm();
            if a == 0.0 {
                continue;
            }
            c += 2.0 * a / (2.0 * (j as f64 * xi + k as f64 * eta)).abs();
        }
    }
    c
}

/// Band `[inf, sup]` of `∪_Λ Q∞(Λ)` over an energy circle.
#[derive(Debug, Clone, PartialEq)]
pub struct BandBounds {
    pub inf_band: f64,
    pub sup_band: f64,
    /// Intervals for every rational direction in both orientations.
    pub intervals: Vec<QInfinityInterval>,
    /// Torus averages `(angle, ⟨q⟩_Λ)` at the sampled angles.
    pub curve: Vec<(f64, f64)>,
}

/// Torus average `q̂(0, 0; ξ, η)` at angle `θ` on the energy circle.
pub fn torus_average_at_angle(q: &SymbolCoefficients, energy: f64, theta: f64) -> f64 {
    let r = energy.sqrt();
    q.coeff_at(0, 0, r * theta.cos(), r * theta.sin()).re
}

pub fn band_bounds(q: &SymbolCoefficients, energy: f64, n_samples: usize) -> Result<BandBounds, ClassicalError> {
    if !(energy > 0.0 && energy.is_finite()) {
        return Err(ClassicalError::BadEnergy(energy));
    }
    if n_samples < 64 {
        return Err(ClassicalError::TooFewSamples(n_samples));
    }
    let dirs = rational_directions(q.degree().max(1));
    let mut intervals = Vec::with_capacity(2 * dirs.len());
    for &d in &dirs {
        let (xi, eta) = d.on_shell(energy);
        intervals.push(q_infinity_interval_at(q, d, xi, eta));
        intervals.push(q_infinity_interval_at(q, d, -xi, -eta));
    }
    let rational_angles: Vec<f64> = intervals.iter().map(|iv| reduce_angle(iv.eta.atan2(iv.xi))).collect();
    let curve: Vec<(f64, f64)> = (0..n_samples)
        .map(|i| 2.0 * PI * (i as f64 + 0.5) / n_samples as f64)
        .filter(|th| rational_angles.iter().all(|a| (a - th).abs() > 1e-12))
        .map(|th| (th, torus_average_at_angle(q, energy, th)))
        .collect();
    let inf_band = intervals
        .iter()
        .map(|iv| iv.q_inf)
        .chain(curve.iter().map(|c| c.1))
        .fold(f64::INFINITY, f64::min);
    let sup_band = intervals
        .iter()
        .map(|iv| iv.q_sup)
        .chain(curve.iter().map(|c| c.1))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(BandBounds { inf_band, sup_band, intervals, curve })
}

/// Band-limited complex Fourier series on the 2-torus, coefficients over
/// `[-F, F]²` indexed by `(j, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusSeries {
    degree: usize,
    coeffs: Vec<Complex64>,
}

impl TorusSeries {
    pub fn zeros(degree: usize) -> Self {
        let side = 2 * degree + 1;
        Self { degree, coeffs: vec![ZERO; side * side] }
    }

    /// `q₀ + q₁ξ + q₂η` on the torus at `(ξ, η)`.
    pub fn from_symbol(q: &SymbolCoefficients, xi: f64, eta: f64) -> Self {
        let mut s = Self::zeros(q.degree());
        let f = q.degree() as i64;
        for j in -f..=f {
            for k in -f..=f {
                s.set(j, k, q.coeff_at(j, k, xi, eta));
            }
        }
        s
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    fn slot(&self, j: i64, k: i64) -> Option<usize> {
        let f = self.degree as i64;
        (j.abs() <= f && k.abs() <= f).then(|| ((j + f) * (2 * f + 1) + (k + f)) as usize)
    }

    /// Coefficient of `e^{i(jx₁ + kx₂)}`, zero outside the band.
    pub fn coeff(&self, j: i64, k: i64) -> Complex64 {
        self.slot(j, k).map_or(ZERO, |s| self.coeffs[s])
    }

    /// Sets a coefficient; indices outside the band are ignored.
    pub fn set(&mut self, j: i64, k: i64, value: Complex64) {
        if let Some(s) = self.slot(j, k) {
            self.coeffs[s] = value;
        }
    }

    pub fn evaluate(&self, x1: f64, x2: f64) -> Complex64 {
        let f = self.degree as i64;
        let mut acc = ZERO;
        for j in -f..=f {
            for k in -f..=f {
                acc += self.coeff(j, k) * Complex64::from_polar(1.0, j as f64 * x1 + k as f64 * x2);
            }
        }
        acc
    }

    /// `∂_{x₂}` applied coefficientwise.
    pub fn d_x2(&self) -> Self {
        let mut out = self.clone();
        let f = self.degree as i64;
        for j in -f..=f {
            for k in -f..=f {
                out.set(j, k, self.coeff(j, k) * Complex64::new(0.0, k as f64));
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let degree = self.degree.max(other.degree);
        let f = degree as i64;
        let mut out = Self::zeros(degree);
        for j in -f..=f {
            for k in -f..=f {
                out.set(j, k, self.coeff(j, k) - other.coeff(j, k));
            }
        }
        out
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Solution of `∂_{x₂}u₀ = v − ⟨v⟩₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct CohomologicalSolution {
    /// The solution with zero `x₂`-mean.
    pub u0: TorusSeries,
    /// `⟨v⟩₂`, supported on `k = 0`.
    pub mean2: TorusSeries,
}

impl CohomologicalSolution {
    /// The solution normalized by `u(x₁, 0) = 0`, that is `∫₀^{x₂}(v − ⟨v⟩₂)`.
    pub fn anchored(&self) -> TorusSeries {
        let mut out = self.u0.clone();
        let f = self.u0.degree() as i64;
        for j in -f..=f {
            let s: Complex64 = (-f..=f).map(|k| self.u0.coeff(j, k)).sum();
            out.set(j, 0, self.u0.coeff(j, 0) - s);
        }
        out
    }
}

pub fn cohomological_solve(v: &TorusSeries) -> CohomologicalSolution {
    let f = v.degree() as i64;
    let mut u0 = TorusSeries::zeros(v.degree());
    let mut mean2 = TorusSeries::zeros(v.degree());
    for j in -f..=f {
        mean2.set(j, 0, v.coeff(j, 0));
        for k in (-f..=f).filter(|&k| k != 0) {
            u0.set(j, k, v.coeff(j, k) / Complex64::new(0.0, k as f64));
        }
    }
    CohomologicalSolution { u0, mean2 }
}
