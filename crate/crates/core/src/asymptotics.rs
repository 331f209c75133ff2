//! Leading-order eigenvalue lattices near rational tori and their
//! comparison with computed spectra.
//!
//! Write `e₁ = (m, n)/L`, `e₂ = (−n, m)/L` with `L = |(m, n)|`. A lattice
//! frequency `h(j, k)` splits into `ζ₁ = h(jm + kn)/L` along `e₁` and
//! `ζ₂ = h(−jn + km)/L` along `e₂`. Coupling through the modes `μ(m, n)`
//! changes `ζ₁` by `hLμ` and leaves `ζ₂` fixed, so each transverse level
//! `ζ₂ ∈ (h/L)ℤ` carries the one-dimensional operator
//! `ζ₂² + (hL)²D_t² + iε⟨q⟩₂(t)` whose harmonic ladder near the minimum of
//! `⟨q⟩₂` is `√ε h e^{iπ/4}(2 · L²∂²_t⟨q⟩₂)^{1/2}(k + ½)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::classical::{q_infinity_interval, q_infinity_interval_at, ClassicalError, RationalDirection};
use crate::spectral::SpectrumRecord;
use crate::symbol::SymbolCoefficients;

/// `∂²_{ξ₁}p` for `p = ξ² + η²`.
pub const CURVATURE_P: f64 = 2.0;
/// Cap on the rescaled distance of a matched pair.
pub const MATCH_CAP: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AsymptoticsError {
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Classical(#[from] ClassicalError),
}

/// `λ⁰_k = e^{iπ/4}(curvature_p)^{1/2}(b)^{1/2}(k + ½)` for `k = 0..=k_max`.
pub fn harmonic_ladder(second_derivative_b: f64, curvature_p: f64, k_max: usize) -> Vec<Complex64> {
    let w = Complex64::from_polar((curvature_p * second_derivative_b).sqrt(), PI / 4.0);
    (0..=k_max).map(|k| w * (k as f64 + 0.5)).collect()
}

/// One predicted eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticePoint {
    /// Transverse index: `ζ₂ = (h/L)(s₀ + j)` with `s₀` the level nearest `√E`.
    pub j: i64,
    /// Ladder index.
    pub k: usize,
    /// Transverse momentum `ζ₂`.
    pub xi2: f64,
    /// `a(ζ₂) = ζ₂²`.
    pub a: f64,
    /// `b(ζ₂) = min_t ⟨q⟩₂(t)` on the torus at `ζ₂e₂`.
    pub b: f64,
    pub value: Complex64,
}

/// Leading-order lattice along one rational direction.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticePrediction {
    pub direction: RationalDirection,
    pub energy: f64,
    pub h: f64,
    pub epsilon: f64,
    pub xi2_values: Vec<f64>,
    /// Sorted by `j`, then by `k`.
    pub points: Vec<LatticePoint>,
    /// `k = 0 → 1` gap on the torus at `√E e₂`.
    pub ladder_prefactor: Complex64,
    /// `L²`, the factor between `∂²_t⟨q⟩₂` and the second derivative in the
    /// unit transverse coordinate.
    pub calibration_factor: f64,
    /// Set when `ε` lies outside `h^{9/8} ≤ ε ≤ h^{18/19}`.
    pub window_warning: Option<String>,
}

impl LatticePrediction {
    pub fn values(&self) -> Vec<Complex64> {
        self.points.iter().map(|p| p.value).collect()
    }

    /// `√ε h`.
    pub fn scale(&self) -> f64 {
        self.epsilon.sqrt() * self.h
    }
}

/// Advisory check of `h^{1/(1−δ)} ≤ ε ≤ h^{6/(5+12δ)}` at `δ = 1/9`.
pub fn window_warning(h: f64, epsilon: f64) -> Option<String> {
    let lo = h.powf(9.0 / 8.0);
    let hi = h.powf(18.0 / 19.0);
    if epsilon < lo || epsilon > hi {
        Some(format!("epsilon = {epsilon} lies outside [{lo:.4e}, {hi:.4e}] for h = {h}"))
    } else {
        None
    }
}

/// `predictLattice`.
pub fn predict_lattice(
    q: &SymbolCoefficients,
    dir: RationalDirection,
    energy: f64,
    h: f64,
    epsilon: f64,
    j_range: usize,
    k_max: usize,
) -> Result<LatticePrediction, AsymptoticsError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(AsymptoticsError::BadParameter(format!("h = {h}")));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(AsymptoticsError::BadParameter(format!("epsilon = {epsilon}")));
    }
    let central = q_infinity_interval(q, dir, energy)?;
    let l = dir.length();
    let factor = l * l;
    let scale = epsilon.sqrt() * h;
    let ladder0 = harmonic_ladder(factor * central.second_derivative_at_min, CURVATURE_P, 1);
    let ladder_prefactor = (ladder0[1] - ladder0[0]) * scale;

    let spacing = h / l;
    let s0 = (energy.sqrt() / spacing).round() as i64;
    let (e1, e2) = dir.cotangent();
    let mut xi2_values = Vec::with_capacity(2 * j_range + 1);
    let mut points = Vec::new();
    for j in -(j_range as i64)..=(j_range as i64) {
        let xi2 = spacing * (s0 + j) as f64;
        if xi2 <= 0.0 {
            continue;
        }
        xi2_values.push(xi2);
        let iv = q_infinity_interval_at(q, dir, xi2 * e1, xi2 * e2);
        let b2 = iv.second_derivative_at_min;
        if b2 < crate::classical::DEGENERACY_THRESHOLD {
            return Err(ClassicalError::DegenerateMinimum { m: dir.m(), n: dir.n(), second_derivative: b2 }.into());
        }
        let a = xi2 * xi2;
        let base = Complex64::new(a, epsilon * iv.q_inf);
        for (k, lam) in harmonic_ladder(factor * b2, CURVATURE_P, k_max).into_iter().enumerate() {
            points.push(LatticePoint { j, k, xi2, a, b: iv.q_inf, value: base + lam * scale });
        }
    }
    Ok(LatticePrediction {
        direction: dir,
        energy,
        h,
        epsilon,
        xi2_values,
        points,
        ladder_prefactor,
        calibration_factor: factor,
        window_warning: window_warning(h, epsilon),
    })
}

/// Side of the band on which a leg is sought.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Below,
    Above,
}

/// `extractLeg`: eigenvalues with `Im z/ε` beyond the band by more than
/// `margin`, sorted by `Im z/ε`.
pub fn extract_leg(spectrum: &SpectrumRecord, band: (f64, f64), side: Side, margin: f64) -> Vec<Complex64> {
    let eps = spectrum.epsilon;
    if eps <= 0.0 {
        return Vec::new();
    }
    let mut out: Vec<Complex64> = spectrum
        .eigenvalues
        .iter()
        .copied()
        .filter(|z| match side {
            Side::Below => z.im / eps < band.0 - margin,
            Side::Above => z.im / eps > band.1 + margin,
        })
        .collect();
    out.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
    out
}

/// Eigenvalues with `|Re z − center| < h/(C₀√ε)`.
pub fn spectral_window(eigenvalues: &[Complex64], center: f64, h: f64, epsilon: f64, c0: f64) -> Vec<Complex64> {
    let half = h / (c0 * epsilon.sqrt());
    eigenvalues.iter().copied().filter(|z| (z.re - center).abs() < half).collect()
}

/// Follows a chain of eigenvalues from `start`: each next rung is the
/// nearest eigenvalue `w` with `arg(w − z)` within `half_width` of `angle`.
pub fn follow_ladder(eigenvalues: &[Complex64], start: Complex64, angle: f64, half_width: f64, rungs: usize) -> Vec<Complex64> {
    let mut chain = vec![start];
    while chain.len() < rungs {
        let z = *chain.last().unwrap();
        let next = eigenvalues
            .iter()
            .copied()
            .filter(|&w| w != z && !chain.contains(&w))
            .filter(|&w| {
                let d = ((w - z).arg() - angle + PI).rem_euclid(2.0 * PI) - PI;
                d.abs() <= half_width
            })
            .min_by(|a, b| (a - z).norm().total_cmp(&(b - z).norm()));
        match next {
            Some(w) => chain.push(w),
            None => break,
        }
    }
    chain
}

/// Greedy pairing of predicted and computed eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchReport {
    /// `(predicted, computed, distance)`.
    pub pairs: Vec<(Complex64, Complex64, f64)>,
    pub unmatched_predicted: usize,
    pub unmatched_computed: usize,
    /// Root mean square of the matched distances; 0 without matches.
    pub rms_rescaled_error: f64,
}

/// `d(z, w) = (|Re(z − w)| + |Im(z − w)|)/(√ε h)`.
pub fn rescaled_distance(z: Complex64, w: Complex64, h: f64, epsilon: f64) -> f64 {
    let d = z - w;
    (d.re.abs() + d.im.abs()) / (epsilon.sqrt() * h)
}

/// `matchSpectra`: pairs in increasing distance, each point used at most
/// once, distances above [`MATCH_CAP`] left unmatched.
pub fn match_spectra(predicted: &[Complex64], computed: &[Complex64], h: f64, epsilon: f64) -> MatchReport {
    let mut cands: Vec<(f64, usize, usize)> = Vec::new();
    for (i, &p) in predicted.iter().enumerate() {
        for (j, &c) in computed.iter().enumerate() {
            let d = rescaled_distance(p, c, h, epsilon);
            if d <= MATCH_CAP {
                cands.push((d, i, j));
            }
        }
    }
    cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_p = vec![false; predicted.len()];
    let mut used_c = vec![false; computed.len()];
    let mut pairs = Vec::new();
    for (d, i, j) in cands {
        if !used_p[i] && !used_c[j] {
            used_p[i] = true;
            used_c[j] = true;
            pairs.push((predicted[i], computed[j], d));
        }
    }
    let rms = if pairs.is_empty() {
        0.0
    } else {
        (pairs.iter().map(|p| p.2 * p.2).sum::<f64>() / pairs.len() as f64).sqrt()
    };
    MatchReport {
        unmatched_predicted: predicted.len() - pairs.len(),
        unmatched_computed: computed.len() - pairs.len(),
        pairs,
        rms_rescaled_error: rms,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eig::EigOptions;
    use crate::model1d::{Model1D, Potential};
    use approx::assert_abs_diff_eq;

    fn cos_x() -> SymbolCoefficients {
        let mut q = SymbolCoefficients::zeros(1, 1.0).unwrap();
        q.set_real_mode(0, 1, 0, Complex64::new(0.5, 0.0)).unwrap();
        q
    }

    #[test]
    fn ladder_examples() {
        let l = harmonic_ladder(2.0, 2.0, 3);
        assert_abs_diff_eq!(l[0].re, 0.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(l[0].im, 0.5f64.sqrt(), epsilon = 1e-15);
        let gap = Complex64::from_polar(2.0, PI / 4.0);
        for w in l.windows(2) {
            assert!((w[1] - w[0] - gap).norm() < 1e-15);
        }
    }

    #[test]
    fn ladder_matches_one_dimensional_oracle() {
        // (h̃D)² + i(1 − cos x): b = 1, p = (h̃ξ)², so curvature 2 and the
        // levels are h̃·λ⁰_k after dividing by ε.
        let h = 0.005;
        let m = Model1D::new(h, 1.0, 0.0, Potential::one_minus_cos(), 0.1).unwrap();
        let z = m.low_lying_spectrum(4, &EigOptions { backend: crate::eig::EigBackend::Faer, ..Default::default() }).unwrap();
        for (zk, lk) in z.iter().zip(harmonic_ladder(1.0, 2.0, 3)) {
            assert!((zk / h - lk).norm() < 12.0 * h, "{} vs {lk}", zk / h);
        }
    }

    #[test]
    fn prediction_for_cos_x() {
        let (h, eps) = (0.01, 0.02);
        let p = predict_lattice(&cos_x(), RationalDirection::new(1, 0).unwrap(), 1.0, h, eps, 0, 2).unwrap();
        assert_eq!(p.points.len(), 3);
        let pt = p.points[0];
        assert_abs_diff_eq!(pt.xi2, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pt.b, -1.0, epsilon = 1e-14);
        let lam0 = Complex64::from_polar(2f64.sqrt() * 0.5, PI / 4.0);
        let want = Complex64::new(1.0, -eps) + lam0 * eps.sqrt() * h;
        assert!((pt.value - want).norm() < 1e-14);
        assert!(p.points[0].value.im < p.points[1].value.im && p.points[1].value.im < p.points[2].value.im);
        let g1 = p.points[1].value - p.points[0].value;
        let g2 = p.points[2].value - p.points[1].value;
        assert!((g1 - g2).norm() < 1e-15);
        assert!((p.ladder_prefactor - g1).norm() < 1e-15);
        assert_eq!(p.calibration_factor, 1.0);
    }

    #[test]
    fn prediction_offsets_have_argument_pi_over_four() {
        let q = crate::symbol::generate_random_symbol(2, 2.0, 3).unwrap();
        for d in crate::classical::rational_directions(2) {
            let Ok(p) = predict_lattice(&q, d, 0.9, 0.02, 0.04, 3, 3) else { continue };
            for pt in &p.points {
                let off = pt.value - Complex64::new(pt.a, p.epsilon * pt.b);
                assert_abs_diff_eq!(off.arg(), PI / 4.0, epsilon = 1e-12);
            }
            assert_abs_diff_eq!(p.calibration_factor, d.length().powi(2), epsilon = 1e-12);
        }
    }

    #[test]
    fn prefactor_scales_by_half_to_the_three_halves() {
        let q = crate::symbol::generate_random_symbol(2, 2.0, 6).unwrap();
        let d = RationalDirection::new(1, 1).unwrap();
        let (h, eps) = (0.04, 0.08);
        let (Ok(a), Ok(b)) = (predict_lattice(&q, d, 1.0, h, eps, 1, 1), predict_lattice(&q, d, 1.0, h / 2.0, eps / 2.0, 1, 1)) else {
            panic!("prediction failed");
        };
        let ratio = b.ladder_prefactor / a.ladder_prefactor;
        assert!((ratio - Complex64::new(0.5f64.powf(1.5), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn transverse_spacing_is_h_over_length() {
        let q = cos_x();
        let d = RationalDirection::new(1, 0).unwrap();
        let p = predict_lattice(&q, d, 1.0, 0.05, 0.1, 2, 0).unwrap();
        for w in p.xi2_values.windows(2) {
            assert_abs_diff_eq!(w[1] - w[0], 0.05, epsilon = 1e-14);
        }
    }

    fn record(eigs: Vec<Complex64>, eps: f64) -> SpectrumRecord {
        SpectrumRecord {
            h: 0.1,
            epsilon: eps,
            rescaled: eigs.iter().map(|z| (z.re, z.im / eps)).collect(),
            eigenvalues: eigs,
            residual_bound: 0.0,
            trace_error: 0.0,
            trace_tolerance: 0.0,
            iterations: 0,
        }
    }

    #[test]
    fn leg_extraction() {
        let eps = 0.1;
        let body: Vec<Complex64> = (0..20).map(|i| Complex64::new(0.9 + 0.01 * i as f64, eps * (-0.5 + 0.05 * i as f64))).collect();
        assert!(extract_leg(&record(body.clone(), eps), (-1.0, 1.0), Side::Below, 0.0).is_empty());
        let mut all = body;
        let planted = [Complex64::new(0.95, -0.2), Complex64::new(0.9, -0.15), Complex64::new(1.0, -0.12)];
        all.extend(planted);
        let leg = extract_leg(&record(all, eps), (-1.0, 1.0), Side::Below, 0.05);
        assert_eq!(leg, vec![planted[0], planted[1], planted[2]]);
    }

    #[test]
    fn matching_examples() {
        let (h, eps) = (0.05f64, 0.1f64);
        let s = eps.sqrt() * h;
        let pred: Vec<Complex64> = (0..5).map(|k| Complex64::new(0.8 + k as f64 * s, -0.1 + k as f64 * s)).collect();
        let r = match_spectra(&pred, &pred, h, eps);
        assert_eq!(r.pairs.len(), 5);
        assert!(r.pairs.iter().all(|p| p.2 == 0.0));
        assert_eq!(r.rms_rescaled_error, 0.0);
        let shifted: Vec<Complex64> = pred.iter().map(|z| z + Complex64::new(0.1 * s, 0.1 * s)).collect();
        let r = match_spectra(&pred, &shifted, h, eps);
        assert!(r.pairs.iter().all(|p| (p.2 - 0.2).abs() < 1e-9));
        let missing: Vec<Complex64> = shifted.iter().copied().skip(1).collect();
        let r = match_spectra(&pred, &missing, h, eps);
        assert_eq!(r.unmatched_predicted, 1);
        assert_eq!(r.unmatched_computed, 0);
    }

    #[test]
    fn ladder_following_stays_on_the_diagonal() {
        let s = 0.01;
        let w = Complex64::from_polar(s, PI / 4.0);
        let mut eigs: Vec<Complex64> = (0..4).map(|k| Complex64::new(0.8, -0.2) + w * k as f64).collect();
        eigs.push(Complex64::new(0.8 - 0.5 * s, -0.2 + 0.5 * s));
        eigs.push(Complex64::new(0.8 + 0.3 * s, -0.2 + 3.0 * s));
        let chain = follow_ladder(&eigs, eigs[0], PI / 4.0, 0.5, 4);
        assert_eq!(chain, eigs[..4].to_vec());
    }

    #[test]
    fn window_is_advisory() {
        assert!(window_warning(0.01, 0.01).is_none());
        assert!(window_warning(0.01, 0.5).is_some());
    }
}
