use num_complex::Complex64;

use super::EigError;
use crate::matrix::{vec_norm, CMatrix, ZERO};

/// Relative threshold `|h[i+1,i]| ≤ tol·(|h[i,i]| + |h[i+1,i+1]|)` for deflation.
pub const DEFAULT_DEFLATION_TOL: f64 = 1e-12;

/// Sweeps without deflation after which an exceptional shift is used.
const EXCEPTIONAL_SHIFT_PERIOD: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct EigResult {
    pub eigenvalues: Vec<Complex64>,
    pub max_residual: f64,
    /// Number of QR sweeps performed.
    pub iterations: usize,
}

/// Plane rotation `[[c, s], [-conj(s), c]]` with real `c`.
#[derive(Debug, Clone, Copy)]
struct Givens {
    c: f64,
    s: Complex64,
}

impl Givens {
    /// Rotation mapping `(x, y)` to `(r, 0)`.
    fn zeroing(x: Complex64, y: Complex64) -> Self {
        let ax = x.norm();
        let ay = y.norm();
        if ay == 0.0 {
            return Self { c: 1.0, s: ZERO };
        }
        if ax == 0.0 {
            return Self {
                c: 0.0,
                s: y.conj() / ay,
            };
        }
        let r = ax.hypot(ay);
        Self {
            c: ax / r,
            s: (x / ax) * y.conj() / r,
        }
    }

    #[inline]
    fn rotate_rows(&self, top: &mut [Complex64], bottom: &mut [Complex64]) {
        let (c, s) = (self.c, self.s);
        let sc = s.conj();
        for (a, b) in top.iter_mut().zip(bottom.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = x * c + s * y;
            *b = y * c - sc * x;
        }
    }

    /// Right-multiplies columns `k, k+1` of rows `rows` by the adjoint.
    #[inline]
    fn rotate_cols(&self, m: &mut CMatrix, k: usize, rows: std::ops::Range<usize>) {
        let (c, s) = (self.c, self.s);
        let sc = s.conj();
        let n = m.ncols();
        let data = m.as_mut_slice();
        for i in rows {
            let base = i * n + k;
            let (x, y) = (data[base], data[base + 1]);
            data[base] = x * c + sc * y;
            data[base + 1] = y * c - s * x;
        }
    }
}

fn two_by_two_eigenvalues(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let half_tr = (a + d) * 0.5;
    let half_diff = (a - d) * 0.5;
    let disc = (half_diff * half_diff + b * c).sqrt();
    let (p, m) = (half_tr + disc, half_tr - disc);
    let (big, _) = if p.norm() >= m.norm() { (p, m) } else { (m, p) };
    if big == ZERO {
        return (ZERO, ZERO);
    }
    let det = a * d - b * c;
    (big, det / big)
}

/// Eigenvalue of the trailing 2×2 block closest to its last diagonal entry.
fn wilkinson_shift(h: &CMatrix, hi: usize) -> Complex64 {
    let a = h[(hi - 1, hi - 1)];
    let b = h[(hi - 1, hi)];
    let c = h[(hi, hi - 1)];
    let d = h[(hi, hi)];
    let (l1, l2) = two_by_two_eigenvalues(a, b, c, d);
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn negligible(h: &CMatrix, i: usize, tol: f64, fallback: f64) -> bool {
    let sub = h[(i, i - 1)].norm();
    let scale = h[(i - 1, i - 1)].norm() + h[(i, i)].norm();
    let scale = if scale == 0.0 { fallback } else { scale };
    sub <= tol * scale
}

/// Rotations per chunk whose column updates on rows above the chunk are
/// deferred and applied row by row.
const CHUNK: usize = 48;

/// One implicit single-shift QR sweep on the active window `lo..=hi`.
///
/// Only the window is updated: the off-window blocks are not needed when
/// eigenvalues alone are wanted. Column rotations touching rows above the
/// current chunk are deferred, since later row rotations never read those
/// rows, and then applied with contiguous row access.
fn sweep(h: &mut CMatrix, lo: usize, hi: usize, shift: Complex64) {
    let mut pending: Vec<Givens> = Vec::with_capacity(CHUNK);
    let mut chunk_start = lo;
    for k in lo..hi {
        let g = if k == lo {
            Givens::zeroing(h[(lo, lo)] - shift, h[(lo + 1, lo)])
        } else {
            Givens::zeroing(h[(k, k - 1)], h[(k + 1, k - 1)])
        };
        let first_col = if k == lo { lo } else { k - 1 };
        {
            let (top, bottom) = h.two_rows_mut(k, k + 1);
            g.rotate_rows(&mut top[first_col..=hi], &mut bottom[first_col..=hi]);
        }
        if k > lo {
            h[(k + 1, k - 1)] = ZERO;
        }
        g.rotate_cols(h, k, chunk_start..(k + 3).min(hi + 1));
        pending.push(g);
        if pending.len() == CHUNK || k + 1 == hi {
            flush(h, lo, chunk_start, k + 1 - pending.len(), &pending);
            pending.clear();
            chunk_start = k + 1;
        }
    }
}

/// Applies the column rotations `gs` (acting on columns `first, first+1, ...`)
/// to rows `lo..rows_end`.
fn flush(h: &mut CMatrix, lo: usize, rows_end: usize, first: usize, gs: &[Givens]) {
    let n = h.ncols();
    let data = h.as_mut_slice();
    for i in lo..rows_end {
        let row = &mut data[i * n + first..i * n + first + gs.len() + 1];
        for (t, g) in gs.iter().enumerate() {
            let (x, y) = (row[t], row[t + 1]);
            row[t] = x * g.c + g.s.conj() * y;
            row[t + 1] = y * g.c - g.s * x;
        }
    }
}

/// All eigenvalues of an upper Hessenberg matrix by complex single-shift QR
/// with Wilkinson shifts and deflation.
///
/// `max_sweeps` caps the total number of QR sweeps.
pub fn qr_eigenvalues(h: &CMatrix, tol: f64, max_sweeps: usize) -> Result<EigResult, EigError> {
    if !h.is_square() {
        return Err(EigError::NotSquare {
            rows: h.nrows(),
            cols: h.ncols(),
        });
    }
    let n = h.nrows();
    if n == 0 {
        return Err(EigError::Empty);
    }
    let mut h = h.clone();
    let fallback = h.max_abs().max(f64::MIN_POSITIVE);
    let mut eigenvalues = Vec::with_capacity(n);
    let mut sweeps = 0usize;
    let mut since_deflation = 0usize;
    let mut hi = n - 1;

    loop {
        if hi == 0 {
            eigenvalues.push(h[(0, 0)]);
            break;
        }
        let mut lo = hi;
        while lo > 0 && !negligible(&h, lo, tol, fallback) {
            lo -= 1;
        }
        if lo > 0 {
            h[(lo, lo - 1)] = ZERO;
        }
        if lo == hi {
            eigenvalues.push(h[(hi, hi)]);
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        if lo + 1 == hi {
            let (l1, l2) = two_by_two_eigenvalues(h[(lo, lo)], h[(lo, hi)], h[(hi, lo)], h[(hi, hi)]);
            eigenvalues.push(l1);
            eigenvalues.push(l2);
            since_deflation = 0;
            if lo == 0 {
                break;
            }
            hi = lo - 1;
            continue;
        }
        if sweeps >= max_sweeps {
            return Err(EigError::ConvergenceFailure {
                sweeps,
                converged: eigenvalues.len(),
                dimension: n,
            });
        }
        since_deflation += 1;
        let shift = if since_deflation.is_multiple_of(EXCEPTIONAL_SHIFT_PERIOD) {
            let sub = h[(hi, hi - 1)].norm();
            h[(hi, hi)] + Complex64::new(0.75 * sub, 0.75 * sub)
        } else {
            wilkinson_shift(&h, hi)
        };
        sweep(&mut h, lo, hi, shift);
        sweeps += 1;
    }

    Ok(EigResult {
        eigenvalues,
        max_residual: 0.0,
        iterations: sweeps,
    })
}

/// Residual `‖(H − λ)x‖ / ‖x‖` of an inverse-iteration vector for the
/// Hessenberg matrix `h` and approximate eigenvalue `lambda`.
pub fn residual_probe(h: &CMatrix, lambda: Complex64) -> f64 {
    let n = h.nrows();
    if n == 1 {
        return (h[(0, 0)] - lambda).norm();
    }
    let tiny = 1e-300_f64.max(f64::EPSILON * h.max_abs() * 1e-3);
    let lu = HessenbergLu::new(h, lambda, tiny);
    let mut x: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0, (i as f64 * 0.618).sin() * 0.5))
        .collect();
    for _ in 0..3 {
        x = lu.solve(&x);
        let nx = vec_norm(&x);
        if !nx.is_finite() || nx == 0.0 {
            return f64::INFINITY;
        }
        for v in &mut x {
            *v /= nx;
        }
    }
    let mut r = vec![ZERO; n];
    for i in 0..n {
        let row = h.row(i);
        let start = i.saturating_sub(1);
        let mut acc = ZERO;
        for j in start..n {
            acc += row[j] * x[j];
        }
        r[i] = acc - lambda * x[i];
    }
    vec_norm(&r)
}

/// LU factors of `H − λI` for Hessenberg `H` with adjacent-row pivoting.
struct HessenbergLu {
    u: CMatrix,
    multipliers: Vec<Complex64>,
    swapped: Vec<bool>,
}

impl HessenbergLu {
    fn new(h: &CMatrix, lambda: Complex64, tiny: f64) -> Self {
        let n = h.nrows();
        let mut u = h.shifted(lambda);
        let mut multipliers = vec![ZERO; n];
        let mut swapped = vec![false; n];
        for k in 0..n - 1 {
            if u[(k + 1, k)].norm() > u[(k, k)].norm() {
                let (a, b) = u.two_rows_mut(k, k + 1);
                a[k..].swap_with_slice(&mut b[k..]);
                swapped[k] = true;
            }
            if u[(k, k)].norm() < tiny {
                u[(k, k)] = Complex64::new(tiny, 0.0);
            }
            let l = u[(k + 1, k)] / u[(k, k)];
            multipliers[k] = l;
            let (a, b) = u.two_rows_mut(k, k + 1);
            for j in k + 1..n {
                b[j] -= l * a[j];
            }
            b[k] = ZERO;
        }
        if u[(n - 1, n - 1)].norm() < tiny {
            u[(n - 1, n - 1)] = Complex64::new(tiny, 0.0);
        }
        Self {
            u,
            multipliers,
            swapped,
        }
    }

    fn solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let n = rhs.len();
        let mut y = rhs.to_vec();
        for k in 0..n - 1 {
            if self.swapped[k] {
                y.swap(k, k + 1);
            }
            let yk = y[k];
            y[k + 1] -= self.multipliers[k] * yk;
        }
        for i in (0..n).rev() {
            let row = self.u.row(i);
            let mut acc = y[i];
            for j in i + 1..n {
                acc -= row[j] * y[j];
            }
            y[i] = acc / row[i];
        }
        y
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{assert_multiset_close, random_matrix};
    use crate::eig::hessenberg_reduce;
    use crate::matrix::ONE;

    #[test]
    fn upper_triangular_needs_no_sweeps() {
        let t = CMatrix::from_fn(5, 5, |i, j| {
            if i <= j {
                Complex64::new(i as f64 + 1.0, j as f64 - 2.0)
            } else {
                ZERO
            }
        });
        let res = qr_eigenvalues(&t, DEFAULT_DEFLATION_TOL, 500).unwrap();
        assert_eq!(res.iterations, 0);
        assert_multiset_close(&res.eigenvalues, &t.diagonal(), 0.0);
    }

    #[test]
    fn companion_of_z_cubed_minus_one() {
        // companion matrix of z^3 - 1
        let mut c = CMatrix::zeros(3, 3);
        c[(0, 2)] = ONE;
        c[(1, 0)] = ONE;
        c[(2, 1)] = ONE;
        let res = qr_eigenvalues(&c, DEFAULT_DEFLATION_TOL, 300).unwrap();
        let roots: Vec<Complex64> = (0..3)
            .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 3.0))
            .collect();
        assert_multiset_close(&res.eigenvalues, &roots, 1e-10);
    }

    #[test]
    fn two_by_two_small_root_is_accurate() {
        let (a, b) = two_by_two_eigenvalues(
            Complex64::new(1e8, 0.0),
            ONE,
            Complex64::new(1e-8, 0.0),
            Complex64::new(1.0, 0.0),
        );
        let small = if a.norm() < b.norm() { a } else { b };
        // det = 1e8 - 1e-8, trace = 1e8 + 1
        assert!((small - Complex64::new(1.0 - 1e-16, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn cap_exceeded_is_reported() {
        let a = random_matrix(12, 3);
        let hs = hessenberg_reduce(&a, false);
        let err = qr_eigenvalues(&hs.h, DEFAULT_DEFLATION_TOL, 1).unwrap_err();
        assert!(matches!(err, EigError::ConvergenceFailure { .. }));
    }

    #[test]
    fn residual_probe_small_at_eigenvalue() {
        let a = random_matrix(20, 8);
        let hs = hessenberg_reduce(&a, false);
        let res = qr_eigenvalues(&hs.h, DEFAULT_DEFLATION_TOL, 2000).unwrap();
        for &z in &res.eigenvalues {
            assert!(residual_probe(&hs.h, z) < 1e-10 * hs.h.frobenius_norm());
        }
        // far from the spectrum the probe is not small
        assert!(residual_probe(&hs.h, Complex64::new(100.0, 0.0)) > 1.0);
    }
}
