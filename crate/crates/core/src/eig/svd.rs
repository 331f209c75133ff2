use num_complex::Complex64;

use crate::matrix::{CMatrix, ZERO};

/// Householder reduction of a square matrix to upper bidiagonal form.
///
/// Returns the moduli of the diagonal and superdiagonal; a diagonal unitary
/// scaling makes any complex bidiagonal matrix real and nonnegative without
/// changing its singular values.
pub fn bidiagonalize(a: &CMatrix) -> (Vec<f64>, Vec<f64>) {
    assert!(a.is_square(), "bidiagonalize needs a square matrix");
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = vec![ZERO; n];
    let mut w = vec![ZERO; n];
    let mut diag = Vec::with_capacity(n);
    let mut sup = Vec::with_capacity(n.saturating_sub(1));

    for k in 0..n {
        // left reflector on column k, rows k..n
        let len = n - k;
        let x: Vec<Complex64> = (k..n).map(|i| m[(i, k)]).collect();
        if let Some((alpha, beta)) = reflector(&x, &mut v[..len]) {
            let v = &v[..len];
            w[k..].fill(ZERO);
            for (i, vi) in v.iter().enumerate() {
                let c = vi.conj();
                let row = m.row(k + i);
                for j in k..n {
                    w[j] += c * row[j];
                }
            }
            for (i, vi) in v.iter().enumerate() {
                let f = vi * beta;
                let row = m.row_mut(k + i);
                for j in k..n {
                    row[j] -= f * w[j];
                }
            }
            m[(k, k)] = alpha;
            for i in k + 1..n {
                m[(i, k)] = ZERO;
            }
        }
        diag.push(m[(k, k)].norm());

        if k + 1 >= n {
            break;
        }
        // right reflector on row k, columns k+1..n
        let len = n - k - 1;
        let x: Vec<Complex64> = m.row(k)[k + 1..].iter().map(|z| z.conj()).collect();
        if let Some((alpha, beta)) = reflector(&x, &mut v[..len]) {
            let v = &v[..len];
            for i in k..n {
                let row = &mut m.row_mut(i)[k + 1..];
                let s: Complex64 = row.iter().zip(v).map(|(a, b)| a * b).sum();
                let f = s * beta;
                for (r, vj) in row.iter_mut().zip(v) {
                    *r -= f * vj.conj();
                }
            }
            m[(k, k + 1)] = alpha.conj();
            for j in k + 2..n {
                m[(k, j)] = ZERO;
            }
        }
        sup.push(m[(k, k + 1)].norm());
    }
    (diag, sup)
}

/// Householder vector `v` with `(I − β v v*) x = α e₁`; `None` when `x` is
/// already a multiple of `e₁`.
fn reflector(x: &[Complex64], v: &mut [Complex64]) -> Option<(Complex64, f64)> {
    let tail: f64 = x[1..].iter().map(|z| z.norm_sqr()).sum();
    if tail == 0.0 {
        return None;
    }
    let x0 = x[0];
    let norm = (x0.norm_sqr() + tail).sqrt();
    let phase = if x0.norm() == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        x0 / x0.norm()
    };
    let alpha = -phase * norm;
    v[0] = x0 - alpha;
    v[1..].copy_from_slice(&x[1..]);
    let vn: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    Some((alpha, 2.0 / vn))
}

/// Number of singular values of the bidiagonal `(d, e)` strictly below `x`,
/// via a Sturm count on the Golub–Kahan tridiagonal.
fn count_below(d: &[f64], e: &[f64], x: f64) -> usize {
    let n = d.len();
    let tiny = f64::MIN_POSITIVE / f64::EPSILON;
    let mut negatives = 0usize;
    let mut q = -x;
    if q < 0.0 {
        negatives += 1;
    }
    for i in 1..2 * n {
        let b = if i % 2 == 1 { d[i / 2] } else { e[i / 2 - 1] };
        let prev = if q == 0.0 { -tiny } else { q };
        q = -x - b * b / prev;
        if q == 0.0 {
            q = -tiny;
        }
        if q < 0.0 {
            negatives += 1;
        }
    }
    negatives.saturating_sub(n)
}

/// Bisection for the `k`-th smallest singular value (0-based) of `(d, e)`.
fn bisect(d: &[f64], e: &[f64], k: usize) -> f64 {
    let mut hi = d
        .iter()
        .chain(e.iter())
        .fold(0.0_f64, |m, &v| m.max(v))
        * 2.0
        + f64::MIN_POSITIVE;
    let mut lo = 0.0;
    for _ in 0..4000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        if count_below(d, e, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Smallest singular value of a square matrix.
pub fn singular_min(a: &CMatrix) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    let (d, e) = bidiagonalize(a);
    bisect(&d, &e, 0)
}

/// All singular values in ascending order.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    let (d, e) = bidiagonalize(a);
    (0..d.len()).map(|k| bisect(&d, &e, k)).collect()
}
