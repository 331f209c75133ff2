use num_complex::Complex64;

use crate::matrix::{CMatrix, ZERO};

/// Upper Hessenberg form `H = Q^* A Q`.
#[derive(Debug, Clone)]
pub struct Hessenberg {
    pub h: CMatrix,
    /// The accumulated unitary `Q`, when requested.
    pub q: Option<CMatrix>,
}

/// Householder reduction of a square matrix to upper Hessenberg form.
///
/// Columns whose subdiagonal part below the first entry already vanishes are
/// skipped, so banded Hessenberg inputs (e.g. tridiagonal) cost `O(n^2)`.
pub fn hessenberg_reduce(a: &CMatrix, accumulate_q: bool) -> Hessenberg {
    assert!(a.is_square(), "hessenberg_reduce needs a square matrix");
    let n = a.nrows();
    let mut h = a.clone();
    let mut q = accumulate_q.then(|| CMatrix::identity(n));
    let mut v = vec![ZERO; n];
    let mut w = vec![ZERO; n];

    for k in 0..n.saturating_sub(2) {
        let tail_sq: f64 = (k + 2..n).map(|i| h[(i, k)].norm_sqr()).sum();
        if tail_sq == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let norm = (x0.norm_sqr() + tail_sq).sqrt();
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;
        // v = x - alpha e1, over rows k+1..n
        let m = n - k - 1;
        let v = &mut v[..m];
        v[0] = x0 - alpha;
        for i in 1..m {
            v[i] = h[(k + 1 + i, k)];
        }
        let vnorm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let beta = 2.0 / vnorm_sq;

        // left: rows k+1.., columns k..n
        let w = &mut w[..n];
        w[k..].fill(ZERO);
        for (i, vi) in v.iter().enumerate() {
            let c = vi.conj();
            let row = h.row(k + 1 + i);
            for j in k..n {
                w[j] += c * row[j];
            }
        }
        for (i, vi) in v.iter().enumerate() {
            let f = vi * beta;
            let row = h.row_mut(k + 1 + i);
            for j in k..n {
                row[j] -= f * w[j];
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }

        // right: all rows, columns k+1..n
        for i in 0..n {
            let row = &mut h.row_mut(i)[k + 1..];
            let s: Complex64 = row.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
            let f = s * beta;
            for (r, vj) in row.iter_mut().zip(v.iter()) {
                *r -= f * vj.conj();
            }
        }
        if let Some(q) = q.as_mut() {
            for i in 0..n {
                let row = &mut q.row_mut(i)[k + 1..];
                let s: Complex64 = row.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
                let f = s * beta;
                for (r, vj) in row.iter_mut().zip(v.iter()) {
                    *r -= f * vj.conj();
                }
            }
        }
    }
    Hessenberg { h, q }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::random_matrix;

    fn is_upper_hessenberg(h: &CMatrix) -> bool {
        (0..h.nrows()).all(|i| (0..i.saturating_sub(1)).all(|j| h[(i, j)] == ZERO))
    }

    #[test]
    fn similarity_is_unitary_and_exact() {
        for &n in &[1usize, 2, 3, 7, 40] {
            let a = random_matrix(n, 11 + n as u64);
            let hs = hessenberg_reduce(&a, true);
            let q = hs.q.unwrap();
            assert!(is_upper_hessenberg(&hs.h));
            let back = q.adjoint().matmul(&a).matmul(&q);
            assert!(back.sub(&hs.h).frobenius_norm() <= 1e-12 * a.frobenius_norm().max(1.0) * n as f64);
            let orth = q.adjoint().matmul(&q).sub(&CMatrix::identity(n));
            assert!(orth.frobenius_norm() < 1e-12 * n as f64);
        }
    }

    #[test]
    fn trace_preserved_3x3() {
        let a = random_matrix(3, 3);
        let hs = hessenberg_reduce(&a, false);
        assert!((hs.h.trace() - a.trace()).norm() < 1e-13);
    }

    #[test]
    fn hessenberg_input_is_left_alone() {
        let a = CMatrix::from_fn(6, 6, |i, j| {
            if i <= j + 1 {
                Complex64::new((i + 2 * j) as f64, (i as f64) - 1.0)
            } else {
                ZERO
            }
        });
        let hs = hessenberg_reduce(&a, false);
        assert_eq!(hs.h, a);
    }
}
