//! Oracles shared by the integration tests: dense elimination, explicit
//! inverses and seeded random matrices.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torspec_core::CMatrix;

pub fn random_matrix(n: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// Unitary matrix from modified Gram–Schmidt on the columns of a random matrix.
pub fn random_unitary(n: usize, seed: u64) -> CMatrix {
    let a = random_matrix(n, seed);
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| (0..n).map(|i| a[(i, j)]).collect()).collect();
    for j in 0..n {
        for p in 0..j {
            let (done, rest) = cols.split_at_mut(j);
            let dot: Complex64 = done[p].iter().zip(&rest[0]).map(|(u, v)| u.conj() * v).sum();
            for (v, u) in rest[0].iter_mut().zip(&done[p]) {
                *v -= dot * u;
            }
        }
        let nrm = cols[j].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        for v in &mut cols[j] {
            *v /= nrm;
        }
    }
    CMatrix::from_fn(n, n, |i, j| cols[j][i])
}

pub fn random_permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        p.swap(i, j);
    }
    p
}

/// LU factorization with partial pivoting, `PA = LU` packed in one matrix.
pub struct Lu {
    lu: Vec<Vec<Complex64>>,
    perm: Vec<usize>,
    swaps: usize,
}

impl Lu {
    pub fn new(a: &CMatrix) -> Self {
        let n = a.nrows();
        let mut lu: Vec<Vec<Complex64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        for k in 0..n {
            let p = (k..n).max_by(|&x, &y| lu[x][k].norm().total_cmp(&lu[y][k].norm())).unwrap();
            if p != k {
                lu.swap(p, k);
                perm.swap(p, k);
                swaps += 1;
            }
            let piv = lu[k][k];
            if piv.norm() == 0.0 {
                continue;
            }
            for i in k + 1..n {
                let f = lu[i][k] / piv;
                lu[i][k] = f;
                let (top, rest) = lu.split_at_mut(i);
                for (x, t) in rest[0][k + 1..].iter_mut().zip(&top[k][k + 1..]) {
                    *x -= f * t;
                }
            }
        }
        Self { lu, perm, swaps }
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.len();
        let mut y: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let t = y[j];
                y[i] -= self.lu[i][j] * t;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let t = y[j];
                y[i] -= self.lu[i][j] * t;
            }
            y[i] /= self.lu[i][i];
        }
        y
    }

    /// `(ln|det A|, arg det A)` with the argument in `(−π, π]`.
    pub fn log_det(&self) -> (f64, f64) {
        let mut lm = 0.0;
        let mut arg = if self.swaps % 2 == 1 { std::f64::consts::PI } else { 0.0 };
        for (i, row) in self.lu.iter().enumerate() {
            lm += row[i].norm().ln();
            arg += row[i].arg();
        }
        (lm, wrap(arg))
    }
}

pub fn wrap(a: f64) -> f64 {
    let t = std::f64::consts::TAU;
    let r = a.rem_euclid(t);
    if r > std::f64::consts::PI {
        r - t
    } else {
        r
    }
}

pub fn inverse(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let lu = Lu::new(a);
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[j] = Complex64::new(1.0, 0.0);
        cols.push(lu.solve(&e));
    }
    CMatrix::from_fn(n, n, |i, j| cols[j][i])
}

/// `‖B‖₂` by power iteration on `B*B`.
pub fn spectral_norm(b: &CMatrix, iters: usize) -> f64 {
    let n = b.ncols();
    let bh = b.adjoint();
    let mut v: Vec<Complex64> = (0..n).map(|i| Complex64::new(1.0 + i as f64 * 0.37, 0.5)).collect();
    let mut sigma = 0.0;
    for _ in 0..iters {
        let w = bh.matvec(&b.matvec(&v));
        let nrm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        sigma = nrm.sqrt();
        v = w.into_iter().map(|z| z / nrm).collect();
    }
    sigma
}

/// Greedy nearest pairing; panics if any pair is further apart than `tol`.
pub fn assert_multiset_close(a: &[Complex64], b: &[Complex64], tol: f64) {
    assert_eq!(a.len(), b.len(), "multiset sizes differ");
    let mut used = vec![false; b.len()];
    for &x in a {
        let (idx, dist) = b
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, &y)| (i, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        assert!(dist <= tol, "no partner for {x} within {tol} (closest {dist})");
        used[idx] = true;
    }
}
