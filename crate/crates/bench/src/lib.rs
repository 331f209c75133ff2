//! Benchmark inputs shared by the criterion targets.

use torspec_core::spectral::{assemble_matrix, build_mode_shell, ShellMatrix};
use torspec_core::symbol::generate_random_symbol;
use torspec_core::{CMatrix, Complex64};

/// Shell matrix of a random `(F, κ) = (2, 2)` symbol on `[0.85, 1]`, `ε = 2h`.
pub fn shell_case(h: f64) -> ShellMatrix {
    let q = generate_random_symbol(2, 2.0, 1).unwrap();
    let shell = build_mode_shell(h, 0.85, 1.0).unwrap();
    assemble_matrix(&q, &shell, 2.0 * h).unwrap()
}

/// Dense matrix with entries from a fixed linear congruential sequence.
pub fn lcg_matrix(n: usize, seed: u64) -> CMatrix {
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = move || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (s >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    CMatrix::from_fn(n, n, |_, _| Complex64::new(next(), next()))
}
