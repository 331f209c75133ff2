//! Numerical laboratory for non-selfadjoint perturbations `-h²Δ + iεq` of the
//! flat-torus Laplacian.
//!
//! * [`symbol`]: band-limited random symbols `q = q₀ + q₁ξ + q₂η`.
//! * [`classical`]: torus averages, rational directions, `Q∞` intervals,
//!   finite-time flow averages and the leading cohomological equation.
//! * [`spectral`]: Fourier mode shells, the shell matrix and its spectrum.
//! * [`model1d`]: one-dimensional model operators, low-lying spectra and
//!   smallest-singular-value resolvent scans.
//! * [`asymptotics`]: harmonic eigenvalue ladders, lattice predictions near
//!   rational tori and matching against computed spectra.
//! * [`eig`]: dense complex eigenvalues and smallest singular values.
//! * [`io`] and [`pipeline`]: text formats and end-to-end experiment stages.

pub mod asymptotics;
pub mod classical;
pub mod eig;
pub mod io;
pub mod matrix;
pub mod model1d;
pub mod pipeline;
pub mod spectral;
pub mod symbol;

#[cfg(test)]
pub(crate) mod testutil;

pub use matrix::CMatrix;
pub use num_complex::Complex64;
