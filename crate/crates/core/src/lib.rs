//! Forward and inverse spectral analysis of first-order integro-differential
//! operators
//!
//! ```text
//! i y'(x) + ∫₀ˣ M(x,t) y(t) dt = λ y(x),   x ∈ [0, π],   y(π) = 0.
//! ```
//!
//! The crate is `no_std` (it needs `alloc`) and covers the numerical core:
//!
//! * [`quadrature`]: the uniform grid on `[0, π]`, sampled profiles and
//!   triangular fields, composite trapezoid sums.
//! * [`kernels`]: convolution-structured kernels `M₀ + Σ Rⱼ(x,t) Pⱼ(x−t)` and
//!   the weight `B(x) = ∫₀ˣ R(π−t, x−t) dt`.
//! * [`transform`]: the transformation-operator kernel `G(x,t)` built by
//!   successive approximations, plus the kernel `K` of the `z` decomposition.
//! * [`spectral`]: solutions `e`, `ψ`, `w`, `z`, the characteristic function
//!   `Δ(λ) = e(π, λ)` and the eigenvalue search.
//! * [`inverse`]: recovery of unknown profiles from spectra and numerical
//!   checks of the integral identities linking two kernels.
//!
//! File formats and the command-line tool live in the `volspec` crate.
#![no_std]

extern crate alloc;

#[cfg(any(test, feature = "std"))]
extern crate std;

mod error;
pub mod inverse;
pub mod kernels;
pub mod quadrature;
pub mod spectral;
pub mod transform;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use quadrature::{Grid, Profile, TriangularField};

/// The imaginary unit.
pub const I: Complex64 = Complex64::new(0.0, 1.0);
