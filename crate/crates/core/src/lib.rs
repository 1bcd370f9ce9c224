//! Approximation of fractional derivatives of the Gaussian and of Dawson's
//! integral by weighted sums of complex-scaled Gaussian/Dawson pairs.
//!
//! The target is `f_{a,σ}(t) = G_{a,σ}(t) + i·H[G_{a,σ}](t)`, the order-`a`
//! derivative (lower limit `-∞`) of `e^{-t²/(2σ²)}` plus `i` times its
//! Hilbert transform. It is approximated by `Σ α_m g(γ_m t)` with the
//! kernel `g(z) = e^{-z²} + i(2/√π)F(z)`, where `(α_m, γ_m)` solve a power
//! moment problem `h_n ≈ Σ α_m γ_m^n`.
//!
//! Module map:
//! - [`special_fn`]: Γ, ψ, Dawson's integral, the Faddeeva function and `g`.
//! - [`moments`]: the three moment sequences.
//! - [`momentsolve`]: Hankel/matrix-pencil solver and the [`ExponentialSum`] type.
//! - [`fracgauss`]: evaluation, quadrature oracles, spectra and L2 errors.
//! - [`dawson_approx`]: sinc/cosinc fit, rational Dawson approximation, bounds.
//! - [`cli`]: the `fracgauss` command-line front end.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dawson_approx;
mod error;
mod extended;
pub mod fracgauss;
pub mod io;
pub mod moments;
pub mod momentsolve;
pub mod quadrature;
pub mod special_fn;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use dawson_approx::DawsonRational;
pub use fracgauss::{ComplexGrid, ErrorReport, FracApprox};
pub use moments::{FracParams, MomentSequence};
pub use momentsolve::{ExponentialSum, SolveReport};
