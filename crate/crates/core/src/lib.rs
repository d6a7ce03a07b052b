//! Explicit oscillating counterexamples for the Wiener–Ikehara and
//! Ingham–Karamata theorems, evaluated numerically.
//!
//! The pipeline is:
//!
//! 1. [`rate`]: a decay rate `ρ`, its non-increasing envelope `ρ̃` and the
//!    growth target `ω(x) = min(√x, 1/ρ̃(√x))`.
//! 2. [`smoothing`]: the Poisson-smoothed growth function `W` with its
//!    derivatives, `V = W + xW'`, the phase `φ(x) = xW(x)` and the analytic
//!    extension of `W` to the right half-plane.
//! 3. [`oscillatory`]: phase-partitioned quadrature of `T(x) = ∫₀ˣ eᵘ cos φ(u) du`,
//!    the tail integral `τ(x)` and the direct Laplace integral `F(s)`.
//! 4. [`continuation`]: deformed-contour evaluation of `F(s)` for every
//!    `s ∈ ℂ`, and the derived transforms `L{cos φ}`, `L{dS}`, `L{τ}`.
//! 5. [`counterexample`]: the functions `S` and `τ`, their Ω± witnesses and the
//!    verification battery producing a [`report::VerificationReport`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod continuation;
pub mod counterexample;
pub mod error;
pub mod oscillatory;
mod par;
pub mod quadrature;
pub mod rate;
pub mod report;
pub mod roots;
pub mod smoothing;
pub mod summation;

pub use error::{Error, Result};
pub use num_complex::Complex64;
