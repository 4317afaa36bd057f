//! Formal and numerical machinery for a bilateral theta function: a single
//! analytic expression that reproduces Ramanujan's third-order mock theta
//! function `f(q)` for `|q| < 1` and the partial theta function `2ψ(1/q)` for
//! `|q| > 1`.
//!
//! The crate is split along the ingredients of that construction:
//!
//! - [`qseries`]: exact truncated Puiseux series with rational coefficients and
//!   constructors for every q-series involved (f, f₂, ψ, A±, Φ, Φ*, F±).
//! - [`arith`]: sawtooth, Dedekind sums, the eta multiplier ω_{h,k},
//!   Kronecker symbols and Kloosterman-like sums.
//! - [`special`]: arbitrary precision complex numbers, order-1/2 Bessel
//!   functions, Γ(1/2, x) and the Laplace/Laurent kernels.
//! - [`rademacher`]: the exact coefficient formulas α(n) and α̃(n).
//! - [`bilateral`]: contour quadrature for Φ_{d,k} and evaluation of F(z).
//! - [`maasswrt`]: the harmonic Maass completion, Eichler integrals and the
//!   radial-limit tooling for the WRT-invariant q-series.
//!
//! Every floating point quantity is carried by [`rug::Float`] at an explicit
//! precision; nothing in the crate draws random numbers, so results are
//! reproducible bit-for-bit at a fixed precision.

pub mod arith;
pub mod bilateral;
pub mod error;
pub mod maasswrt;
pub mod qseries;
pub mod rademacher;
pub mod special;

pub use error::{Error, Result};
pub use special::BigComplex;

/// Working precision (bits) used when callers do not choose one.
pub const DEFAULT_PRECISION: u32 = 256;

/// Lowest precision accepted anywhere in the crate.
pub const MIN_PRECISION: u32 = 64;
