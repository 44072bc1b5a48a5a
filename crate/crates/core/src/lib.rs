//! White noise tests for functional time series.
//!
//! A sample of curves u_1, ..., u_n observed on a common grid in (0, 1] is
//! tested for serial independence through the distance between a kernel
//! lag-window estimate of the spectral density operator and its value under
//! the white noise hypothesis. The squared distance aggregates weighted
//! Hilbert-Schmidt norms of empirical autocovariance operators,
//!
//! ```text
//! Q̂_n² = 2 Σ_{j≥1} k²(j/p_n) ‖Ĉ_n(j)‖₂²,
//! ```
//!
//! which after centering and scaling is asymptotically standard normal. The
//! crate provides the statistic, a skewness-reducing power transform of it,
//! analytic and data-driven transform exponents, a plug-in bandwidth
//! selector, simulators for three reference processes, and a seeded Monte
//! Carlo harness for size/power studies.
//!
//! Everything is computed from the n x n Gram matrix of the curves; the
//! m x m operator matrices are never materialized outside of diagnostics.

// Validation guards are written `!(x > 0.0)` on purpose: the negated
// comparison also rejects NaN, which `x <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod autocov;
pub mod bandwidth;
pub mod dgp;
pub mod error;
pub mod fspace;
pub mod kernels;
pub mod montecarlo;
pub mod spectral;
pub mod whitenoise;

pub use error::{Error, Result};
