//! Empirical autocovariance operators through the Gram matrix.
//!
//! The lag-j autocovariance operator estimate is
//! Ĉ_n(j) = n⁻¹ Σ_{t=j+1}^n u_t ⊗ u_{t-j}. Its squared Hilbert-Schmidt norm
//! never requires the m x m operator: since ⟨a⊗b, c⊗d⟩ = ⟨a,c⟩⟨b,d⟩,
//!
//! ```text
//! ‖Ĉ_n(j)‖₂² = n⁻² Σ_{s,t=j+1}^n G[t,s] G[t-j,s-j],
//! ```
//!
//! an O(n²) sum per lag independent of grid resolution. The same matrix
//! yields trace Ĉ_n(j) = n⁻¹ Σ_t G[t,t-j] and the trace-power moment
//! estimates μ̂₁' = n⁻¹ tr G, μ̂₂ = n⁻² ΣG², μ̂₃ = n⁻³ tr G³ feeding the
//! data-driven transform exponent.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fspace::GramMatrix;

/// Squared Hilbert-Schmidt norms ‖Ĉ_n(j)‖₂² for j = 0..=max_lag.
#[derive(Debug, Clone, PartialEq)]
pub struct LagNorms {
    values: Vec<f64>,
    n: usize,
}

impl LagNorms {
    /// Entry j is ‖Ĉ_n(j)‖₂².
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_lag(&self) -> usize {
        self.values.len() - 1
    }
}

/// Plug-in moments of the lag-zero covariance spectrum; μ̂₁' doubles as the
/// variance estimate σ̂_n².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimates {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub sigma2: f64,
}

fn lag_product_sum(g: &GramMatrix, j: usize) -> f64 {
    let n = g.n();
    let m = g.matrix();
    let mut acc = 0.0;
    for s in j..n {
        for t in j..n {
            acc += m[(t, s)] * m[(t - j, s - j)];
        }
    }
    acc
}

/// All lag norms up to max_lag; lags are independent and run in parallel
/// with a fixed summation order inside each lag.
pub fn lag_norms(g: &GramMatrix, max_lag: usize) -> Result<LagNorms> {
    let n = g.n();
    if max_lag >= n {
        return Err(Error::LagOutOfRange { lag: max_lag, n });
    }
    let n2 = (n * n) as f64;
    let values: Vec<f64> = (0..=max_lag)
        .into_par_iter()
        .map(|j| lag_product_sum(g, j) / n2)
        .collect();
    Ok(LagNorms { values, n })
}

/// ‖Ĉ_n(0)‖₂² = n⁻² Σ_{s,t} `G[s,t]`², the statistic's denominator scale.
pub fn cov0_hs_norm_sq(g: &GramMatrix) -> f64 {
    lag_product_sum(g, 0) / (g.n() * g.n()) as f64
}

/// trace Ĉ_n(j) = n⁻¹ Σ_{t=j+1}^n G[t,t-j] for j = 0..=max_lag.
pub fn trace_lags(g: &GramMatrix, max_lag: usize) -> Result<Vec<f64>> {
    let n = g.n();
    if max_lag >= n {
        return Err(Error::LagOutOfRange { lag: max_lag, n });
    }
    let m = g.matrix();
    Ok((0..=max_lag)
        .map(|j| (j..n).map(|t| m[(t, t - j)]).sum::<f64>() / n as f64)
        .collect())
}

/// Trace-power moments of the Gram matrix; tr G³ is one n x n product.
pub fn moment_estimates(g: &GramMatrix) -> MomentEstimates {
    let n = g.n();
    let nf = n as f64;
    let m = g.matrix();
    let mu1 = m.trace() / nf;
    let mu2 = cov0_hs_norm_sq(g);
    let g2 = m * m;
    let mut tr3 = 0.0;
    for s in 0..n {
        for t in 0..n {
            tr3 += g2[(t, s)] * m[(s, t)];
        }
    }
    let mu3 = tr3 / (nf * nf * nf);
    MomentEstimates {
        mu1,
        mu2,
        mu3,
        sigma2: mu1,
    }
}
