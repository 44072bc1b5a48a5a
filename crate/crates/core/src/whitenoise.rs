//! White noise tests built on the spectral distance Q̂_n².
//!
//! The raw statistic studentizes Q̂_n² by its null mean and variance,
//!
//! ```text
//! T_n = (2⁻¹ n Q̂_n² - σ̂_n⁴ C_n(k)) / (‖Ĉ_n(0)‖₂² √(2 D_n(k))),
//! ```
//!
//! and is asymptotically standard normal under white noise; the test
//! rejects for large T_n with p-value 1 - Φ(T_n). The power transform
//! T_n^β applies x ↦ x^β to the studentized distance with a second-order
//! mean correction, reducing the finite-sample skewness of T_n; β = 1
//! recovers T_n itself. `beta_one_star` and `beta_hat_star` compute the
//! exponents that annihilate the leading skewness term.

use statrs::function::erf::erfc;

use crate::autocov::{lag_norms, moment_estimates, trace_lags, LagNorms, MomentEstimates};
use crate::error::{Error, Result};
use crate::fspace::{gram, FunctionalSample};
use crate::kernels::Kernel;
use crate::spectral::q_hat_sq;

/// Outcome of a white noise test: the standardized statistic and the
/// one-sided upper-tail p-value.
#[derive(Debug, Clone)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub q_hat_sq: f64,
    pub kernel: Kernel,
    pub bandwidth: f64,
    /// Power-transform exponent; `None` for the raw statistic.
    pub beta: Option<f64>,
    pub n: usize,
}

/// Upper tail of the standard normal, 1 - Φ(t), via erfc for precision
/// deep in the tail.
pub fn upper_tail_p(t: f64) -> f64 {
    0.5 * erfc(t / std::f64::consts::SQRT_2)
}

fn validate_n(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::InsufficientData { needed: 3, got: n });
    }
    Ok(())
}

fn validate_scale(sigma2: f64, mu2: f64) -> Result<()> {
    if !(sigma2 > 0.0) || !(mu2 > 0.0) {
        return Err(Error::DegenerateSample(
            "sample has no covariance scale: sigma2 or ||C(0)|| vanishes".into(),
        ));
    }
    Ok(())
}

/// Raw statistic from precomputed lag norms and the scale estimates
/// σ̂² and μ₂ = ‖Ĉ_n(0)‖₂²; the entry point for Monte Carlo loops that
/// reuse one Gram matrix across statistics.
pub fn t_stat_from_parts(
    n: usize,
    lagnorms: &LagNorms,
    sigma2: f64,
    mu2: f64,
    kernel: Kernel,
    p: f64,
) -> Result<TestResult> {
    validate_n(n)?;
    validate_scale(sigma2, mu2)?;
    let q2 = q_hat_sq(lagnorms, kernel, p)?;
    let cn = kernel.cn(n, p);
    let dn = kernel.dn(n, p);
    if !(dn > 0.0) {
        return Err(Error::Numerical(format!(
            "variance normalization D_n vanishes for {kernel} at bandwidth {p}"
        )));
    }
    let sigma4 = sigma2 * sigma2;
    let t = (0.5 * n as f64 * q2 - sigma4 * cn) / (mu2 * (2.0 * dn).sqrt());
    Ok(TestResult {
        statistic: t,
        p_value: upper_tail_p(t),
        q_hat_sq: q2,
        kernel,
        bandwidth: p,
        beta: None,
        n,
    })
}

/// Power-transformed statistic from precomputed parts; β = 1 delegates to
/// the raw statistic so the identity T_n^1 = T_n holds exactly.
pub fn t_stat_beta_from_parts(
    n: usize,
    lagnorms: &LagNorms,
    sigma2: f64,
    mu2: f64,
    kernel: Kernel,
    p: f64,
    beta: f64,
) -> Result<TestResult> {
    if !beta.is_finite() || beta == 0.0 {
        return Err(Error::InvalidExponent(beta));
    }
    if beta == 1.0 {
        let mut r = t_stat_from_parts(n, lagnorms, sigma2, mu2, kernel, p)?;
        r.beta = Some(1.0);
        return Ok(r);
    }
    validate_n(n)?;
    validate_scale(sigma2, mu2)?;
    let q2 = q_hat_sq(lagnorms, kernel, p)?;
    let cn = kernel.cn(n, p);
    let dn = kernel.dn(n, p);
    if !(cn > 0.0) || !(dn > 0.0) {
        return Err(Error::Numerical(format!(
            "normalizers C_n, D_n vanish for {kernel} at bandwidth {p}"
        )));
    }
    let sigma4 = sigma2 * sigma2;
    let base = 0.5 * n as f64 * q2 / sigma4;
    if base <= 0.0 && beta < 0.0 {
        return Err(Error::Numerical(
            "zero spectral distance cannot be raised to a negative exponent".into(),
        ));
    }
    let ratio = mu2 / sigma4;
    // E[X^β] ≈ C_n^β + ½β(β-1)C_n^{β-2}·Var(X) with Var(X) = 2D_n·(μ₂/σ̂⁴)²
    let mean_correction =
        cn.powf(beta) + beta * (beta - 1.0) * cn.powf(beta - 2.0) * ratio * ratio * dn;
    let scale = beta * cn.powf(beta - 1.0) * ratio * (2.0 * dn).sqrt();
    let t = (base.powf(beta) - mean_correction) / scale;
    Ok(TestResult {
        statistic: t,
        p_value: upper_tail_p(t),
        q_hat_sq: q2,
        kernel,
        bandwidth: p,
        beta: Some(beta),
        n,
    })
}

/// Scale estimates shared by every statistic: σ̂² from the Gram trace and
/// μ₂ = ‖Ĉ_n(0)‖₂² from the lag-0 norm, both O(n²) at worst.
fn sample_scales(
    sample: &FunctionalSample,
    kernel: Kernel,
    p: f64,
) -> Result<(LagNorms, f64, f64)> {
    let g = gram(sample);
    let ln = lag_norms(&g, kernel.max_nonzero_lag(sample.n(), p))?;
    let sigma2 = trace_lags(&g, 0)?[0];
    let mu2 = ln.values()[0];
    Ok((ln, sigma2, mu2))
}

/// Raw white noise statistic T_n for a functional sample.
pub fn t_stat(sample: &FunctionalSample, kernel: Kernel, p: f64) -> Result<TestResult> {
    validate_n(sample.n())?;
    let (ln, sigma2, mu2) = sample_scales(sample, kernel, p)?;
    t_stat_from_parts(sample.n(), &ln, sigma2, mu2, kernel, p)
}

/// Power-transformed white noise statistic T_n^β for a functional sample.
pub fn t_stat_beta(
    sample: &FunctionalSample,
    kernel: Kernel,
    p: f64,
    beta: f64,
) -> Result<TestResult> {
    validate_n(sample.n())?;
    let (ln, sigma2, mu2) = sample_scales(sample, kernel, p)?;
    t_stat_beta_from_parts(sample.n(), &ln, sigma2, mu2, kernel, p, beta)
}

fn weight_ratio(kernel: Kernel, n: usize, p: f64) -> Result<f64> {
    let s2 = kernel.weight_sum(n, p, 2);
    let s4 = kernel.weight_sum(n, p, 4);
    let s6 = kernel.weight_sum(n, p, 6);
    if !(s4 > 0.0) {
        return Err(Error::Numerical(format!(
            "kernel weight sums vanish for {kernel} at bandwidth {p}"
        )));
    }
    Ok(s2 * s6 / (s4 * s4))
}

/// Skewness-minimizing exponent under Gaussian white noise:
/// β₁* = 1 - (2/3)·S₂S₆/S₄² with S_r = Σ_{j=1}^{n-1} k^r(j/p).
pub fn beta_one_star(kernel: Kernel, n: usize, p: f64) -> Result<f64> {
    validate_n(n)?;
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::InvalidBandwidth(p));
    }
    Ok(1.0 - (2.0 / 3.0) * weight_ratio(kernel, n, p)?)
}

/// How the data-driven exponent turns sample moments into the skewness
/// coefficient R̂ in β̂* = 1 - R̂·S₂S₆/S₄².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BetaMode {
    /// R̂ = (2/3)·(μ̂₁'μ̂₃/μ̂₂²)², which reduces to the Gaussian scalar
    /// coefficient 2/3 when the moment ratio is one.
    #[default]
    SelfConsistent,
    /// R̂ = μ̂₁'μ̂₃/(3μ̂₂²), the uncorrected plug-in form.
    Literal,
}

/// Data-driven exponent from precomputed moment estimates.
pub fn beta_hat_star_from_parts(
    n: usize,
    moments: &MomentEstimates,
    kernel: Kernel,
    p: f64,
    mode: BetaMode,
) -> Result<f64> {
    validate_n(n)?;
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::InvalidBandwidth(p));
    }
    validate_scale(moments.sigma2, moments.mu2)?;
    let ratio = moments.mu1 * moments.mu3 / (moments.mu2 * moments.mu2);
    let r_hat = match mode {
        BetaMode::SelfConsistent => (2.0 / 3.0) * ratio * ratio,
        BetaMode::Literal => ratio / 3.0,
    };
    Ok(1.0 - r_hat * weight_ratio(kernel, n, p)?)
}

/// Data-driven skewness-minimizing exponent β̂* for a functional sample.
pub fn beta_hat_star(
    sample: &FunctionalSample,
    kernel: Kernel,
    p: f64,
    mode: BetaMode,
) -> Result<f64> {
    let moments = moment_estimates(&gram(sample));
    beta_hat_star_from_parts(sample.n(), &moments, kernel, p, mode)
}
