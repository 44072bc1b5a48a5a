//! Data-driven bandwidth selection for the lag-window estimator.
//!
//! The plug-in rule minimizes the asymptotic integrated mean squared error
//! of F̂_n. With kernel order q and curvature ξ = lim (1-k(x))/|x|^q, the
//! optimal rate constant is
//!
//! ```text
//! ĉ_q^{2q+1} = 2q ξ² I_Fq / (∫k² · (I_F + I_tr)),    p̂ = ĉ_q n^{1/(2q+1)},
//! ```
//!
//! where I_F, I_Fq, I_tr are the frequency-domain integrals of the pilot
//! estimate, its q-th derivative, and its trace. Pilot bandwidths
//! n^{1/(2q+1)} and 4n^{1/(2q+1)} feed the level and derivative integrals.
//! The result is clamped to [2, n/4] so downstream statistics always see a
//! workable window.

use crate::autocov::{lag_norms, trace_lags, LagNorms};
use crate::error::{Error, Result};
use crate::fspace::{gram, FunctionalSample};
use crate::kernels::Kernel;
use crate::spectral::parseval_integrals;

/// Outcome of adaptive bandwidth selection, with the intermediate
/// quantities exposed for diagnostics.
#[derive(Debug, Clone)]
pub struct BandwidthResult {
    pub kernel: Kernel,
    pub n: usize,
    /// Pilot bandwidth for the level integrals I_F and I_tr.
    pub pilot_p0: f64,
    /// Pilot bandwidth for the derivative integral I_Fq.
    pub pilot_pq: f64,
    pub i_f: f64,
    pub i_fq: f64,
    pub i_tr: f64,
    /// Estimated rate constant ĉ_q.
    pub c_q: f64,
    /// ĉ_q n^{1/(2q+1)} before clamping.
    pub p_raw: f64,
    /// Selected bandwidth, clamped to [2, n/4].
    pub p: f64,
    pub clamped: bool,
}

/// Rate-optimal deterministic bandwidth n^{1/(2q+1)}; the truncated
/// kernel, which has no finite order, uses n^{1/3} by convention.
pub fn fixed_bandwidth(kernel: Kernel, n: usize) -> f64 {
    let exponent = match kernel.constants() {
        Ok(c) => 1.0 / (2.0 * c.order_q as f64 + 1.0),
        Err(_) => 1.0 / 3.0,
    };
    (n as f64).powf(exponent)
}

/// Selection rule from precomputed lag statistics; `lagnorms` and
/// `traces` must cover every lag the larger pilot window can see.
pub fn adaptive_bandwidth_from_parts(
    n: usize,
    lagnorms: &LagNorms,
    traces: &[f64],
    kernel: Kernel,
) -> Result<BandwidthResult> {
    let constants = kernel.constants()?;
    if n < 3 {
        return Err(Error::InsufficientData { needed: 3, got: n });
    }
    let q = constants.order_q;
    let rate = 1.0 / (2.0 * q as f64 + 1.0);
    let pilot_p0 = (n as f64).powf(rate);
    let pilot_pq = 4.0 * pilot_p0;

    let (i_f, _, i_tr) = parseval_integrals(lagnorms, traces, kernel, pilot_p0, q)?;
    let (_, i_fq, _) = parseval_integrals(lagnorms, traces, kernel, pilot_pq, q)?;

    let denom = kernel.int_k2() * (i_f + i_tr);
    if !(denom > 0.0) {
        return Err(Error::DegenerateSample(
            "pilot spectral mass vanishes: cannot calibrate a bandwidth".into(),
        ));
    }
    let c_pow = 2.0 * q as f64 * constants.xi * constants.xi * i_fq / denom;
    let c_q = c_pow.powf(rate);
    let p_raw = c_q * (n as f64).powf(rate);
    let upper = (n as f64 / 4.0).max(2.0);
    let p = p_raw.clamp(2.0, upper);
    Ok(BandwidthResult {
        kernel,
        n,
        pilot_p0,
        pilot_pq,
        i_f,
        i_fq,
        i_tr,
        c_q,
        p_raw,
        p,
        clamped: p != p_raw,
    })
}

/// Select the bandwidth for `kernel` from the sample itself.
pub fn adaptive_bandwidth(sample: &FunctionalSample, kernel: Kernel) -> Result<BandwidthResult> {
    let constants = kernel.constants()?;
    let n = sample.n();
    let rate = 1.0 / (2.0 * constants.order_q as f64 + 1.0);
    let pilot_pq = 4.0 * (n as f64).powf(rate);
    let max_lag = kernel.max_nonzero_lag(n, pilot_pq);
    let g = gram(sample);
    let ln = lag_norms(&g, max_lag)?;
    let tl = trace_lags(&g, max_lag)?;
    adaptive_bandwidth_from_parts(n, &ln, &tl, kernel)
}
