//! Data generating processes for size and power experiments.
//!
//! Three curve-valued processes on the uniform grid t_i = i/m:
//!
//! * `iid_bm`: independent standard Brownian motions, the null model;
//! * `far1`: a functional AR(1), X_t = Ψ X_{t-1} + ε_t, with Gaussian
//!   separable kernel ψ(t,s) = c·e^{t²/2}e^{s²/2} scaled so the operator
//!   Hilbert-Schmidt norm equals a chosen S ∈ [0,1), and Brownian
//!   innovations;
//! * `fgarch11`: a functional GARCH(1,1), X_t = σ_t ε_t with
//!   σ_t² = δ + α(X²_{t-1}) + β(σ²_{t-1}), both operator kernels
//!   12·t(1-t)s(1-s), δ = 0.01, and stationary Gaussian innovations with
//!   Cov(ε(s), ε(t)) = 2^{-200|s-t|}; an uncorrelated but conditionally
//!   heteroscedastic sequence.
//!
//! All randomness flows through `RngStream`, a counter-based ChaCha stream
//! keyed by (seed, stream) so replications can be assigned to threads in
//! any order without changing their draws.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::fspace::{FunctionalSample, Grid};

/// ∫₀¹ e^{t²} dt, the squared L² norm of the FAR kernel factor e^{t²/2}.
const INT_EXP_T2: f64 = 1.4626517459071816;

/// Warm-up steps discarded before recording recursive processes.
pub const DEFAULT_BURNIN: usize = 30;

/// Volatility offset δ in the functional GARCH recursion.
pub const FGARCH_DELTA: f64 = 0.01;

/// Reproducible random stream: ChaCha8 keyed by a seed, with an
/// independent substream per (seed, stream) pair.
#[derive(Debug, Clone)]
pub struct RngStream {
    inner: ChaCha8Rng,
}

impl RngStream {
    /// Stream `stream` of the generator keyed by `seed`; distinct pairs
    /// yield statistically independent sequences.
    pub fn from_parts(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    /// One standard normal draw.
    pub fn next_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }
}

/// Process selector with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DgpSpec {
    /// Independent standard Brownian motions.
    IidBm,
    /// Functional AR(1) with operator norm `s`.
    Far1 { s: f64 },
    /// Functional GARCH(1,1).
    Fgarch11,
}

impl DgpSpec {
    pub fn validate(&self) -> Result<()> {
        if let DgpSpec::Far1 { s } = self {
            if !s.is_finite() || *s < 0.0 || *s >= 1.0 {
                return Err(Error::InvalidSpec(format!(
                    "far1 operator norm must lie in [0, 1), got {s}"
                )));
            }
        }
        Ok(())
    }
}

impl std::fmt::Display for DgpSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DgpSpec::IidBm => write!(f, "iid_bm"),
            DgpSpec::Far1 { s } => write!(f, "far1:{s}"),
            DgpSpec::Fgarch11 => write!(f, "fgarch11"),
        }
    }
}

impl std::str::FromStr for DgpSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let norm = text.trim().to_ascii_lowercase().replace('-', "_");
        let spec = match norm.as_str() {
            "iid_bm" | "iidbm" | "bm" => DgpSpec::IidBm,
            "fgarch11" | "fgarch" => DgpSpec::Fgarch11,
            other => {
                if let Some(arg) = other.strip_prefix("far1:") {
                    let s: f64 = arg.parse().map_err(|_| {
                        Error::InvalidSpec(format!("unparseable far1 norm {arg:?}"))
                    })?;
                    DgpSpec::Far1 { s }
                } else {
                    return Err(Error::InvalidSpec(format!(
                        "unknown process {text:?}; expected iid_bm, far1:<s>, or fgarch11"
                    )));
                }
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn validate_shape(n: usize, m: usize) -> Result<()> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidSpec(format!(
            "sample shape must be positive, got n = {n}, m = {m}"
        )));
    }
    Ok(())
}

/// One Brownian path on t_i = i/m: cumulative sums of N(0, 1/m) steps.
fn bm_values(m: usize, rng: &mut RngStream) -> Vec<f64> {
    let step = 1.0 / (m as f64).sqrt();
    let mut cum = 0.0;
    (0..m)
        .map(|_| {
            cum += step * rng.next_normal();
            cum
        })
        .collect()
}

/// n independent Brownian motion curves on an m-point grid.
pub fn iid_bm(n: usize, m: usize, rng: &mut RngStream) -> Result<FunctionalSample> {
    validate_shape(n, m)?;
    let rows = (0..n).map(|_| bm_values(m, rng)).collect();
    FunctionalSample::from_rows(Grid::uniform(m), rows)
}

/// Functional AR(1) with the default warm-up. A zero operator norm makes
/// warm-up pointless, so it is skipped and the draw coincides with
/// `iid_bm` stream for stream.
pub fn far1(n: usize, m: usize, s: f64, rng: &mut RngStream) -> Result<FunctionalSample> {
    let burnin = if s == 0.0 { 0 } else { DEFAULT_BURNIN };
    far1_with_burnin(n, m, s, burnin, rng)
}

/// Functional AR(1) with explicit warm-up length; `burnin` 0 and s = 0
/// reproduce `iid_bm` draw for draw.
pub fn far1_with_burnin(
    n: usize,
    m: usize,
    s: f64,
    burnin: usize,
    rng: &mut RngStream,
) -> Result<FunctionalSample> {
    validate_shape(n, m)?;
    DgpSpec::Far1 { s }.validate()?;
    let grid = Grid::uniform(m);
    let phi: Vec<f64> = grid.points().iter().map(|t| (0.5 * t * t).exp()).collect();
    let c = s / INT_EXP_T2;
    let mut x = vec![0.0; m];
    let mut rows = Vec::with_capacity(n);
    for step in 0..burnin + n {
        let eps = bm_values(m, rng);
        // Ψx for the separable kernel: one weighted sum, then a rescale
        let factor = c / m as f64 * phi.iter().zip(&x).map(|(p, v)| p * v).sum::<f64>();
        x = (0..m).map(|a| phi[a] * factor + eps[a]).collect();
        if step >= burnin {
            rows.push(x.clone());
        }
    }
    FunctionalSample::from_rows(grid, rows)
}

/// Stationary Gaussian innovation process with covariance 2^{-200|s-t|}
/// on a fixed grid; the Cholesky factor is computed once and reused.
pub struct OuProcess {
    chol: DMatrix<f64>,
    grid: Arc<Grid>,
}

impl OuProcess {
    pub fn new(grid: Arc<Grid>) -> Result<Self> {
        let m = grid.points().len();
        let mut cov = DMatrix::zeros(m, m);
        for a in 0..m {
            for b in 0..m {
                let dist = (grid.points()[a] - grid.points()[b]).abs();
                cov[(a, b)] = (-200.0 * std::f64::consts::LN_2 * dist).exp();
            }
        }
        let chol = nalgebra::Cholesky::new(cov).ok_or_else(|| {
            Error::Numerical("innovation covariance is not positive definite".into())
        })?;
        Ok(Self {
            chol: chol.l(),
            grid,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// One curve ε with the exponential covariance, via ε = L z.
    pub fn sample(&self, rng: &mut RngStream) -> Vec<f64> {
        let m = self.grid.points().len();
        let z: Vec<f64> = (0..m).map(|_| rng.next_normal()).collect();
        (0..m)
            .map(|a| (0..=a).map(|b| self.chol[(a, b)] * z[b]).sum())
            .collect()
    }
}

/// Functional GARCH(1,1) sequence; uncorrelated but not independent.
pub fn fgarch11(n: usize, m: usize, rng: &mut RngStream) -> Result<FunctionalSample> {
    fgarch11_impl(n, m, 1.0, DEFAULT_BURNIN, rng)
}

/// `scale` multiplies both operator kernels; 0 collapses the recursion to
/// iid curves √δ·ε, which the tests exploit.
fn fgarch11_impl(
    n: usize,
    m: usize,
    scale: f64,
    burnin: usize,
    rng: &mut RngStream,
) -> Result<FunctionalSample> {
    validate_shape(n, m)?;
    let grid = Grid::uniform(m);
    let ou = OuProcess::new(grid.clone())?;
    let psi: Vec<f64> = grid.points().iter().map(|t| t * (1.0 - t)).collect();
    let mut sigma2 = vec![FGARCH_DELTA; m];
    let mut x2 = vec![0.0; m];
    let mut rows = Vec::with_capacity(n);
    for step in 0..burnin + n {
        if step > 0 {
            // α = β share one kernel, so both terms ride one weighted sum
            let fac = scale * 12.0 / m as f64
                * psi
                    .iter()
                    .zip(x2.iter().zip(&sigma2))
                    .map(|(p, (a, b))| p * (a + b))
                    .sum::<f64>();
            sigma2 = psi.iter().map(|p| FGARCH_DELTA + p * fac).collect();
        }
        let eps = ou.sample(rng);
        let x: Vec<f64> = (0..m).map(|a| sigma2[a].sqrt() * eps[a]).collect();
        x2 = x.iter().map(|v| v * v).collect();
        if step >= burnin {
            rows.push(x);
        }
    }
    FunctionalSample::from_rows(grid, rows)
}

/// Draw a sample of n curves on m grid points from the selected process.
pub fn simulate(
    spec: &DgpSpec,
    n: usize,
    m: usize,
    rng: &mut RngStream,
) -> Result<FunctionalSample> {
    spec.validate()?;
    match spec {
        DgpSpec::IidBm => iid_bm(n, m, rng),
        DgpSpec::Far1 { s } => far1(n, m, *s, rng),
        DgpSpec::Fgarch11 => fgarch11(n, m, rng),
    }
}
