//! Lag-window kernels, their analytic constants, and the finite weight sums
//! C_n(k), D_n(k) that center and scale the test statistic.
//!
//! k: R -> [-1, 1] is symmetric with k(0) = 1. Near zero 1 - k(x) ~ ξ|x|^q;
//! the order q and constant ξ drive bandwidth selection, with ∫k² and
//! D(k) = ∫_0^∞ k⁴ as the remaining plug-in constants. The truncated kernel
//! has no finite ξ for any q and is excluded from bandwidth selection.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Parzen ∫_{-∞}^{∞} k², exact rational 151/280 from piecewise polynomial
/// integration; re-derived by quadrature in the test suite.
const PARZEN_INT_K2: f64 = 151.0 / 280.0;
/// Parzen D(k) = ∫_0^∞ k⁴, exact rational 122559/640640.
const PARZEN_D_K: f64 = 122559.0 / 640640.0;

/// The four supported lag-window kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kernel {
    /// 1 - |x| on [-1, 1]; order q = 1.
    Bartlett,
    /// 1 - 6x² + 6|x|³ for |x| ≤ 1/2, then 2(1 - |x|)³ up to 1; order q = 2.
    Parzen,
    /// sin(πx)/(πx) with k(0) = 1; unbounded support, order q = 2.
    Daniell,
    /// Indicator of [-1, 1]; no characteristic exponent.
    Truncated,
}

/// Constants entering the plug-in bandwidth: order q, ξ, ∫k², D(k).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConstants {
    pub order_q: u32,
    pub xi: f64,
    pub int_k2: f64,
    pub d_k: f64,
}

impl Kernel {
    pub const ALL: [Kernel; 4] = [
        Kernel::Bartlett,
        Kernel::Parzen,
        Kernel::Daniell,
        Kernel::Truncated,
    ];

    /// Evaluate k(x). Daniell switches to a 3-term Taylor polynomial for
    /// |πx| < 1e-4 to avoid cancellation in sin(πx)/(πx).
    pub fn eval(self, x: f64) -> f64 {
        let a = x.abs();
        match self {
            Kernel::Bartlett => {
                if a <= 1.0 {
                    1.0 - a
                } else {
                    0.0
                }
            }
            Kernel::Parzen => {
                if a <= 0.5 {
                    1.0 - 6.0 * a * a + 6.0 * a * a * a
                } else if a <= 1.0 {
                    let b = 1.0 - a;
                    2.0 * b * b * b
                } else {
                    0.0
                }
            }
            Kernel::Daniell => {
                let y = std::f64::consts::PI * a;
                if y < 1e-4 {
                    let y2 = y * y;
                    1.0 - y2 / 6.0 + y2 * y2 / 120.0
                } else {
                    y.sin() / y
                }
            }
            Kernel::Truncated => {
                if a <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Characteristic exponent q in 1 - k(x) ~ ξ|x|^q; none for truncated.
    pub fn order(self) -> Option<u32> {
        match self {
            Kernel::Bartlett => Some(1),
            Kernel::Parzen | Kernel::Daniell => Some(2),
            Kernel::Truncated => None,
        }
    }

    /// ξ = lim_{x→0} |x|^{-q} (1 - k(x)); none for truncated.
    pub fn xi(self) -> Option<f64> {
        match self {
            Kernel::Bartlett => Some(1.0),
            Kernel::Parzen => Some(6.0),
            Kernel::Daniell => Some(std::f64::consts::PI.powi(2) / 6.0),
            Kernel::Truncated => None,
        }
    }

    /// ∫_{-∞}^{∞} k²(x) dx.
    pub fn int_k2(self) -> f64 {
        match self {
            Kernel::Bartlett => 2.0 / 3.0,
            Kernel::Parzen => PARZEN_INT_K2,
            Kernel::Daniell => 1.0,
            Kernel::Truncated => 2.0,
        }
    }

    /// D(k) = ∫_0^∞ k⁴(x) dx, the limit of D_n(k)/p_n.
    pub fn d_k(self) -> f64 {
        match self {
            Kernel::Bartlett => 0.2,
            Kernel::Parzen => PARZEN_D_K,
            Kernel::Daniell => 1.0 / 3.0,
            Kernel::Truncated => 1.0,
        }
    }

    /// All bandwidth-selection constants; errors for the truncated kernel,
    /// which has no finite ξ.
    pub fn constants(self) -> Result<KernelConstants> {
        match (self.order(), self.xi()) {
            (Some(order_q), Some(xi)) => Ok(KernelConstants {
                order_q,
                xi,
                int_k2: self.int_k2(),
                d_k: self.d_k(),
            }),
            _ => Err(Error::UnsupportedKernel(self.to_string())),
        }
    }

    /// Largest lag j in 1..=n-1 with k(j/p) possibly nonzero. Daniell never
    /// truncates; the compact kernels vanish beyond |x| >= 1 (Bartlett,
    /// Parzen) or |x| > 1 (truncated).
    pub fn max_nonzero_lag(self, n: usize, p: f64) -> usize {
        let cap = n.saturating_sub(1);
        match self {
            Kernel::Daniell => cap,
            Kernel::Truncated => cap.min(p.floor().max(0.0) as usize),
            Kernel::Bartlett | Kernel::Parzen => {
                cap.min((p.ceil().max(0.0) as usize).saturating_sub(1))
            }
        }
    }

    /// C_n(k) = Σ_{j=1}^{n-1} (1 - j/n) k²(j/p).
    pub fn cn(self, n: usize, p: f64) -> f64 {
        let nf = n as f64;
        let mut acc = 0.0;
        for j in 1..=self.max_nonzero_lag(n, p) {
            let k = self.eval(j as f64 / p);
            acc += (1.0 - j as f64 / nf) * k * k;
        }
        acc
    }

    /// D_n(k) = Σ_{j=1}^{n-2} (1 - j/n)(1 - (j+1)/n) k⁴(j/p).
    pub fn dn(self, n: usize, p: f64) -> f64 {
        let nf = n as f64;
        let mut acc = 0.0;
        for j in 1..=self.max_nonzero_lag(n, p).min(n.saturating_sub(2)) {
            let k = self.eval(j as f64 / p);
            acc += (1.0 - j as f64 / nf) * (1.0 - (j as f64 + 1.0) / nf) * k.powi(4);
        }
        acc
    }

    /// Σ_{j=1}^{n-1} k^r(j/p) for even r, the sums entering the transform
    /// exponents β*.
    pub fn weight_sum(self, n: usize, p: f64, r: u32) -> f64 {
        let mut acc = 0.0;
        for j in 1..=self.max_nonzero_lag(n, p) {
            acc += self.eval(j as f64 / p).powi(r as i32);
        }
        acc
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kernel::Bartlett => "bartlett",
            Kernel::Parzen => "parzen",
            Kernel::Daniell => "daniell",
            Kernel::Truncated => "truncated",
        })
    }
}

impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bartlett" => Ok(Kernel::Bartlett),
            "parzen" => Ok(Kernel::Parzen),
            "daniell" => Ok(Kernel::Daniell),
            "truncated" => Ok(Kernel::Truncated),
            other => Err(Error::InvalidSpec(format!(
                "unknown kernel '{other}' (expected bartlett|parzen|daniell|truncated)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    /// Composite Simpson rule, the quadrature oracle for kernel constants.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        let mut acc = f(a) + f(b);
        for i in 1..panels {
            let x = a + i as f64 * h;
            acc += if i % 2 == 0 { 2.0 } else { 4.0 } * f(x);
        }
        acc * h / 3.0
    }

    #[test]
    fn eval_examples() {
        assert_eq!(Kernel::Bartlett.eval(0.5), 0.5);
        assert_eq!(Kernel::Parzen.eval(0.5), 0.25);
        assert_abs_diff_eq!(Kernel::Daniell.eval(1.0), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(Kernel::Daniell.eval(1e-9), 1.0, epsilon = 1e-12);
        assert_eq!(Kernel::Truncated.eval(1.0), 1.0);
        assert_eq!(Kernel::Truncated.eval(1.0000001), 0.0);
        assert_eq!(Kernel::Bartlett.eval(-0.25), 0.75);
    }

    #[test]
    fn parzen_branches_agree_at_knot() {
        let left = 1.0 - 6.0 * 0.25 + 6.0 * 0.125;
        let right = 2.0 * 0.125;
        assert_eq!(left, right);
        assert_eq!(Kernel::Parzen.eval(0.5), right);
    }

    #[test]
    fn daniell_taylor_switch_is_seamless() {
        let x = 1e-4 / std::f64::consts::PI;
        let below = Kernel::Daniell.eval(x * 0.999_999);
        let above = Kernel::Daniell.eval(x * 1.000_001);
        assert_abs_diff_eq!(below, above, epsilon = 1e-14);
    }

    #[test]
    fn constants_bartlett() {
        let c = Kernel::Bartlett.constants().unwrap();
        assert_eq!(c.order_q, 1);
        assert_eq!(c.xi, 1.0);
        assert_relative_eq!(c.int_k2, 2.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(c.d_k, 0.2, max_relative = 1e-15);
        // quadrature oracle
        let k = |x: f64| Kernel::Bartlett.eval(x);
        assert_relative_eq!(
            2.0 * simpson(|x| k(x).powi(2), 0.0, 1.0, 1000),
            c.int_k2,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            simpson(|x| k(x).powi(4), 0.0, 1.0, 1000),
            c.d_k,
            max_relative = 1e-12
        );
    }

    #[test]
    fn constants_parzen_match_quadrature() {
        let c = Kernel::Parzen.constants().unwrap();
        assert_eq!(c.order_q, 2);
        assert_eq!(c.xi, 6.0);
        let k = |x: f64| Kernel::Parzen.eval(x);
        // integrate each polynomial branch separately
        let i2 =
            simpson(|x| k(x).powi(2), 0.0, 0.5, 4000) + simpson(|x| k(x).powi(2), 0.5, 1.0, 4000);
        let i4 =
            simpson(|x| k(x).powi(4), 0.0, 0.5, 4000) + simpson(|x| k(x).powi(4), 0.5, 1.0, 4000);
        assert_relative_eq!(c.int_k2, 2.0 * i2, max_relative = 1e-10);
        assert_relative_eq!(c.d_k, i4, max_relative = 1e-10);
        assert_relative_eq!(c.int_k2, 0.539286, max_relative = 1e-5);
    }

    #[test]
    fn constants_daniell_match_quadrature() {
        let c = Kernel::Daniell.constants().unwrap();
        assert_eq!(c.order_q, 2);
        assert_relative_eq!(
            c.xi,
            std::f64::consts::PI.powi(2) / 6.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(c.xi, 1.644934, max_relative = 1e-6);
        let k = |x: f64| Kernel::Daniell.eval(x);
        // sinc² tail beyond X integrates to 1/(2π²X) + O(X⁻²) since
        // sin² = (1 - cos 2πx)/2 and the cosine part integrates by parts.
        let x_cut = 1000.0;
        let tail2 = 1.0 / (2.0 * std::f64::consts::PI.powi(2) * x_cut);
        let i2 = simpson(|x| k(x).powi(2), 0.0, x_cut, 2_000_000) + tail2;
        assert_relative_eq!(2.0 * i2, c.int_k2, max_relative = 1e-5);
        // sinc⁴ tail is below ∫ (πx)⁻⁴ = 1/(3π⁴X³), negligible at X = 1000.
        let i4 = simpson(|x| k(x).powi(4), 0.0, x_cut, 2_000_000);
        assert_relative_eq!(i4, c.d_k, max_relative = 1e-8);
    }

    #[test]
    fn constants_truncated_unsupported_for_bandwidth() {
        assert!(matches!(
            Kernel::Truncated.constants(),
            Err(Error::UnsupportedKernel(_))
        ));
        assert_eq!(Kernel::Truncated.order(), None);
        assert_eq!(Kernel::Truncated.xi(), None);
        assert_eq!(Kernel::Truncated.int_k2(), 2.0);
        assert_eq!(Kernel::Truncated.d_k(), 1.0);
    }

    #[test]
    fn cn_hand_values() {
        // bartlett n=4 p=2: only j=1 contributes, (3/4)(1/2)² = 0.1875
        assert_relative_eq!(Kernel::Bartlett.cn(4, 2.0), 0.1875, max_relative = 1e-15);
        // truncated n=10 p=3: (1 - 1/10) + (1 - 2/10) + (1 - 3/10) = 2.4
        assert_relative_eq!(Kernel::Truncated.cn(10, 3.0), 2.4, max_relative = 1e-14);
        // bartlett with p -> 0+: every weight vanishes
        assert_eq!(Kernel::Bartlett.cn(10, 1e-12), 0.0);
    }

    #[test]
    fn dn_hand_values() {
        // bartlett n=4 p=2: (3/4)(1/2)(1/2)⁴ = 0.0234375
        assert_relative_eq!(Kernel::Bartlett.dn(4, 2.0), 0.0234375, max_relative = 1e-15);
        // truncated n=10 p=3: (0.9)(0.8) + (0.8)(0.7) + (0.7)(0.6) = 1.70
        assert_relative_eq!(Kernel::Truncated.dn(10, 3.0), 1.70, max_relative = 1e-14);
    }

    #[test]
    fn dn_matches_full_sum_for_daniell() {
        // max_nonzero_lag never truncates the daniell sums
        let n = 50;
        let p = 3.0;
        let nf = n as f64;
        let mut expect = 0.0;
        for j in 1..=(n - 2) {
            let k = Kernel::Daniell.eval(j as f64 / p);
            expect += (1.0 - j as f64 / nf) * (1.0 - (j as f64 + 1.0) / nf) * k.powi(4);
        }
        assert_relative_eq!(Kernel::Daniell.dn(n, p), expect, max_relative = 1e-14);
    }

    #[test]
    fn truncated_cn_closed_form() {
        // integer p ≤ n-2: C_n = p - p(p+1)/(2n)
        for (n, p) in [(10usize, 3usize), (50, 12), (7, 5), (100, 1)] {
            let expect = p as f64 - (p * (p + 1)) as f64 / (2.0 * n as f64);
            assert_relative_eq!(
                Kernel::Truncated.cn(n, p as f64),
                expect,
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn weight_sums_bounded_by_count() {
        for k in Kernel::ALL {
            assert!(k.cn(40, 6.5) <= 39.0);
            assert!(k.dn(40, 6.5) <= 38.0);
        }
    }

    #[test]
    fn cn_dn_over_p_converge_to_kernel_integrals() {
        // C_n/p -> ∫_0^∞ k² = int_k2/2 and D_n/p -> D(k) for p, n/p -> ∞.
        let (n, p) = (100_000, 1000.0);
        for k in Kernel::ALL {
            assert_relative_eq!(k.cn(n, p) / p, k.int_k2() / 2.0, max_relative = 0.01);
            assert_relative_eq!(k.dn(n, p) / p, k.d_k(), max_relative = 0.01);
        }
    }

    #[test]
    fn kernel_ids_round_trip() {
        for k in Kernel::ALL {
            assert_eq!(k.to_string().parse::<Kernel>().unwrap(), k);
        }
        assert!("epanechnikov".parse::<Kernel>().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn symmetric_bounded_unit_at_zero(x in -3.0f64..3.0) {
                for k in Kernel::ALL {
                    let v = k.eval(x);
                    prop_assert!(v.abs() <= 1.0 + 1e-15);
                    prop_assert!((v - k.eval(-x)).abs() <= 1e-15);
                    prop_assert_eq!(k.eval(0.0), 1.0);
                }
            }

            #[test]
            fn compact_kernels_vanish_where_promised(n in 3usize..60, p in 0.1f64..20.0) {
                for k in [Kernel::Bartlett, Kernel::Parzen, Kernel::Truncated] {
                    let jmax = k.max_nonzero_lag(n, p);
                    if jmax < n - 1 {
                        prop_assert_eq!(k.eval((jmax + 1) as f64 / p), 0.0);
                    }
                }
            }
        }
    }
}
