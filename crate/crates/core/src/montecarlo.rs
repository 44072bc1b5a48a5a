//! Monte Carlo harness for empirical size and power of the tests.
//!
//! A configuration crosses data generating processes with sample sizes and
//! a list of statistics; every replication draws one sample, computes the
//! Gram matrix and lag statistics once, and feeds them to all statistics.
//! Replication r of cell c uses the dedicated stream (c << 32) | r of the
//! master seed, so results are identical for any thread count or schedule.

use rayon::prelude::*;

use crate::autocov::{lag_norms, moment_estimates, trace_lags, MomentEstimates};
use crate::bandwidth::{adaptive_bandwidth_from_parts, fixed_bandwidth};
use crate::dgp::{simulate, DgpSpec, RngStream};
use crate::error::{Error, Result};
use crate::fspace::gram;
use crate::kernels::Kernel;
use crate::whitenoise::{
    beta_hat_star_from_parts, beta_one_star, t_stat_beta_from_parts, t_stat_from_parts, BetaMode,
};

/// Which statistic a Monte Carlo column tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatKind {
    /// Raw studentized statistic T_n.
    Raw,
    /// Power transform with the deterministic exponent β₁*.
    BetaOne,
    /// Power transform with the data-driven exponent β̂*.
    BetaHat,
}

impl std::fmt::Display for StatKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StatKind::Raw => "raw",
            StatKind::BetaOne => "beta1",
            StatKind::BetaHat => "betahat",
        })
    }
}

/// How the bandwidth is chosen per replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandwidthRule {
    /// Deterministic rate n^{1/(2q+1)}.
    Fixed,
    /// Plug-in selection from the sample.
    Adaptive,
}

impl std::fmt::Display for BandwidthRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BandwidthRule::Fixed => "fixed",
            BandwidthRule::Adaptive => "adaptive",
        })
    }
}

/// One statistic column: kind, kernel, and bandwidth rule, labelled
/// `kind-kernel-rule`, e.g. `raw-bartlett-fixed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StatisticSpec {
    pub kind: StatKind,
    pub kernel: Kernel,
    pub bandwidth: BandwidthRule,
}

impl StatisticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.bandwidth == BandwidthRule::Adaptive && self.kernel.constants().is_err() {
            return Err(Error::InvalidSpec(format!(
                "{self}: the {} kernel has no finite order, so it cannot self-tune",
                self.kernel
            )));
        }
        Ok(())
    }
}

impl std::fmt::Display for StatisticSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}-{}-{}", self.kind, self.kernel, self.bandwidth)
    }
}

impl std::str::FromStr for StatisticSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let norm = text.trim().to_ascii_lowercase();
        let mut parts = norm.split('-');
        let bad = || {
            Error::InvalidSpec(format!(
                "unparseable statistic {text:?}; expected kind-kernel-rule like raw-bartlett-fixed"
            ))
        };
        let kind = match parts.next().ok_or_else(bad)? {
            "raw" => StatKind::Raw,
            "beta1" => StatKind::BetaOne,
            "betahat" => StatKind::BetaHat,
            _ => return Err(bad()),
        };
        let kernel: Kernel = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let bandwidth = match parts.next().ok_or_else(bad)? {
            "fixed" => BandwidthRule::Fixed,
            "adaptive" => BandwidthRule::Adaptive,
            _ => return Err(bad()),
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        let spec = StatisticSpec {
            kind,
            kernel,
            bandwidth,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Full experiment description: cells are the product of `dgps` and
/// `sample_sizes`; every cell runs `reps` replications of each statistic.
#[derive(Debug, Clone)]
pub struct McConfig {
    pub dgps: Vec<DgpSpec>,
    pub sample_sizes: Vec<usize>,
    /// Grid points per curve.
    pub grid_points: usize,
    pub reps: usize,
    pub seed: u64,
    /// Nominal levels at which rejections are counted.
    pub levels: Vec<f64>,
    pub statistics: Vec<StatisticSpec>,
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dgps.is_empty() || self.sample_sizes.is_empty() || self.statistics.is_empty() {
            return Err(Error::InvalidSpec(
                "dgps, sample_sizes, and statistics must all be non-empty".into(),
            ));
        }
        if self.reps == 0 {
            return Err(Error::InvalidSpec("reps must be positive".into()));
        }
        if self.grid_points == 0 {
            return Err(Error::InvalidSpec("grid_points must be positive".into()));
        }
        if self.levels.is_empty()
            || self
                .levels
                .iter()
                .any(|a| !(0.0..1.0).contains(a) || *a == 0.0)
        {
            return Err(Error::InvalidSpec("levels must lie in (0, 1)".into()));
        }
        for n in &self.sample_sizes {
            if *n < 3 {
                return Err(Error::InvalidSpec(format!("sample size {n} is below 3")));
            }
        }
        for d in &self.dgps {
            d.validate()?;
        }
        for s in &self.statistics {
            s.validate()?;
        }
        Ok(())
    }
}

/// Accumulated results for one statistic within one cell.
#[derive(Debug, Clone)]
pub struct StatCell {
    pub spec: StatisticSpec,
    /// Rejection counts, parallel to the configured levels.
    pub rejections: Vec<usize>,
    pub reps_ok: usize,
    pub failures: usize,
    pub mean_statistic: f64,
    pub mean_bandwidth: f64,
    /// First error message observed, for diagnosing failed replications.
    pub first_error: Option<String>,
}

impl StatCell {
    pub fn rejection_rate(&self, level_idx: usize) -> f64 {
        self.rejections[level_idx] as f64 / self.reps_ok as f64
    }
}

/// Results for one (process, sample size) cell.
#[derive(Debug, Clone)]
pub struct CellReport {
    pub dgp: DgpSpec,
    pub n: usize,
    pub stats: Vec<StatCell>,
}

/// Full experiment output; rendering includes no clocks or hostnames, so
/// equal configurations produce byte-identical reports.
#[derive(Debug, Clone)]
pub struct McReport {
    pub config: McConfig,
    pub cells: Vec<CellReport>,
}

type StatOutcome = std::result::Result<(f64, f64, f64), String>;

fn required_lags(n: usize, spec: &StatisticSpec) -> usize {
    match spec.bandwidth {
        BandwidthRule::Fixed => spec
            .kernel
            .max_nonzero_lag(n, fixed_bandwidth(spec.kernel, n)),
        BandwidthRule::Adaptive => {
            let pq = 4.0 * fixed_bandwidth(spec.kernel, n);
            spec.kernel
                .max_nonzero_lag(n, pq)
                .max(spec.kernel.max_nonzero_lag(n, n as f64 / 4.0))
        }
    }
}

fn run_rep(
    config: &McConfig,
    dgp: &DgpSpec,
    n: usize,
    cell_idx: u64,
    rep: u64,
    max_lag: usize,
    needs_mu3: bool,
) -> Vec<StatOutcome> {
    let mut rng = RngStream::from_parts(config.seed, (cell_idx << 32) | rep);
    let sample = match simulate(dgp, n, config.grid_points, &mut rng) {
        Ok(s) => s,
        Err(e) => return vec![Err(e.to_string()); config.statistics.len()],
    };
    let g = gram(&sample);
    let (ln, tl) = match (lag_norms(&g, max_lag), trace_lags(&g, max_lag)) {
        (Ok(ln), Ok(tl)) => (ln, tl),
        (Err(e), _) | (_, Err(e)) => return vec![Err(e.to_string()); config.statistics.len()],
    };
    let sigma2 = tl[0];
    let mu2 = ln.values()[0];
    let moments: Option<MomentEstimates> = needs_mu3.then(|| moment_estimates(&g));

    config
        .statistics
        .iter()
        .map(|spec| -> StatOutcome {
            let eval = || -> Result<(f64, f64, f64)> {
                let p = match spec.bandwidth {
                    BandwidthRule::Fixed => fixed_bandwidth(spec.kernel, n),
                    BandwidthRule::Adaptive => {
                        adaptive_bandwidth_from_parts(n, &ln, &tl, spec.kernel)?.p
                    }
                };
                let r = match spec.kind {
                    StatKind::Raw => t_stat_from_parts(n, &ln, sigma2, mu2, spec.kernel, p)?,
                    StatKind::BetaOne => {
                        let beta = beta_one_star(spec.kernel, n, p)?;
                        t_stat_beta_from_parts(n, &ln, sigma2, mu2, spec.kernel, p, beta)?
                    }
                    StatKind::BetaHat => {
                        let m = moments.as_ref().expect("moments computed for betahat");
                        let beta = beta_hat_star_from_parts(
                            n,
                            m,
                            spec.kernel,
                            p,
                            BetaMode::SelfConsistent,
                        )?;
                        t_stat_beta_from_parts(n, &ln, sigma2, mu2, spec.kernel, p, beta)?
                    }
                };
                Ok((r.statistic, r.p_value, p))
            };
            eval().map_err(|e| e.to_string())
        })
        .collect()
}

/// Run the experiment. Cells are processed in order; replications within a
/// cell run in parallel but are reduced in replication order.
pub fn run(config: &McConfig) -> Result<McReport> {
    run_with_progress(config, |_| {})
}

/// Like `run`, invoking `progress` after each finished cell; the callback
/// sees cells in completion order, which is configuration order.
pub fn run_with_progress(
    config: &McConfig,
    mut progress: impl FnMut(&CellReport),
) -> Result<McReport> {
    config.validate()?;
    let mut cells = Vec::new();
    let mut cell_idx: u64 = 0;
    for dgp in &config.dgps {
        for &n in &config.sample_sizes {
            let max_lag = config
                .statistics
                .iter()
                .map(|s| required_lags(n, s))
                .max()
                .unwrap_or(0)
                .min(n - 1);
            let needs_mu3 = config
                .statistics
                .iter()
                .any(|s| s.kind == StatKind::BetaHat);
            let outcomes: Vec<Vec<StatOutcome>> = (0..config.reps as u64)
                .into_par_iter()
                .map(|rep| run_rep(config, dgp, n, cell_idx, rep, max_lag, needs_mu3))
                .collect();

            let mut stats: Vec<StatCell> = config
                .statistics
                .iter()
                .map(|spec| StatCell {
                    spec: *spec,
                    rejections: vec![0; config.levels.len()],
                    reps_ok: 0,
                    failures: 0,
                    mean_statistic: 0.0,
                    mean_bandwidth: 0.0,
                    first_error: None,
                })
                .collect();
            for rep_out in &outcomes {
                for (cell, out) in stats.iter_mut().zip(rep_out) {
                    match out {
                        Ok((stat, p_value, bw)) => {
                            cell.reps_ok += 1;
                            cell.mean_statistic += stat;
                            cell.mean_bandwidth += bw;
                            for (slot, level) in cell.rejections.iter_mut().zip(&config.levels) {
                                if p_value < level {
                                    *slot += 1;
                                }
                            }
                        }
                        Err(msg) => {
                            cell.failures += 1;
                            if cell.first_error.is_none() {
                                cell.first_error = Some(msg.clone());
                            }
                        }
                    }
                }
            }
            for cell in &mut stats {
                if cell.reps_ok > 0 {
                    cell.mean_statistic /= cell.reps_ok as f64;
                    cell.mean_bandwidth /= cell.reps_ok as f64;
                } else {
                    cell.mean_statistic = f64::NAN;
                    cell.mean_bandwidth = f64::NAN;
                }
            }
            cells.push(CellReport {
                dgp: *dgp,
                n,
                stats,
            });
            progress(cells.last().expect("cell just pushed"));
            cell_idx += 1;
        }
    }
    Ok(McReport {
        config: config.clone(),
        cells,
    })
}

fn header_columns(levels: &[f64]) -> Vec<String> {
    let mut cols = vec![
        "dgp".into(),
        "n".into(),
        "statistic".into(),
        "reps".into(),
        "failures".into(),
        "mean_statistic".into(),
        "mean_bandwidth".into(),
    ];
    for level in levels {
        cols.push(format!("reject_at_{level}"));
    }
    cols
}

fn row_columns(cell: &CellReport, stat: &StatCell, levels: &[f64]) -> Vec<String> {
    let mut cols = vec![
        cell.dgp.to_string(),
        cell.n.to_string(),
        stat.spec.to_string(),
        stat.reps_ok.to_string(),
        stat.failures.to_string(),
        format!("{:.6}", stat.mean_statistic),
        format!("{:.6}", stat.mean_bandwidth),
    ];
    for i in 0..levels.len() {
        cols.push(format!("{:.6}", stat.rejection_rate(i)));
    }
    cols
}

/// Report as CSV; every label is comma-free by construction.
pub fn render_csv(report: &McReport) -> String {
    let mut out = String::new();
    out.push_str(&header_columns(&report.config.levels).join(","));
    out.push('\n');
    for cell in &report.cells {
        for stat in &cell.stats {
            out.push_str(&row_columns(cell, stat, &report.config.levels).join(","));
            out.push('\n');
        }
    }
    out
}

/// Report as a markdown pipe table.
pub fn render_markdown(report: &McReport) -> String {
    let header = header_columns(&report.config.levels);
    let mut out = String::new();
    out.push_str(&format!("| {} |\n", header.join(" | ")));
    out.push_str(&format!("|{}\n", "---|".repeat(header.len())));
    for cell in &report.cells {
        for stat in &cell.stats {
            out.push_str(&format!(
                "| {} |\n",
                row_columns(cell, stat, &report.config.levels).join(" | ")
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smoke_config() -> McConfig {
        McConfig {
            dgps: vec![DgpSpec::IidBm],
            sample_sizes: vec![60],
            grid_points: 8,
            reps: 100,
            seed: 20240901,
            levels: vec![0.05, 0.01],
            statistics: vec![
                "raw-bartlett-fixed".parse().unwrap(),
                "beta1-bartlett-fixed".parse().unwrap(),
            ],
        }
    }

    #[test]
    fn statistic_labels_round_trip() {
        for label in [
            "raw-bartlett-fixed",
            "beta1-parzen-fixed",
            "betahat-daniell-adaptive",
            "raw-truncated-fixed",
        ] {
            let spec: StatisticSpec = label.parse().unwrap();
            assert_eq!(spec.to_string(), label);
        }
        assert!("raw-bartlett".parse::<StatisticSpec>().is_err());
        assert!("tilted-bartlett-fixed".parse::<StatisticSpec>().is_err());
        assert!("raw-bartlett-fixed-extra".parse::<StatisticSpec>().is_err());
        assert!("raw-epanechnikov-fixed".parse::<StatisticSpec>().is_err());
    }

    #[test]
    fn truncated_kernel_cannot_be_adaptive() {
        assert!("raw-truncated-adaptive".parse::<StatisticSpec>().is_err());
        let spec = StatisticSpec {
            kind: StatKind::Raw,
            kernel: Kernel::Truncated,
            bandwidth: BandwidthRule::Adaptive,
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn config_validation_catches_bad_fields() {
        let ok = smoke_config();
        assert!(ok.validate().is_ok());
        let mut c = smoke_config();
        c.statistics.clear();
        assert!(c.validate().is_err());
        let mut c = smoke_config();
        c.levels = vec![1.5];
        assert!(c.validate().is_err());
        let mut c = smoke_config();
        c.reps = 0;
        assert!(c.validate().is_err());
        let mut c = smoke_config();
        c.sample_sizes = vec![2];
        assert!(c.validate().is_err());
        let mut c = smoke_config();
        c.dgps = vec![DgpSpec::Far1 { s: 1.3 }];
        assert!(c.validate().is_err());
    }

    #[test]
    fn identical_configs_render_identically() {
        let cfg = smoke_config();
        let a = render_csv(&run(&cfg).unwrap());
        let b = render_csv(&run(&cfg).unwrap());
        assert_eq!(a, b);
        assert!(
            !a.contains(char::is_uppercase),
            "labels should be lowercase: {a}"
        );
    }

    #[test]
    fn report_is_independent_of_thread_count() {
        let cfg = smoke_config();
        let pool1 = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let a = pool1.install(|| render_csv(&run(&cfg).unwrap()));
        let b = pool4.install(|| render_csv(&run(&cfg).unwrap()));
        assert_eq!(a, b);
    }

    #[test]
    fn null_cell_rejects_near_nominal_level() {
        let report = run(&smoke_config()).unwrap();
        let cell = &report.cells[0];
        for stat in &cell.stats {
            assert_eq!(stat.failures, 0, "{:?}", stat.first_error);
            assert_eq!(stat.reps_ok, 100);
            let rate = stat.rejection_rate(0);
            assert!(rate <= 0.2, "size badly off for {}: {rate}", stat.spec);
            assert!((stat.mean_bandwidth - fixed_bandwidth(Kernel::Bartlett, 60)).abs() < 1e-12);
        }
    }

    #[test]
    fn dependent_cell_rejects_more_often_than_null_cell() {
        let mut cfg = smoke_config();
        cfg.dgps = vec![DgpSpec::IidBm, DgpSpec::Far1 { s: 0.6 }];
        cfg.sample_sizes = vec![80];
        cfg.grid_points = 6;
        cfg.reps = 60;
        cfg.statistics = vec!["raw-bartlett-fixed".parse().unwrap()];
        let report = run(&cfg).unwrap();
        let null_rate = report.cells[0].stats[0].rejection_rate(0);
        let alt_rate = report.cells[1].stats[0].rejection_rate(0);
        assert!(
            alt_rate > null_rate + 0.2,
            "power should clearly exceed size: {alt_rate} vs {null_rate}"
        );
    }

    #[test]
    fn renderings_have_consistent_shape() {
        let report = run(&smoke_config()).unwrap();
        let csv = render_csv(&report);
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines.len(), 1 + 2);
        let cols = lines[0].split(',').count();
        for line in &lines {
            assert_eq!(line.split(',').count(), cols);
        }
        assert!(lines[0].ends_with("reject_at_0.05,reject_at_0.01"));
        let md = render_markdown(&report);
        assert!(md.lines().all(|l| l.starts_with('|')));
        assert_eq!(md.lines().count(), 2 + 2);
    }

    #[test]
    fn betahat_column_runs_and_tracks_the_others() {
        let mut cfg = smoke_config();
        cfg.statistics = vec![
            "raw-bartlett-fixed".parse().unwrap(),
            "betahat-bartlett-fixed".parse().unwrap(),
        ];
        cfg.reps = 40;
        let report = run(&cfg).unwrap();
        for stat in &report.cells[0].stats {
            assert_eq!(stat.failures, 0, "{:?}", stat.first_error);
        }
    }
}
