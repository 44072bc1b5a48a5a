//! `fwn`: white noise tests for functional time series.
//!
//! Four commands: `test` runs one white noise test on a curve CSV,
//! `simulate` draws samples from the built-in processes, `mc` runs a
//! Monte Carlo size/power experiment from a config file, and `bandwidth`
//! reports the adaptive bandwidth selection for a file. Exit codes signal
//! computation success only, never the statistical decision.

mod config;
mod io;

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use fwn::bandwidth::{adaptive_bandwidth, fixed_bandwidth};
use fwn::dgp::{simulate, DgpSpec, RngStream};
use fwn::fspace::{center, difference, FunctionalSample};
use fwn::kernels::Kernel;
use fwn::montecarlo::{render_csv, render_markdown, run_with_progress};
use fwn::whitenoise::{beta_hat_star, beta_one_star, t_stat, t_stat_beta, BetaMode};

#[derive(Parser)]
#[command(
    name = "fwn",
    version,
    about = "White noise tests for functional time series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test a curve CSV for white noise and print a key=value record.
    Test(TestArgs),
    /// Simulate a sample from iid_bm, far1:S, or fgarch11 to CSV.
    Simulate(SimulateArgs),
    /// Run a Monte Carlo experiment described by a config file.
    Mc(McArgs),
    /// Print the adaptive bandwidth selection for a curve CSV
    /// (keys: kernel, n, q, pilot_p0, pilot_pq, i_f, i_fq, i_tr,
    /// c_hat, p_raw, p_hat, clamped).
    Bandwidth(BandwidthArgs),
}

/// Bandwidth flag: a selection rule or an explicit value.
#[derive(Clone, Copy, Debug)]
enum BandwidthFlag {
    Adaptive,
    Fixed,
    Value(f64),
}

impl FromStr for BandwidthFlag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "adaptive" => Ok(Self::Adaptive),
            "fixed" => Ok(Self::Fixed),
            other => other
                .parse::<f64>()
                .map(Self::Value)
                .map_err(|_| format!("expected adaptive, fixed, or a number, got {s:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Variant {
    Raw,
    BetaOne,
    BetaHat,
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "raw" => Ok(Self::Raw),
            "beta1" => Ok(Self::BetaOne),
            "betahat" => Ok(Self::BetaHat),
            _ => Err(format!("expected raw, beta1, or betahat, got {s:?}")),
        }
    }
}

fn parse_beta_mode(s: &str) -> std::result::Result<BetaMode, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "consistent" => Ok(BetaMode::SelfConsistent),
        "literal" => Ok(BetaMode::Literal),
        _ => Err(format!("expected consistent or literal, got {s:?}")),
    }
}

#[derive(Args)]
struct PrepArgs {
    /// Center curves at the sample mean before testing (default).
    #[arg(long, overrides_with = "no_center")]
    center: bool,
    /// Skip centering; assume the curves already have mean zero.
    #[arg(long, overrides_with = "center")]
    no_center: bool,
    /// First-difference the curves before testing.
    #[arg(long)]
    diff: bool,
}

impl PrepArgs {
    fn apply(&self, sample: FunctionalSample) -> Result<FunctionalSample> {
        let sample = if self.diff {
            difference(&sample)?
        } else {
            sample
        };
        let do_center = self.center || !self.no_center;
        Ok(if do_center { center(&sample) } else { sample })
    }
}

#[derive(Args)]
struct TestArgs {
    /// Curve CSV: one row per curve, one column per grid point.
    path: PathBuf,
    #[arg(long, default_value = "bartlett")]
    kernel: Kernel,
    /// adaptive, fixed, or an explicit value.
    #[arg(long, default_value = "adaptive")]
    bandwidth: BandwidthFlag,
    /// raw, beta1 (deterministic exponent), or betahat (data-driven).
    #[arg(long, default_value = "beta1")]
    variant: Variant,
    /// Moment plug-in for betahat: consistent or literal.
    #[arg(long, default_value = "consistent", value_parser = parse_beta_mode)]
    beta_mode: BetaMode,
    #[command(flatten)]
    prep: PrepArgs,
}

#[derive(Args)]
struct SimulateArgs {
    /// Process: iid_bm, far1:S, or fgarch11.
    #[arg(long)]
    dgp: DgpSpec,
    /// Number of curves.
    #[arg(long)]
    n: usize,
    /// Grid points per curve.
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct McArgs {
    /// Experiment configuration file.
    config: PathBuf,
    /// Report output path.
    #[arg(long)]
    out: PathBuf,
    /// csv or markdown.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Worker threads for the replication loop (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct BandwidthArgs {
    /// Curve CSV: one row per curve, one column per grid point.
    path: PathBuf,
    #[arg(long, default_value = "bartlett")]
    kernel: Kernel,
    #[command(flatten)]
    prep: PrepArgs,
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn cmd_test(args: &TestArgs) -> Result<()> {
    let sample = args.prep.apply(io::read_curves(&args.path)?)?;
    let n = sample.n();
    let p = match args.bandwidth {
        BandwidthFlag::Adaptive => adaptive_bandwidth(&sample, args.kernel)?.p,
        BandwidthFlag::Fixed => fixed_bandwidth(args.kernel, n),
        BandwidthFlag::Value(p) => p,
    };
    let result = match args.variant {
        Variant::Raw => t_stat(&sample, args.kernel, p)?,
        Variant::BetaOne => {
            let beta = beta_one_star(args.kernel, n, p)?;
            t_stat_beta(&sample, args.kernel, p, beta)?
        }
        Variant::BetaHat => {
            let beta = beta_hat_star(&sample, args.kernel, p, args.beta_mode)?;
            t_stat_beta(&sample, args.kernel, p, beta)?
        }
    };
    println!("statistic={}", fmt(result.statistic));
    if let Some(beta) = result.beta {
        println!("beta={}", fmt(beta));
    }
    println!("p_value={}", fmt(result.p_value));
    println!("bandwidth={}", fmt(result.bandwidth));
    println!("kernel={}", result.kernel);
    println!("n={n}");
    println!("m={}", sample.m());
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let mut rng = RngStream::from_parts(args.seed, 0);
    let sample = simulate(&args.dgp, args.n, args.m, &mut rng)?;
    io::write_curves(&args.out, &sample)?;
    Ok(())
}

fn cmd_mc(args: &McArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("cannot read {}", args.config.display()))?;
    let config = config::parse_mc_config(&text)?;
    let total = config.dgps.len() * config.sample_sizes.len();
    let mut done = 0usize;
    let mut run_all = || {
        run_with_progress(&config, |cell| {
            done += 1;
            eprintln!(
                "cell {done}/{total}: dgp={} n={} finished",
                cell.dgp, cell.n
            );
        })
    };
    let report = match args.threads {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .context("cannot build thread pool")?;
            pool.install(run_all)?
        }
        None => run_all()?,
    };
    let rendered = match args.format.as_str() {
        "csv" => render_csv(&report),
        "markdown" => render_markdown(&report),
        other => bail!("unknown format {other:?}; expected csv or markdown"),
    };
    io::write_atomic(&args.out, &rendered)?;
    Ok(())
}

fn cmd_bandwidth(args: &BandwidthArgs) -> Result<()> {
    let sample = args.prep.apply(io::read_curves(&args.path)?)?;
    let r = adaptive_bandwidth(&sample, args.kernel)?;
    let q = args.kernel.constants()?.order_q;
    println!("kernel={}", r.kernel);
    println!("n={}", r.n);
    println!("q={q}");
    println!("pilot_p0={}", fmt(r.pilot_p0));
    println!("pilot_pq={}", fmt(r.pilot_pq));
    println!("i_f={}", fmt(r.i_f));
    println!("i_fq={}", fmt(r.i_fq));
    println!("i_tr={}", fmt(r.i_tr));
    println!("c_hat={}", fmt(r.c_q));
    println!("p_raw={}", fmt(r.p_raw));
    println!("p_hat={}", fmt(r.p));
    println!("clamped={}", r.clamped);
    Ok(())
}

fn real_main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Test(args) => cmd_test(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Mc(args) => cmd_mc(args),
        Command::Bandwidth(args) => cmd_bandwidth(args),
    }
}

fn main() {
    if let Err(err) = real_main() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
