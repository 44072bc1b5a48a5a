//! Monte Carlo experiment configuration files.
//!
//! Flat `key = value` lines; `#` starts a comment; list values are
//! comma-separated. Keys:
//!
//! ```text
//! dgps         = iid_bm, far1:0.3, fgarch11
//! sample_sizes = 100, 250
//! grid_points  = 50
//! reps         = 1000
//! seed         = 20240901          # master_seed is accepted too
//! levels       = 0.05, 0.01       # optional, this is the default
//! statistics   = raw-bartlett-fixed, beta1-parzen-adaptive, ...
//! ```

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Context, Result};
use fwn::montecarlo::McConfig;

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// Parse a configuration file body into a validated `McConfig`.
pub fn parse_mc_config(text: &str) -> Result<McConfig> {
    let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected key = value, got {:?}", idx + 1, line))?;
        let key = key.trim().to_ascii_lowercase();
        let key = if key == "master_seed" {
            "seed".to_string()
        } else {
            key
        };
        if let Some((first_line, _)) = entries.get(&key) {
            bail!(
                "line {}: duplicate key {:?} (first set on line {})",
                idx + 1,
                key,
                first_line
            );
        }
        entries.insert(key, (idx + 1, value.trim().to_string()));
    }

    let mut take = |key: &str| entries.remove(key).map(|(_, v)| v);
    let required =
        |key: &str, v: Option<String>| v.ok_or_else(|| anyhow!("missing required key {key:?}"));

    let dgps = required("dgps", take("dgps"))?;
    let dgps = split_list(&dgps)
        .map(|s| s.parse().with_context(|| format!("key \"dgps\": {s:?}")))
        .collect::<Result<Vec<_>>>()?;
    let sample_sizes = required("sample_sizes", take("sample_sizes"))?;
    let sample_sizes = split_list(&sample_sizes)
        .map(|s| {
            s.parse::<usize>()
                .with_context(|| format!("key \"sample_sizes\": {s:?}"))
        })
        .collect::<Result<Vec<_>>>()?;
    let grid_points = required("grid_points", take("grid_points"))?
        .parse::<usize>()
        .context("key \"grid_points\"")?;
    let reps = required("reps", take("reps"))?
        .parse::<usize>()
        .context("key \"reps\"")?;
    let seed = match take("seed") {
        Some(v) => v.parse::<u64>().context("key \"seed\"")?,
        None => 0,
    };
    let levels = match take("levels") {
        Some(v) => split_list(&v)
            .map(|s| {
                s.parse::<f64>()
                    .with_context(|| format!("key \"levels\": {s:?}"))
            })
            .collect::<Result<Vec<_>>>()?,
        None => vec![0.05, 0.01],
    };
    let statistics = required("statistics", take("statistics"))?;
    let statistics = split_list(&statistics)
        .map(|s| {
            s.parse()
                .with_context(|| format!("key \"statistics\": {s:?}"))
        })
        .collect::<Result<Vec<_>>>()?;

    if let Some((line, _)) = entries.values().next() {
        let key = entries.keys().next().expect("non-empty");
        bail!("line {line}: unknown key {key:?}");
    }

    let config = McConfig {
        dgps,
        sample_sizes,
        grid_points,
        reps,
        seed,
        levels,
        statistics,
    };
    config.validate()?;
    Ok(config)
}
