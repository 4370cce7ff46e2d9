//! Output files.
//!
//! | file | columns |
//! |------|---------|
//! | `prices.csv` | `step,model_log_price,baseline_log_price,sigma,switches` |
//! | `daily_returns.csv` | `day,model_return_pct,baseline_return_pct` |
//! | `threshold_density_<k>.csv` | `bin_lo,bin_hi,out_lower,out_upper,in_lower,in_upper` |
//! | `sweep.csv` | `c_max,mean_max_abs_sigma,run_values,alpha,delta,seeds` |
//! | `summary.json`, `config.json` | see [`Summary`] and [`RunConfig`] |
//!
//! Floats are written as `{:.16e}` (17 significant digits). Every file is
//! written to a temporary sibling and renamed into place.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cli_io::config::RunConfig;
use crate::error::{Error, Result};
use crate::experiments::{max_abs_sigma_in_window, steps_for_years, SimulationOutput, SweepResult};
use crate::stats::{
    daily_returns, excess_kurtosis, tail_exponent, volatility_acf, ReturnSeries, ThresholdDensity,
};

pub const PRICES_HEADER: [&str; 5] = ["step", "model_log_price", "baseline_log_price", "sigma", "switches"];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let wrap = |e: csv::Error| Error::Format {
        file: "csv".into(),
        reason: e.to_string(),
    };
    w.write_record(header).map_err(wrap)?;
    for row in rows {
        w.write_record(&row).map_err(wrap)?;
    }
    w.into_inner().map_err(|e| Error::Format {
        file: "csv".into(),
        reason: e.to_string(),
    })
}

/// Series read back from a `prices.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    pub model_log_prices: Vec<f64>,
    pub baseline_log_prices: Vec<f64>,
    pub sigma: Vec<f64>,
    pub switches: Vec<u32>,
}

impl From<&SimulationOutput> for PriceSeries {
    fn from(out: &SimulationOutput) -> Self {
        Self {
            model_log_prices: out.model_log_prices.clone(),
            baseline_log_prices: out.baseline_log_prices.clone(),
            sigma: out.sigma.clone(),
            switches: out.switches.clone(),
        }
    }
}

pub fn prices_csv(series: &PriceSeries) -> Result<Vec<u8>> {
    let rows = (0..series.sigma.len()).map(|n| {
        vec![
            n.to_string(),
            fmt_f64(series.model_log_prices[n]),
            fmt_f64(series.baseline_log_prices[n]),
            fmt_f64(series.sigma[n]),
            series.switches[n].to_string(),
        ]
    });
    csv_bytes(&PRICES_HEADER, rows)
}

pub fn read_prices(path: &Path) -> Result<PriceSeries> {
    let file = path.display().to_string();
    let fmt_err = |reason: String| Error::Format {
        file: file.clone(),
        reason,
    };
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => fmt_err(format!("{other:?}")),
    })?;
    let header = rdr.headers().map_err(|e| fmt_err(e.to_string()))?.clone();
    for (i, expected) in PRICES_HEADER.iter().enumerate() {
        match header.get(i) {
            Some(h) if h == *expected => {}
            Some(h) => return Err(fmt_err(format!("column {i} is `{h}`, expected `{expected}`"))),
            None => return Err(fmt_err(format!("missing column `{expected}`"))),
        }
    }
    if header.len() != PRICES_HEADER.len() {
        return Err(fmt_err(format!("expected {} columns, found {}", PRICES_HEADER.len(), header.len())));
    }
    let mut series = PriceSeries {
        model_log_prices: Vec::new(),
        baseline_log_prices: Vec::new(),
        sigma: Vec::new(),
        switches: Vec::new(),
    };
    for (row_idx, record) in rdr.records().enumerate() {
        let line = row_idx + 2;
        let record = record.map_err(|e| fmt_err(format!("line {line}: {e}")))?;
        let field = |col: usize| -> Result<&str> {
            record
                .get(col)
                .ok_or_else(|| fmt_err(format!("line {line}: missing column `{}`", PRICES_HEADER[col])))
        };
        let float = |col: usize| -> Result<f64> {
            field(col)?
                .parse::<f64>()
                .map_err(|_| fmt_err(format!("line {line}: bad value in column `{}`", PRICES_HEADER[col])))
        };
        let step: usize = field(0)?
            .parse()
            .map_err(|_| fmt_err(format!("line {line}: bad value in column `step`")))?;
        if step != row_idx {
            return Err(fmt_err(format!("line {line}: column `step` is {step}, expected {row_idx}")));
        }
        series.model_log_prices.push(float(1)?);
        series.baseline_log_prices.push(float(2)?);
        series.sigma.push(float(3)?);
        series.switches.push(
            field(4)?
                .parse()
                .map_err(|_| fmt_err(format!("line {line}: bad value in column `switches`")))?,
        );
    }
    if series.sigma.is_empty() {
        return Err(fmt_err("no data rows".into()));
    }
    Ok(series)
}

pub fn daily_returns_csv(model: &ReturnSeries, baseline: &ReturnSeries) -> Result<Vec<u8>> {
    let m = model.percentage();
    let b = baseline.percentage();
    let rows = m
        .iter()
        .zip(&b)
        .enumerate()
        .map(|(d, (m, b))| vec![(d + 1).to_string(), fmt_f64(*m), fmt_f64(*b)]);
    csv_bytes(&["day", "model_return_pct", "baseline_return_pct"], rows)
}

pub fn density_csv(density: &ThresholdDensity) -> Result<Vec<u8>> {
    let edges = &density.edges;
    let hist = [&density.out_lower, &density.out_upper, &density.in_lower, &density.in_upper];
    let mut rows = Vec::with_capacity(edges.len() + 1);
    rows.push(
        std::iter::once(fmt_f64(f64::NEG_INFINITY))
            .chain(std::iter::once(fmt_f64(edges[0])))
            .chain(hist.iter().map(|h| h.below.to_string()))
            .collect(),
    );
    for j in 0..edges.len() - 1 {
        rows.push(
            [fmt_f64(edges[j]), fmt_f64(edges[j + 1])]
                .into_iter()
                .chain(hist.iter().map(|h| h.counts[j].to_string()))
                .collect(),
        );
    }
    rows.push(
        [fmt_f64(edges[edges.len() - 1]), fmt_f64(f64::INFINITY)]
            .into_iter()
            .chain(hist.iter().map(|h| h.above.to_string()))
            .collect(),
    );
    csv_bytes(&["bin_lo", "bin_hi", "out_lower", "out_upper", "in_lower", "in_upper"], rows)
}

pub fn sweep_csv(result: &SweepResult) -> Result<Vec<u8>> {
    let rows = result.points.iter().map(|p| {
        vec![
            fmt_f64(p.c_max),
            fmt_f64(p.mean),
            p.values.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(";"),
            fmt_f64(result.alpha),
            fmt_f64(result.delta),
            p.substreams
                .iter()
                .map(|s| format!("{}:{}", result.seed, s))
                .collect::<Vec<_>>()
                .join(";"),
        ]
    });
    csv_bytes(&["c_max", "mean_max_abs_sigma", "run_values", "alpha", "delta", "seeds"], rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesStats {
    pub days: usize,
    pub daily_std: Option<f64>,
    pub excess_kurtosis: Option<f64>,
    /// `(lag, acf)` pairs for the configured lags.
    pub volatility_acf: Vec<(usize, f64)>,
    /// Mean volatility ACF over lags `1..=acf_max_lag`.
    pub mean_volatility_acf: Option<f64>,
    pub tail_exponent: Option<f64>,
}

fn series_stats(log_prices: &[f64], config: &RunConfig) -> SeriesStats {
    let Ok(returns) = daily_returns(log_prices, config.steps_per_day) else {
        return SeriesStats {
            days: 0,
            daily_std: None,
            excess_kurtosis: None,
            volatility_acf: Vec::new(),
            mean_volatility_acf: None,
            tail_exponent: None,
        };
    };
    let longest = config.acf_lags.iter().copied().max().unwrap_or(0).max(config.acf_max_lag);
    let acf = volatility_acf(&returns, longest).ok();
    let volatility_acf = match &acf {
        Some(acf) => config.acf_lags.iter().map(|&l| (l, acf[l - 1])).collect(),
        None => Vec::new(),
    };
    let mean_volatility_acf = acf.map(|acf| {
        let head = &acf[..config.acf_max_lag];
        head.iter().sum::<f64>() / head.len() as f64
    });
    SeriesStats {
        days: returns.len(),
        daily_std: Some(returns.std_dev()),
        excess_kurtosis: excess_kurtosis(&returns.values).ok(),
        volatility_acf,
        mean_volatility_acf,
        tail_exponent: tail_exponent(&returns.values, config.tail_fraction).ok(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub seed: u64,
    pub substream: u64,
    pub config_hash: String,
    pub steps: usize,
    pub series_identical: bool,
    pub max_relative_gap: f64,
    /// Trailing window actually used, capped at the run length.
    pub max_abs_sigma_window_steps: usize,
    pub max_abs_sigma: f64,
    pub model: SeriesStats,
    pub baseline: SeriesStats,
    pub config: RunConfig,
}

pub fn summarize(series: &PriceSeries, config: &RunConfig) -> Result<Summary> {
    let steps = series.sigma.len().saturating_sub(1);
    let window = steps_for_years(config.window_years, config.steps_per_day)?.min(series.sigma.len());
    let max_relative_gap = series
        .model_log_prices
        .iter()
        .zip(&series.baseline_log_prices)
        .map(|(m, b)| (m - b).exp_m1().abs())
        .fold(0.0, f64::max);
    Ok(Summary {
        seed: config.seed,
        substream: config.substream,
        config_hash: config.hash(),
        steps,
        series_identical: series.model_log_prices == series.baseline_log_prices,
        max_relative_gap,
        max_abs_sigma_window_steps: window,
        max_abs_sigma: max_abs_sigma_in_window(&series.sigma, window)?,
        model: series_stats(&series.model_log_prices, config),
        baseline: series_stats(&series.baseline_log_prices, config),
        config: config.clone(),
    })
}

pub fn summary_json(summary: &Summary) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(summary).expect("summary serializes");
    s.push('\n');
    s.into_bytes()
}
