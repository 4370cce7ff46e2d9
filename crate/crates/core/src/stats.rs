//! Return-series statistics: daily aggregation, moments, autocorrelation,
//! Hill tail index and threshold histograms.
//!
//! Conventions:
//!
//! * excess kurtosis uses population (biased) moments, `m4 / m2^2 - 3`;
//! * autocorrelation at lag `k` is `sum_{t < n-k} (x_t - m)(x_{t+k} - m) / sum_t (x_t - m)^2`,
//!   i.e. normalised by the lag-0 sum over the full series;
//! * the Hill estimate over the top `k` absolute values is
//!   `k / sum_{i < k} ln(x_(i) / x_(k))`, with `x_(0) >= x_(1) >= ...` and
//!   `x_(k)` the largest value outside the tail.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::market::{Holding, MarketState};

/// Minimum number of order statistics the Hill estimator accepts.
pub const MIN_TAIL_SAMPLES: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnSeries {
    pub values: Vec<f64>,
    pub steps_per_day: usize,
}

impl ReturnSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Simple returns in percent, `100 * (exp(r) - 1)`.
    pub fn percentage(&self) -> Vec<f64> {
        self.values.iter().map(|r| 100.0 * r.exp_m1()).collect()
    }

    pub fn std_dev(&self) -> f64 {
        let (_, var) = mean_and_central_moment(&self.values, 2);
        var.sqrt()
    }
}

/// Day `d` return is `P(d k) - P((d - 1) k)` for `k = steps_per_day`, where
/// `log_prices[0]` is the initial log price. A trailing partial day is dropped.
pub fn daily_returns(log_prices: &[f64], steps_per_day: usize) -> Result<ReturnSeries> {
    if steps_per_day == 0 {
        return Err(Error::param("steps_per_day", "must be >= 1"));
    }
    if log_prices.len() < steps_per_day + 1 {
        return Err(Error::TooShort {
            needed: steps_per_day + 1,
            got: log_prices.len(),
        });
    }
    let values = log_prices
        .iter()
        .step_by(steps_per_day)
        .collect::<Vec<_>>()
        .windows(2)
        .map(|w| w[1] - w[0])
        .collect();
    Ok(ReturnSeries {
        values,
        steps_per_day,
    })
}

fn mean_and_central_moment(values: &[f64], order: i32) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let m = values.iter().map(|x| (x - mean).powi(order)).sum::<f64>() / n;
    (mean, m)
}

pub fn excess_kurtosis(values: &[f64]) -> Result<f64> {
    if values.len() < 4 {
        return Err(Error::TooShort {
            needed: 4,
            got: values.len(),
        });
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (m2, m4) = values.iter().fold((0.0, 0.0), |(m2, m4), x| {
        let d2 = (x - mean) * (x - mean);
        (m2 + d2, m4 + d2 * d2)
    });
    let (m2, m4) = (m2 / n, m4 / n);
    if !(m2 > 0.0) {
        return Err(Error::ZeroVariance);
    }
    Ok(m4 / (m2 * m2) - 3.0)
}

pub fn autocorrelation(values: &[f64], lag: usize) -> Result<f64> {
    let n = values.len();
    if lag >= n {
        return Err(Error::LagTooLarge { lag, len: n });
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let denom: f64 = values.iter().map(|x| (x - mean) * (x - mean)).sum();
    if !(denom > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let numer: f64 = values
        .iter()
        .zip(&values[lag..])
        .map(|(a, b)| (a - mean) * (b - mean))
        .sum();
    Ok(numer / denom)
}

/// Autocorrelation of `|r|` at lags `1..=max_lag`.
pub fn volatility_acf(returns: &ReturnSeries, max_lag: usize) -> Result<Vec<f64>> {
    if max_lag == 0 {
        return Err(Error::param("max_lag", "must be >= 1"));
    }
    if max_lag >= returns.len() {
        return Err(Error::LagTooLarge {
            lag: max_lag,
            len: returns.len(),
        });
    }
    let abs: Vec<f64> = returns.values.iter().map(|r| r.abs()).collect();
    (1..=max_lag).map(|lag| autocorrelation(&abs, lag)).collect()
}

/// Hill estimate of the power-law exponent of `|values|` over the largest
/// `floor(tail_fraction * n)` observations.
pub fn tail_exponent(values: &[f64], tail_fraction: f64) -> Result<f64> {
    if !(tail_fraction > 0.0 && tail_fraction <= 0.5) {
        return Err(Error::param("tail_fraction", "must lie in (0, 0.5]"));
    }
    let mut abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    if abs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("tail sample"));
    }
    abs.sort_unstable_by(|a, b| b.total_cmp(a));
    let k = (tail_fraction * abs.len() as f64).floor() as usize;
    if k < MIN_TAIL_SAMPLES || k >= abs.len() {
        return Err(Error::InsufficientTail {
            needed: MIN_TAIL_SAMPLES,
            got: k,
        });
    }
    let threshold = abs[k];
    if !(threshold > 0.0) {
        return Err(Error::InsufficientTail {
            needed: MIN_TAIL_SAMPLES,
            got: abs.iter().filter(|v| **v > 0.0).count(),
        });
    }
    let log_sum: f64 = abs[..k].iter().map(|x| (x / threshold).ln()).sum();
    if !(log_sum > 0.0) {
        return Err(Error::ZeroVariance);
    }
    Ok(k as f64 / log_sum)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Histogram {
    pub counts: Vec<u64>,
    pub below: u64,
    pub above: u64,
}

impl Histogram {
    fn new(bins: usize) -> Self {
        Self {
            counts: vec![0; bins],
            below: 0,
            above: 0,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.below + self.above
    }

    fn add(&mut self, edges: &[f64], x: f64) {
        let last = edges.len() - 1;
        if x < edges[0] {
            self.below += 1;
        } else if x > edges[last] {
            self.above += 1;
        } else {
            // bins are [e_j, e_{j+1}); the last one is closed on the right
            let j = edges.partition_point(|e| *e <= x).saturating_sub(1).min(last - 1);
            self.counts[j] += 1;
        }
    }
}

/// Histograms of relative threshold displacement `(threshold - p) / p`, split
/// by holding state and threshold side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdDensity {
    pub price: f64,
    pub step: u64,
    pub edges: Vec<f64>,
    pub out_lower: Histogram,
    pub out_upper: Histogram,
    pub in_lower: Histogram,
    pub in_upper: Histogram,
}

impl ThresholdDensity {
    pub fn lower(&self, state: Holding) -> &Histogram {
        match state {
            Holding::Out => &self.out_lower,
            Holding::In => &self.in_lower,
        }
    }

    pub fn upper(&self, state: Holding) -> &Histogram {
        match state {
            Holding::Out => &self.out_upper,
            Holding::In => &self.in_upper,
        }
    }
}

/// `count` equal-width bins spanning `[lo, hi]`.
pub fn uniform_edges(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let width = (hi - lo) / count as f64;
    (0..=count).map(|j| lo + width * j as f64).collect()
}

/// Edges must be strictly increasing and cover `[-0.5, 0.5]`.
pub fn validate_bin_edges(bin_edges: &[f64]) -> Result<()> {
    if bin_edges.len() < 2 {
        return Err(Error::param("bin_edges", "need at least two edges"));
    }
    if bin_edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::param("bin_edges", "must be strictly increasing"));
    }
    if bin_edges[0] > -0.5 || bin_edges[bin_edges.len() - 1] < 0.5 {
        return Err(Error::param("bin_edges", "must cover [-0.5, 0.5]"));
    }
    Ok(())
}

pub fn threshold_density(market: &MarketState, bin_edges: &[f64]) -> Result<ThresholdDensity> {
    validate_bin_edges(bin_edges)?;
    let bins = bin_edges.len() - 1;
    let mut density = ThresholdDensity {
        price: market.price,
        step: market.step,
        edges: bin_edges.to_vec(),
        out_lower: Histogram::new(bins),
        out_upper: Histogram::new(bins),
        in_lower: Histogram::new(bins),
        in_upper: Histogram::new(bins),
    };
    let p = market.price;
    for a in &market.agents {
        let (lo, hi) = match a.state {
            Holding::Out => (&mut density.out_lower, &mut density.out_upper),
            Holding::In => (&mut density.in_lower, &mut density.in_upper),
        };
        lo.add(bin_edges, (a.lower - p) / p);
        hi.add(bin_edges, (a.upper - p) / p);
    }
    Ok(density)
}
