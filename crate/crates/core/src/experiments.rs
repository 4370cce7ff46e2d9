//! Scenario runs against a shared-noise GBM baseline, and herding sweeps.
//!
//! A run owns one [`RandomStream`]; its `eta` draw feeds both the model and
//! the baseline `P_b(n) = P_b(n-1) + sqrt(h) * eta(n) - h/2`. Sweeps give run
//! `r` of every sweep point the substream `r`, so points (and variants that
//! share a seed) are compared on common random numbers.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::market::{init_market, information_shock, resolve_timestep, MarketState, ModelParams, StepOutcome};
use crate::stats::{
    daily_returns, threshold_density, uniform_edges, validate_bin_edges, ReturnSeries, ThresholdDensity,
};
use crate::stochastic::RandomStream;

pub const TRADING_DAYS_PER_YEAR: usize = 250;

/// Converts a span in years to a whole number of timesteps.
pub fn steps_for_years(years: f64, steps_per_day: usize) -> Result<usize> {
    if !(years.is_finite() && years > 0.0) {
        return Err(Error::param("years", "must be finite and > 0"));
    }
    let exact = years * (TRADING_DAYS_PER_YEAR * steps_per_day) as f64;
    let steps = exact.round();
    if (exact - steps).abs() > 1e-6 || steps < 1.0 {
        return Err(Error::param(
            "years",
            format!("{years} years is not a whole number of {steps_per_day}-step days"),
        ));
    }
    Ok(steps as usize)
}

/// A live run: market, baseline and the stream that drives both.
#[derive(Debug, Clone)]
pub struct Simulation {
    params: ModelParams,
    market: MarketState,
    baseline_log_price: f64,
    stream: RandomStream,
}

impl Simulation {
    pub fn new(params: ModelParams, seed: u64, substream: u64) -> Result<Self> {
        let mut stream = RandomStream::new(seed, substream);
        let market = init_market(&params, &mut stream)?;
        let baseline_log_price = market.log_price;
        Ok(Self {
            params,
            market,
            baseline_log_price,
            stream,
        })
    }

    pub fn step(&mut self) -> Result<StepOutcome> {
        let eta = self.stream.gaussian();
        let out = resolve_timestep(&mut self.market, eta, &self.params, &mut self.stream)?;
        self.baseline_log_price += information_shock(eta, self.params.h)?;
        Ok(out)
    }

    pub fn market(&self) -> &MarketState {
        &self.market
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn baseline_log_price(&self) -> f64 {
        self.baseline_log_price
    }

    pub fn stream(&self) -> &RandomStream {
        &self.stream
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub requested_years: f64,
    pub density: ThresholdDensity,
}

/// Per-step series of one run. Index `n` holds the value after step `n`;
/// index 0 is the initial state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationOutput {
    pub seed: u64,
    pub substream: u64,
    pub params: ModelParams,
    pub model_log_prices: Vec<f64>,
    pub baseline_log_prices: Vec<f64>,
    pub sigma: Vec<f64>,
    pub switches: Vec<u32>,
    pub snapshots: Vec<Snapshot>,
}

impl SimulationOutput {
    pub fn num_steps(&self) -> usize {
        self.sigma.len() - 1
    }

    pub fn model_returns(&self) -> Result<ReturnSeries> {
        daily_returns(&self.model_log_prices, self.params.steps_per_day)
    }

    pub fn baseline_returns(&self) -> Result<ReturnSeries> {
        daily_returns(&self.baseline_log_prices, self.params.steps_per_day)
    }

    /// Largest relative deviation `|p_model / p_base - 1|` over the run.
    pub fn max_relative_gap(&self) -> f64 {
        self.model_log_prices
            .iter()
            .zip(&self.baseline_log_prices)
            .map(|(m, b)| (m - b).exp_m1().abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOptions {
    pub horizon_years: f64,
    /// Requested snapshot times in years. Each snapshot is taken at the first
    /// step at or after that time with `|sigma| < snapshot_sigma_tol`.
    pub snapshot_times: Vec<f64>,
    pub snapshot_sigma_tol: f64,
    pub bin_edges: Vec<f64>,
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        Self {
            horizon_years: 40.0,
            snapshot_times: Vec::new(),
            snapshot_sigma_tol: 0.05,
            bin_edges: uniform_edges(-0.5, 0.5, 100),
        }
    }
}

pub fn run_scenario(
    params: &ModelParams,
    seed: u64,
    substream: u64,
    options: &ScenarioOptions,
) -> Result<SimulationOutput> {
    let steps = steps_for_years(options.horizon_years, params.steps_per_day)?;
    let mut pending: Vec<(usize, f64)> = options
        .snapshot_times
        .iter()
        .map(|&t| {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::param("snapshot_times", "must be finite and >= 0"));
            }
            let at = (t * (TRADING_DAYS_PER_YEAR * params.steps_per_day) as f64).round() as usize;
            Ok((at, t))
        })
        .collect::<Result<_>>()?;
    pending.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    if !pending.is_empty() {
        validate_bin_edges(&options.bin_edges)?;
    }

    let mut sim = Simulation::new(params.clone(), seed, substream)?;
    let mut model = Vec::with_capacity(steps + 1);
    let mut baseline = Vec::with_capacity(steps + 1);
    let mut sigma = Vec::with_capacity(steps + 1);
    let mut switches = Vec::with_capacity(steps + 1);
    let mut snapshots = Vec::new();

    let mut record = |sim: &Simulation, switched: usize, n: usize, snapshots: &mut Vec<Snapshot>| -> Result<()> {
        model.push(sim.market.log_price);
        baseline.push(sim.baseline_log_price);
        sigma.push(sim.market.sigma);
        switches.push(switched as u32);
        while let Some(&(at, years)) = pending.first() {
            if n < at || sim.market.sigma.abs() >= options.snapshot_sigma_tol {
                break;
            }
            snapshots.push(Snapshot {
                requested_years: years,
                density: threshold_density(&sim.market, &options.bin_edges)?,
            });
            pending.remove(0);
        }
        Ok(())
    };

    record(&sim, 0, 0, &mut snapshots)?;
    for n in 1..=steps {
        let out = sim.step()?;
        record(&sim, out.switch_count, n, &mut snapshots)?;
    }

    Ok(SimulationOutput {
        seed,
        substream,
        params: params.clone(),
        model_log_prices: model,
        baseline_log_prices: baseline,
        sigma,
        switches,
        snapshots,
    })
}

/// `max |sigma(n)|` over the last `window_steps` entries.
pub fn max_abs_sigma_in_window(sigma: &[f64], window_steps: usize) -> Result<f64> {
    if window_steps == 0 || window_steps > sigma.len() {
        return Err(Error::WindowTooLong {
            window: window_steps,
            len: sigma.len(),
        });
    }
    Ok(sigma[sigma.len() - window_steps..]
        .iter()
        .map(|s| s.abs())
        .fold(0.0, f64::max))
}

pub fn max_abs_sigma(output: &SimulationOutput, window_years: f64) -> Result<f64> {
    let window = steps_for_years(window_years, output.params.steps_per_day)?;
    if window > output.num_steps() {
        return Err(Error::WindowTooLong {
            window,
            len: output.num_steps(),
        });
    }
    max_abs_sigma_in_window(&output.sigma, window)
}

/// Runs without storing series, tracking `max |sigma|` over the final
/// `window_steps` steps.
pub fn run_disequilibrium(
    params: &ModelParams,
    seed: u64,
    substream: u64,
    horizon_steps: usize,
    window_steps: usize,
) -> Result<f64> {
    if window_steps > horizon_steps {
        return Err(Error::WindowTooLong {
            window: window_steps,
            len: horizon_steps,
        });
    }
    let mut sim = Simulation::new(params.clone(), seed, substream)?;
    let start = horizon_steps - window_steps;
    let mut worst: f64 = 0.0;
    for n in 1..=horizon_steps {
        sim.step()?;
        if n > start {
            worst = worst.max(sim.market.sigma.abs());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub cmax_values: Vec<f64>,
    pub runs_per_point: usize,
    pub horizon_years: f64,
    pub window_years: f64,
    pub initial_sigma: f64,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            cmax_values: vec![0.0, 5.0, 10.0, 20.0, 40.0, 60.0, 80.0, 100.0],
            runs_per_point: 10,
            horizon_years: 40.0,
            window_years: 30.0,
            initial_sigma: 0.05,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub c_max: f64,
    pub values: Vec<f64>,
    pub mean: f64,
    pub substreams: Vec<u64>,
}

impl SweepPoint {
    pub fn runs(&self) -> usize {
        self.values.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub seed: u64,
    pub alpha: f64,
    pub delta: f64,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn point(&self, c_max: f64) -> Option<&SweepPoint> {
        self.points.iter().find(|p| p.c_max == c_max)
    }

    pub fn means(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mean).collect()
    }
}

/// Herding range `[C_max / 4, C_max]` for one sweep point.
pub fn sweep_params(base: &ModelParams, c_max: f64, initial_sigma: f64) -> ModelParams {
    ModelParams {
        herding_lo: c_max / 4.0,
        herding_hi: c_max,
        initial_sigma,
        ..base.clone()
    }
}

/// Mean of `max |sigma|` over the trailing window per `C_max`. Runs execute
/// on the current rayon pool; results are reduced in (point, run) order.
pub fn bifurcation_sweep(base: &ModelParams, config: &SweepConfig) -> Result<SweepResult> {
    if config.runs_per_point == 0 {
        return Err(Error::param("runs_per_point", "must be >= 1"));
    }
    if config.cmax_values.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
        return Err(Error::param("cmax_values", "must be finite and >= 0"));
    }
    let horizon = steps_for_years(config.horizon_years, base.steps_per_day)?;
    let window = steps_for_years(config.window_years, base.steps_per_day)?;
    if window > horizon {
        return Err(Error::WindowTooLong {
            window,
            len: horizon,
        });
    }
    let point_params: Vec<ModelParams> = config
        .cmax_values
        .iter()
        .map(|&c| sweep_params(base, c, config.initial_sigma))
        .collect();
    for p in &point_params {
        p.validate()?;
    }

    let runs = config.runs_per_point;
    let jobs: Vec<(usize, usize)> = (0..point_params.len())
        .flat_map(|p| (0..runs).map(move |r| (p, r)))
        .collect();
    let values: Vec<f64> = jobs
        .par_iter()
        .map(|&(p, r)| run_disequilibrium(&point_params[p], config.seed, r as u64, horizon, window))
        .collect::<Result<_>>()?;

    let points = config
        .cmax_values
        .iter()
        .zip(values.chunks(runs))
        .map(|(&c_max, vals)| SweepPoint {
            c_max,
            values: vals.to_vec(),
            mean: vals.iter().sum::<f64>() / vals.len() as f64,
            substreams: (0..runs as u64).collect(),
        })
        .collect();
    Ok(SweepResult {
        seed: config.seed,
        alpha: base.alpha,
        delta: base.delta,
        points,
    })
}
