use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::experiments::{steps_for_years, ScenarioOptions, SweepConfig};
use crate::market::{ModelParams, WeightScheme};
use crate::stats::uniform_edges;

/// JSON run configuration. Missing keys take the calibrated defaults;
/// unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub h: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub num_agents: usize,
    pub steps_per_day: usize,
    pub reset_lo: f64,
    pub reset_hi: f64,
    pub herding_lo: f64,
    pub herding_hi: f64,
    pub delta: f64,
    pub initial_price: f64,
    pub initial_sigma: f64,
    /// Explicit per-agent weights; `null` means unit weights.
    pub weights: Option<Vec<f64>>,

    pub seed: u64,
    pub substream: u64,
    pub horizon_years: f64,
    pub window_years: f64,
    pub cmax_values: Vec<f64>,
    pub runs_per_point: usize,
    pub sweep_initial_sigma: f64,
    pub output_dir: Option<String>,
    pub snapshot_times: Vec<f64>,
    pub snapshot_sigma_tol: f64,
    pub density_bins: usize,
    pub acf_lags: Vec<usize>,
    pub acf_max_lag: usize,
    pub tail_fraction: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let model = ModelParams::default();
        let sweep = SweepConfig::default();
        Self {
            h: model.h,
            kappa: model.kappa,
            alpha: model.alpha,
            num_agents: model.num_agents,
            steps_per_day: model.steps_per_day,
            reset_lo: model.reset_lo,
            reset_hi: model.reset_hi,
            herding_lo: model.herding_lo,
            herding_hi: model.herding_hi,
            delta: model.delta,
            initial_price: model.initial_price,
            initial_sigma: model.initial_sigma,
            weights: None,
            seed: 0,
            substream: 0,
            horizon_years: sweep.horizon_years,
            window_years: sweep.window_years,
            cmax_values: sweep.cmax_values,
            runs_per_point: sweep.runs_per_point,
            sweep_initial_sigma: sweep.initial_sigma,
            output_dir: None,
            snapshot_times: Vec::new(),
            snapshot_sigma_tol: 0.05,
            density_bins: 100,
            acf_lags: vec![1, 5, 10, 20, 50],
            acf_max_lag: 50,
            tail_fraction: 0.05,
        }
    }
}

fn key_error(key: &str, reason: impl std::fmt::Display) -> Error {
    Error::Config(format!("`{key}`: {reason}"))
}

impl RunConfig {
    pub fn model_params(&self) -> ModelParams {
        ModelParams {
            h: self.h,
            kappa: self.kappa,
            alpha: self.alpha,
            num_agents: self.num_agents,
            steps_per_day: self.steps_per_day,
            reset_lo: self.reset_lo,
            reset_hi: self.reset_hi,
            herding_lo: self.herding_lo,
            herding_hi: self.herding_hi,
            delta: self.delta,
            initial_price: self.initial_price,
            initial_sigma: self.initial_sigma,
            weights: match &self.weights {
                None => WeightScheme::Unit,
                Some(w) => WeightScheme::Explicit(w.clone()),
            },
        }
    }

    pub fn scenario_options(&self) -> ScenarioOptions {
        ScenarioOptions {
            horizon_years: self.horizon_years,
            snapshot_times: self.snapshot_times.clone(),
            snapshot_sigma_tol: self.snapshot_sigma_tol,
            bin_edges: uniform_edges(-0.5, 0.5, self.density_bins),
        }
    }

    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            cmax_values: self.cmax_values.clone(),
            runs_per_point: self.runs_per_point,
            horizon_years: self.horizon_years,
            window_years: self.window_years,
            initial_sigma: self.sweep_initial_sigma,
            seed: self.seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model_params().validate().map_err(|e| match e {
            Error::InvalidParameter { name, reason } => key_error(name, reason),
            other => other,
        })?;
        steps_for_years(self.horizon_years, self.steps_per_day)
            .map_err(|e| key_error("horizon_years", e))?;
        steps_for_years(self.window_years, self.steps_per_day)
            .map_err(|e| key_error("window_years", e))?;
        if self.window_years > self.horizon_years {
            return Err(key_error("window_years", "must not exceed horizon_years"));
        }
        if self.cmax_values.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(key_error("cmax_values", "entries must be finite and >= 0"));
        }
        if self.runs_per_point == 0 {
            return Err(key_error("runs_per_point", "must be >= 1"));
        }
        if !(self.sweep_initial_sigma.abs() <= 1.0) {
            return Err(key_error("sweep_initial_sigma", "must lie in [-1, 1]"));
        }
        if self.snapshot_times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(key_error("snapshot_times", "entries must be finite and >= 0"));
        }
        if !(self.snapshot_sigma_tol > 0.0) {
            return Err(key_error("snapshot_sigma_tol", "must be > 0"));
        }
        if self.density_bins == 0 {
            return Err(key_error("density_bins", "must be >= 1"));
        }
        if self.acf_lags.contains(&0) {
            return Err(key_error("acf_lags", "lags must be >= 1"));
        }
        if self.acf_max_lag == 0 {
            return Err(key_error("acf_max_lag", "must be >= 1"));
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 0.5) {
            return Err(key_error("tail_fraction", "must lie in (0, 0.5]"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

pub fn parse_config_str(json: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(json);
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            Error::Config(e.into_inner().to_string())
        } else {
            key_error(&path, e.into_inner())
        }
    })?;
    config.validate()?;
    Ok(config)
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text)
}
