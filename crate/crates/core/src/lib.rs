//! Agent-based asset market in which slow agents with moving price thresholds
//! and herding pressure perturb a geometric-Brownian equilibrium price.
//!
//! * [`stochastic`]: seedable random streams and the draw-source trait.
//! * [`market`]: agents, threshold dynamics, price law and cascades.
//! * [`stats`]: daily returns, kurtosis, autocorrelation, Hill tail index,
//!   threshold histograms.
//! * [`experiments`]: scenario runs with a GBM baseline and herding sweeps.
//! * [`cli_io`]: JSON configuration, CSV/JSON outputs and the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli_io;
pub mod error;
pub mod experiments;
pub mod market;
pub mod stats;
pub mod stochastic;

pub use error::{Error, Result};
pub use experiments::{
    bifurcation_sweep, max_abs_sigma, run_scenario, ScenarioOptions, Simulation, SimulationOutput,
    SweepConfig, SweepResult,
};
pub use market::{Agent, Holding, MarketState, ModelParams, StepOutcome, WeightScheme};
pub use stochastic::{Draws, RandomStream};
