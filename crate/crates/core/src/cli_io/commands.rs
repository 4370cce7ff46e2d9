use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::cli_io::config::{parse_config, RunConfig};
use crate::cli_io::files::{
    daily_returns_csv, density_csv, prices_csv, read_prices, summarize, summary_json, sweep_csv,
    write_atomic, PriceSeries, Summary,
};
use crate::error::{Error, Result};
use crate::experiments::{bifurcation_sweep, run_scenario, SweepResult};

#[derive(Debug, Parser)]
#[command(name = "herdsim", version, about = "Herding market simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single run against the shared-noise GBM baseline.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Disequilibrium sweep over the herding bound `C_max`.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Recompute `summary.json` from a stored `prices.csv`.
    Analyze {
        /// A `prices.csv` file or the directory holding one.
        #[arg(long)]
        input: PathBuf,
        /// Defaults to the `config.json` next to the input.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(config: Option<&Path>, seed: Option<u64>) -> Result<RunConfig> {
    let mut cfg = match config {
        Some(p) => parse_config(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn out_dir(flag: Option<PathBuf>, cfg: &RunConfig) -> Result<PathBuf> {
    flag.or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .ok_or_else(|| Error::Config("no output directory: pass --out or set `output_dir`".into()))
}

fn write_config_echo(out: &Path, cfg: &RunConfig) -> Result<()> {
    let mut text = cfg.to_json_pretty();
    text.push('\n');
    write_atomic(&out.join("config.json"), text.as_bytes())
}

pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<Summary> {
    let params = cfg.model_params();
    let started = Instant::now();
    let output = run_scenario(&params, cfg.seed, cfg.substream, &cfg.scenario_options())?;
    let elapsed = started.elapsed().as_secs_f64();
    let steps = output.num_steps();
    eprintln!(
        "simulated {steps} steps x {} agents in {elapsed:.2}s ({:.3e} agent-updates/s)",
        params.num_agents,
        (steps * params.num_agents) as f64 / elapsed.max(1e-9)
    );

    write_config_echo(out, cfg)?;
    let series = PriceSeries::from(&output);
    write_atomic(&out.join("prices.csv"), &prices_csv(&series)?)?;
    if let (Ok(model), Ok(baseline)) = (output.model_returns(), output.baseline_returns()) {
        write_atomic(&out.join("daily_returns.csv"), &daily_returns_csv(&model, &baseline)?)?;
    }
    for (k, snap) in output.snapshots.iter().enumerate() {
        write_atomic(&out.join(format!("threshold_density_{k}.csv")), &density_csv(&snap.density)?)?;
    }
    let summary = summarize(&series, cfg)?;
    write_atomic(&out.join("summary.json"), &summary_json(&summary))?;
    Ok(summary)
}

pub fn sweep(cfg: &RunConfig, out: &Path, threads: Option<usize>) -> Result<SweepResult> {
    let params = cfg.model_params();
    let sweep_cfg = cfg.sweep_config();
    let job = || bifurcation_sweep(&params, &sweep_cfg);
    let result = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("`threads`: {e}")))?
            .install(job)?,
        None => job()?,
    };
    write_config_echo(out, cfg)?;
    write_atomic(&out.join("sweep.csv"), &sweep_csv(&result)?)?;
    Ok(result)
}

pub fn analyze(input: &Path, config: Option<&Path>, out: &Path) -> Result<Summary> {
    let prices = if input.is_dir() { input.join("prices.csv") } else { input.to_path_buf() };
    let cfg = match config {
        Some(p) => parse_config(p)?,
        None => {
            let echo = prices.parent().unwrap_or(Path::new(".")).join("config.json");
            if echo.exists() {
                parse_config(&echo)?
            } else {
                RunConfig::default()
            }
        }
    };
    let series = read_prices(&prices)?;
    let summary = summarize(&series, &cfg)?;
    write_atomic(&out.join("summary.json"), &summary_json(&summary))?;
    Ok(summary)
}

impl Cli {
    pub fn run(self) -> Result<()> {
        match self.command {
            Command::Simulate { config, seed, out } => {
                let cfg = load(config.as_deref(), seed)?;
                let out = out_dir(out, &cfg)?;
                simulate(&cfg, &out)?;
            }
            Command::Sweep {
                config,
                seed,
                out,
                threads,
            } => {
                let cfg = load(config.as_deref(), seed)?;
                let out = out_dir(out, &cfg)?;
                let started = Instant::now();
                let result = sweep(&cfg, &out, threads)?;
                for p in &result.points {
                    eprintln!("c_max {:>6.1}  mean max|sigma| {:.4}", p.c_max, p.mean);
                }
                eprintln!("sweep finished in {:.1}s", started.elapsed().as_secs_f64());
            }
            Command::Analyze { input, config, out } => {
                analyze(&input, config.as_deref(), &out)?;
            }
        }
        Ok(())
    }
}
