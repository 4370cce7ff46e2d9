#![allow(dead_code)]

use std::collections::VecDeque;

use herdsim::{Agent, Draws, Holding, MarketState, ModelParams, RandomStream};

/// Replays pre-drawn Gaussian and unit-uniform values.
#[derive(Debug, Clone)]
pub struct Script {
    pub gaussians: VecDeque<f64>,
    pub units: VecDeque<f64>,
}

impl Script {
    pub fn new(gaussians: Vec<f64>, units: Vec<f64>) -> Self {
        Self {
            gaussians: gaussians.into(),
            units: units.into(),
        }
    }
}

impl Draws for Script {
    fn gaussian(&mut self) -> f64 {
        self.gaussians.pop_front().expect("script ran out of gaussians")
    }
    fn unit(&mut self) -> f64 {
        self.units.pop_front().expect("script ran out of uniforms")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleAgent {
    pub holds: bool,
    pub lo: f64,
    pub hi: f64,
    pub w: f64,
    pub c: f64,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub agents: Vec<OracleAgent>,
    pub log_price: f64,
    pub price: f64,
    pub sigma: f64,
    pub switches: usize,
    pub iterations: usize,
}

fn sentiment(agents: &[OracleAgent]) -> f64 {
    let mut held = 0.0;
    let mut total = 0.0;
    for a in agents {
        if a.holds {
            held += a.w;
        }
        total += a.w;
    }
    2.0 / total * held - 1.0
}

/// Straight-line restatement of the timestep rules, consuming draws from
/// plain slices by index: drift every threshold, then repeatedly flip every
/// not-yet-switched agent whose interval excludes the price, reprice, reset
/// the flipped agents; finally re-centre switched agents left outside.
#[allow(clippy::too_many_arguments)]
pub fn oracle_step(
    start: &[OracleAgent],
    price0: f64,
    log_price0: f64,
    eta: f64,
    h: f64,
    kappa: f64,
    alpha: f64,
    reset: (f64, f64),
    gaussians: &[f64],
    units: &[f64],
) -> OracleResult {
    let mut agents = start.to_vec();
    let mut gi = 0;
    let mut ui = 0;
    let p0 = price0;
    let sigma0 = sentiment(&agents);

    for a in agents.iter_mut() {
        let sd = (h * a.d).sqrt();
        let n_lo = sd * gaussians[gi];
        let n_hi = sd * gaussians[gi + 1];
        gi += 2;
        let minority = if a.holds { sigma0 < 0.0 } else { sigma0 > 0.0 };
        if minority {
            let push = a.c * h * sigma0.abs();
            a.lo += p0 * (push + n_lo);
            a.hi -= p0 * (push + n_hi);
        } else {
            a.lo += p0 * n_lo;
            a.hi += p0 * n_hi;
        }
    }

    let shock = h.sqrt() * eta - h / 2.0;
    let base = log_price0 + shock * (1.0 + alpha * sigma0.abs());
    let mut log_p = base;
    let mut p = log_p.exp();
    let mut sigma = sigma0;
    let mut done = vec![false; agents.len()];
    let mut switches = 0;
    let mut iterations = 0;
    loop {
        let mut batch = Vec::new();
        for i in 0..agents.len() {
            let a = &agents[i];
            let inside = a.lo <= p && p <= a.hi;
            if !done[i] && !inside {
                batch.push(i);
            }
        }
        if batch.is_empty() {
            break;
        }
        iterations += 1;
        switches += batch.len();
        for &i in &batch {
            agents[i].holds = !agents[i].holds;
            done[i] = true;
        }
        sigma = sentiment(&agents);
        log_p = base + kappa * (sigma - sigma0);
        p = log_p.exp();
        for &i in &batch {
            let zl = reset.0 + (reset.1 - reset.0) * units[ui];
            let zu = reset.0 + (reset.1 - reset.0) * units[ui + 1];
            ui += 2;
            agents[i].lo = p / (1.0 + zl);
            agents[i].hi = p * (1.0 + zu);
        }
    }
    for i in 0..agents.len() {
        let a = &agents[i];
        if done[i] && !(a.lo <= p && p <= a.hi) {
            let zl = reset.0 + (reset.1 - reset.0) * units[ui];
            let zu = reset.0 + (reset.1 - reset.0) * units[ui + 1];
            ui += 2;
            agents[i].lo = p / (1.0 + zl);
            agents[i].hi = p * (1.0 + zu);
        }
    }
    OracleResult {
        agents,
        log_price: log_p,
        price: p,
        sigma,
        switches,
        iterations,
    }
}

pub fn to_oracle(agents: &[Agent]) -> Vec<OracleAgent> {
    agents
        .iter()
        .map(|a| OracleAgent {
            holds: a.state == Holding::In,
            lo: a.lower,
            hi: a.upper,
            w: a.weight,
            c: a.herding,
            d: a.threshold_volatility,
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct MicroCase {
    pub agents: Vec<Agent>,
    pub price: f64,
    pub eta: f64,
    pub params: ModelParams,
    pub gaussians: Vec<f64>,
    pub units: Vec<f64>,
}

/// Random population of 1-3 agents with intervals tight enough around the
/// price that crossings and cascades are common.
pub fn micro_case(rng: &mut RandomStream) -> MicroCase {
    let m = 1 + (rng.uniform(0.0, 3.0).unwrap() as usize).min(2);
    let price = rng.uniform(0.5, 2.0).unwrap();
    let pick = |rng: &mut RandomStream, xs: &[f64]| {
        xs[(rng.uniform(0.0, xs.len() as f64).unwrap() as usize).min(xs.len() - 1)]
    };
    let mut agents = Vec::with_capacity(m);
    for _ in 0..m {
        let lo_gap = rng.uniform(-0.02, 0.12).unwrap();
        let hi_gap = rng.uniform(-0.02, 0.12).unwrap();
        agents.push(Agent {
            state: if rng.uniform(0.0, 1.0).unwrap() < 0.5 { Holding::In } else { Holding::Out },
            lower: price * (1.0 - lo_gap),
            upper: price * (1.0 + hi_gap),
            weight: pick(rng, &[1.0, 1.0, 0.5, 2.0, 3.0]),
            herding: rng.uniform(0.0, 200.0).unwrap(),
            threshold_volatility: pick(rng, &[0.0, 0.2, 1.0]),
        });
    }
    let h = pick(rng, &[0.000004, 0.0025, 0.01]);
    let params = ModelParams {
        h,
        kappa: pick(rng, &[0.0, 0.1, 0.3, 0.6]),
        alpha: pick(rng, &[0.0, 1.0]),
        num_agents: m,
        ..ModelParams::default()
    };
    let eta = 2.0 * rng.gaussian();
    let gaussians = (0..2 * m).map(|_| rng.gaussian()).collect();
    let units = (0..4 * m).map(|_| rng.uniform(0.0, 1.0).unwrap()).collect();
    MicroCase {
        agents,
        price,
        eta,
        params,
        gaussians,
        units,
    }
}

/// Runs one micro-case through both paths; returns a description of the
/// first mismatch, or the cascade depth on agreement.
pub fn compare_micro_case(case: &MicroCase) -> Result<usize, String> {
    let mut market = MarketState::from_agents(case.price, case.agents.clone()).unwrap();
    let log0 = market.log_price;
    let mut script = Script::new(case.gaussians.clone(), case.units.clone());
    let out = herdsim::market::resolve_timestep(&mut market, case.eta, &case.params, &mut script)
        .map_err(|e| e.to_string())?;
    let want = oracle_step(
        &to_oracle(&case.agents),
        case.price,
        log0,
        case.eta,
        case.params.h,
        case.params.kappa,
        case.params.alpha,
        (case.params.reset_lo, case.params.reset_hi),
        &case.gaussians,
        &case.units,
    );
    let got = to_oracle(&market.agents);
    let same = |a: f64, b: f64| a.to_bits() == b.to_bits();
    if out.switch_count != want.switches || out.cascade_iterations != want.iterations {
        return Err(format!(
            "counts: got ({}, {}), want ({}, {})",
            out.switch_count, out.cascade_iterations, want.switches, want.iterations
        ));
    }
    if !same(market.log_price, want.log_price) || !same(market.sigma, want.sigma) || !same(market.price, want.price) {
        return Err(format!(
            "price/sigma: got ({}, {}), want ({}, {})",
            market.log_price, market.sigma, want.log_price, want.sigma
        ));
    }
    for (i, (g, w)) in got.iter().zip(&want.agents).enumerate() {
        if g.holds != w.holds || !same(g.lo, w.lo) || !same(g.hi, w.hi) {
            return Err(format!("agent {i}: got {g:?}, want {w:?}"));
        }
    }
    Ok(out.cascade_iterations)
}
