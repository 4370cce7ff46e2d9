//! Slow-agent population, threshold dynamics and the per-timestep cascade.
//!
//! The log price evolves as
//!
//! ```text
//! P(n) = P(n-1) + (sqrt(h) * eta - h/2) * f(sigma(n-1)) + kappa * (sigma(n) - sigma(n-1))
//! ```
//!
//! with `f(sigma) = 1 + alpha * |sigma|`. Each slow agent holds either nothing
//! or `w_i` units and keeps its position while the price stays inside its
//! comfort interval `[lower, upper]`. Thresholds diffuse every step and, for
//! agents on the minority side of `sigma`, also drift inwards at rate
//! `C_i * h * |sigma|`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::stochastic::{check_range, Draws};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Holding {
    /// Holds none of the asset (`s_i = 0`).
    Out,
    /// Holds `w_i` units (`s_i = +1`).
    In,
}

impl Holding {
    #[inline]
    pub fn value(self) -> f64 {
        match self {
            Holding::Out => 0.0,
            Holding::In => 1.0,
        }
    }

    #[inline]
    pub fn flipped(self) -> Self {
        match self {
            Holding::Out => Holding::In,
            Holding::In => Holding::Out,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Agent {
    pub state: Holding,
    pub lower: f64,
    pub upper: f64,
    pub weight: f64,
    /// Herding coefficient `C_i` per unit time.
    pub herding: f64,
    /// Threshold diffusion `delta_i`; the per-step noise variance is `h * delta_i`.
    pub threshold_volatility: f64,
}

impl Agent {
    /// Minority side of the current sentiment. Nobody is in the minority at `sigma == 0`.
    #[inline]
    pub fn is_minority(&self, sigma: f64) -> bool {
        match self.state {
            Holding::In => sigma < 0.0,
            Holding::Out => sigma > 0.0,
        }
    }

    #[inline]
    pub fn contains(&self, price: f64) -> bool {
        self.lower <= price && price <= self.upper
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightScheme {
    Unit,
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelParams {
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
    pub weights: WeightScheme,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            h: 0.000004,
            kappa: 0.1,
            alpha: 1.0,
            num_agents: 100_000,
            steps_per_day: 10,
            reset_lo: 0.05,
            reset_hi: 0.25,
            herding_lo: 25.0,
            herding_hi: 100.0,
            delta: 0.2,
            initial_price: 1.0,
            initial_sigma: 0.0,
            weights: WeightScheme::Unit,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        fn finite(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, "must be finite"))
            }
        }
        for (name, v) in [
            ("h", self.h),
            ("kappa", self.kappa),
            ("alpha", self.alpha),
            ("reset_lo", self.reset_lo),
            ("reset_hi", self.reset_hi),
            ("herding_lo", self.herding_lo),
            ("herding_hi", self.herding_hi),
            ("delta", self.delta),
            ("initial_price", self.initial_price),
            ("initial_sigma", self.initial_sigma),
        ] {
            finite(name, v)?;
        }
        if self.h <= 0.0 {
            return Err(Error::param("h", "must be > 0"));
        }
        for (name, v) in [
            ("kappa", self.kappa),
            ("alpha", self.alpha),
            ("delta", self.delta),
            ("herding_lo", self.herding_lo),
        ] {
            if v < 0.0 {
                return Err(Error::param(name, "must be >= 0"));
            }
        }
        if self.num_agents == 0 {
            return Err(Error::param("num_agents", "must be >= 1"));
        }
        if self.steps_per_day == 0 {
            return Err(Error::param("steps_per_day", "must be >= 1"));
        }
        if self.reset_lo <= 0.0 {
            return Err(Error::param("reset_lo", "must be > 0"));
        }
        if self.reset_lo > self.reset_hi {
            return Err(Error::param("reset_hi", "must be >= reset_lo"));
        }
        if self.herding_lo > self.herding_hi {
            return Err(Error::param("herding_hi", "must be >= herding_lo"));
        }
        if self.initial_price <= 0.0 {
            return Err(Error::param("initial_price", "must be > 0"));
        }
        if self.initial_sigma.abs() > 1.0 {
            return Err(Error::param("initial_sigma", "must lie in [-1, 1]"));
        }
        if let WeightScheme::Explicit(w) = &self.weights {
            if w.len() != self.num_agents {
                return Err(Error::param(
                    "weights",
                    format!("expected {} entries, got {}", self.num_agents, w.len()),
                ));
            }
            if w.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(Error::param("weights", "every weight must be finite and > 0"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarketState {
    pub price: f64,
    pub log_price: f64,
    pub sigma: f64,
    pub step: u64,
    pub agents: Vec<Agent>,
    pub total_weight: f64,
    #[serde(skip)]
    switched: Vec<bool>,
}

impl MarketState {
    /// Assembles a state from an explicit population; `sigma` is computed from it.
    pub fn from_agents(price: f64, agents: Vec<Agent>) -> Result<Self> {
        if !(price.is_finite() && price > 0.0) {
            return Err(Error::param("price", "must be finite and > 0"));
        }
        let sigma = compute_sigma(&agents)?;
        let total_weight = agents.iter().map(|a| a.weight).sum();
        let switched = vec![false; agents.len()];
        Ok(Self {
            price,
            log_price: price.ln(),
            sigma,
            step: 0,
            agents,
            total_weight,
            switched,
        })
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    /// Number of agents whose interval does not contain the current price.
    pub fn uncontained(&self) -> usize {
        self.agents.iter().filter(|a| !a.contains(self.price)).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepOutcome {
    pub new_price: f64,
    pub new_sigma: f64,
    pub switch_count: usize,
    pub cascade_iterations: usize,
}

/// `sigma = (2 / W) * sum(s_i * w_i) - 1`.
pub fn compute_sigma(agents: &[Agent]) -> Result<f64> {
    if agents.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    let (held, total) = agents.iter().fold((0.0, 0.0), |(held, total), a| {
        (held + a.state.value() * a.weight, total + a.weight)
    });
    if !(total > 0.0) {
        return Err(Error::param("weights", "total weight must be > 0"));
    }
    Ok(2.0 / total * held - 1.0)
}

/// Exogenous log-price increment `sqrt(h) * eta - h / 2`.
pub fn information_shock(eta: f64, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::param("h", "must be > 0"));
    }
    Ok(h.sqrt() * eta - h / 2.0)
}

#[inline]
pub fn fast_agent_factor(sigma: f64, alpha: f64) -> f64 {
    1.0 + alpha * sigma.abs()
}

pub fn apply_price_update(
    prev_price: f64,
    shock: f64,
    f_value: f64,
    kappa: f64,
    delta_sigma: f64,
) -> Result<f64> {
    for v in [prev_price, shock, f_value, kappa, delta_sigma] {
        if !v.is_finite() {
            return Err(Error::NonFinite("price update"));
        }
    }
    if prev_price <= 0.0 {
        return Err(Error::param("prev_price", "must be > 0"));
    }
    let p = prev_price * (shock * f_value + kappa * delta_sigma).exp();
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::NonFinite("price update"));
    }
    Ok(p)
}

#[inline]
fn drift_with_scale<D: Draws + ?Sized>(
    agent: &Agent,
    price: f64,
    sigma: f64,
    h: f64,
    noise_sd: f64,
    draws: &mut D,
) -> (f64, f64) {
    let noise_lo = noise_sd * draws.gaussian();
    let noise_hi = noise_sd * draws.gaussian();
    if agent.is_minority(sigma) {
        let squeeze = agent.herding * h * sigma.abs();
        (
            agent.lower + price * (squeeze + noise_lo),
            agent.upper - price * (squeeze + noise_hi),
        )
    } else {
        (agent.lower + price * noise_lo, agent.upper + price * noise_hi)
    }
}

/// One step of threshold motion. Consumes two Gaussians (lower, then upper).
///
/// Majority agents diffuse: `L += p * N(0, h * delta)`, `U += p * N(0, h * delta)`.
/// Minority agents are additionally squeezed: `L += p * (C h |sigma| + N)`,
/// `U -= p * (C h |sigma| + N)`.
pub fn drift_thresholds<D: Draws + ?Sized>(
    agent: &Agent,
    price: f64,
    sigma: f64,
    h: f64,
    draws: &mut D,
) -> (f64, f64) {
    let sd = (h * agent.threshold_volatility).sqrt();
    drift_with_scale(agent, price, sigma, h, sd, draws)
}

/// Strict crossing test; an inverted interval always triggers.
#[inline]
pub fn needs_switch(agent: &Agent, price: f64) -> bool {
    price < agent.lower || price > agent.upper || agent.lower > agent.upper
}

/// Fresh interval `[p / (1 + Z_L), p * (1 + Z_U)]`, drawing `Z_L` then `Z_U`.
pub fn reset_thresholds<D: Draws + ?Sized>(
    switch_price: f64,
    reset_lo: f64,
    reset_hi: f64,
    draws: &mut D,
) -> Result<(f64, f64)> {
    check_range(reset_lo, reset_hi)?;
    if reset_lo < 0.0 {
        return Err(Error::param("reset_lo", "must be >= 0"));
    }
    let z_lower = draws.uniform(reset_lo, reset_hi)?;
    let z_upper = draws.uniform(reset_lo, reset_hi)?;
    Ok((switch_price / (1.0 + z_lower), switch_price * (1.0 + z_upper)))
}

/// Advances the market by one timestep given the information draw `eta`.
///
/// All thresholds first move using the previous price and sentiment. The
/// candidate price carries only the information shock; then every agent whose
/// interval excludes the price and that has not yet switched this step flips,
/// as one batch. The batch moves the log price by `kappa * delta_sigma`
/// relative to the shock-only candidate and the batch is reset around the new
/// price. Batches repeat until nobody else crosses. `f` stays frozen at
/// `sigma(n-1)` throughout. Agents that switched earlier in the step and were
/// left outside their interval by a later batch are re-centred on the final
/// price without switching again.
pub fn resolve_timestep<D: Draws + ?Sized>(
    market: &mut MarketState,
    eta: f64,
    params: &ModelParams,
    draws: &mut D,
) -> Result<StepOutcome> {
    if !eta.is_finite() {
        return Err(Error::NonFinite("eta"));
    }
    let h = params.h;
    let shock = information_shock(eta, h)?;
    let prev_price = market.price;
    let prev_sigma = market.sigma;
    let base_log = market.log_price + shock * fast_agent_factor(prev_sigma, params.alpha);

    let mut log_price = base_log;
    let mut price = log_price.exp();

    let n = market.agents.len();
    if market.switched.len() != n {
        market.switched = vec![false; n];
    }
    let mut batch: Vec<usize> = Vec::new();

    // Drift, fused with the first crossing scan.
    let mut cached_delta = f64::NAN;
    let mut sd = 0.0;
    for (i, agent) in market.agents.iter_mut().enumerate() {
        if agent.threshold_volatility != cached_delta {
            cached_delta = agent.threshold_volatility;
            sd = (h * cached_delta).sqrt();
        }
        let (lower, upper) = drift_with_scale(agent, prev_price, prev_sigma, h, sd, draws);
        agent.lower = lower;
        agent.upper = upper;
        if needs_switch(agent, price) {
            batch.push(i);
        }
    }

    let mut switch_count = 0;
    let mut cascade_iterations = 0;
    let mut sigma = prev_sigma;
    while !batch.is_empty() {
        cascade_iterations += 1;
        switch_count += batch.len();
        for &i in &batch {
            let agent = &mut market.agents[i];
            agent.state = agent.state.flipped();
            market.switched[i] = true;
        }
        sigma = compute_sigma(&market.agents)?;
        log_price = base_log + params.kappa * (sigma - prev_sigma);
        price = log_price.exp();
        for &i in &batch {
            let (lower, upper) = reset_thresholds(price, params.reset_lo, params.reset_hi, draws)?;
            let agent = &mut market.agents[i];
            agent.lower = lower;
            agent.upper = upper;
        }
        batch.clear();
        batch.extend(
            market
                .agents
                .iter()
                .zip(&market.switched)
                .enumerate()
                .filter(|(_, (a, &done))| !done && needs_switch(a, price))
                .map(|(i, _)| i),
        );
    }

    if switch_count > 0 {
        for (agent, done) in market.agents.iter_mut().zip(market.switched.iter_mut()) {
            if *done {
                if !agent.contains(price) {
                    let (lower, upper) =
                        reset_thresholds(price, params.reset_lo, params.reset_hi, draws)?;
                    agent.lower = lower;
                    agent.upper = upper;
                }
                *done = false;
            }
        }
    }

    if !(price.is_finite() && price > 0.0) {
        return Err(Error::NonFinite("price"));
    }
    market.price = price;
    market.log_price = log_price;
    market.sigma = sigma;
    market.step += 1;
    Ok(StepOutcome {
        new_price: price,
        new_sigma: sigma,
        switch_count,
        cascade_iterations,
    })
}

/// Builds the initial population.
///
/// The first `round(M * (1 + sigma0) / 2)` agents hold the asset. Per agent,
/// in index order, draws are `Z_L`, `Z_U` (interval around the initial price)
/// then `C_i ~ U[herding_lo, herding_hi]`.
pub fn init_market<D: Draws + ?Sized>(params: &ModelParams, draws: &mut D) -> Result<MarketState> {
    params.validate()?;
    let m = params.num_agents;
    let holders = initial_holders(m, params.initial_sigma)?;
    let mut agents = Vec::with_capacity(m);
    for i in 0..m {
        let (lower, upper) =
            reset_thresholds(params.initial_price, params.reset_lo, params.reset_hi, draws)?;
        let herding = draws.uniform(params.herding_lo, params.herding_hi)?;
        let weight = match &params.weights {
            WeightScheme::Unit => 1.0,
            WeightScheme::Explicit(w) => w[i],
        };
        agents.push(Agent {
            state: if i < holders { Holding::In } else { Holding::Out },
            lower,
            upper,
            weight,
            herding,
            threshold_volatility: params.delta,
        });
    }
    MarketState::from_agents(params.initial_price, agents)
}

/// Number of agents starting in the holding state for a target sentiment.
pub fn initial_holders(num_agents: usize, initial_sigma: f64) -> Result<usize> {
    if !(initial_sigma.abs() <= 1.0) {
        return Err(Error::param("initial_sigma", "must lie in [-1, 1]"));
    }
    Ok((num_agents as f64 * (1.0 + initial_sigma) / 2.0).round() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::RandomStream;

    /// Replays fixed Gaussian and unit-uniform values.
    struct Scripted {
        gaussians: Vec<f64>,
        units: Vec<f64>,
    }

    impl Draws for Scripted {
        fn gaussian(&mut self) -> f64 {
            self.gaussians.remove(0)
        }
        fn unit(&mut self) -> f64 {
            self.units.remove(0)
        }
    }

    fn agent(state: Holding, lower: f64, upper: f64) -> Agent {
        Agent {
            state,
            lower,
            upper,
            weight: 1.0,
            herding: 0.0,
            threshold_volatility: 0.0,
        }
    }

    #[test]
    fn sigma_examples() {
        let all_in = vec![
            Agent { weight: 3.5, ..agent(Holding::In, 0.9, 1.1) },
            agent(Holding::In, 0.9, 1.1),
        ];
        assert_eq!(compute_sigma(&all_in).unwrap(), 1.0);
        let half = vec![agent(Holding::In, 0.9, 1.1), agent(Holding::Out, 0.9, 1.1)];
        assert_eq!(compute_sigma(&half).unwrap(), 0.0);
        let skew = vec![
            agent(Holding::In, 0.9, 1.1),
            Agent { weight: 3.0, ..agent(Holding::Out, 0.9, 1.1) },
        ];
        assert_eq!(compute_sigma(&skew).unwrap(), -0.5);
        assert!(matches!(compute_sigma(&[]), Err(Error::EmptyPopulation)));
    }

    #[test]
    fn shock_examples() {
        let h = 0.000004;
        assert!((information_shock(0.0, h).unwrap() + 2e-6).abs() < 1e-18);
        assert!((information_shock(1.0, h).unwrap() - 0.001998).abs() < 1e-15);
        assert!((information_shock(-1.0, h).unwrap() + 0.002002).abs() < 1e-15);
        assert!(information_shock(1.0, 0.0).is_err());
        assert!(information_shock(1.0, -1.0).is_err());
    }

    #[test]
    fn fast_agent_examples() {
        assert_eq!(fast_agent_factor(0.0, 1.0), 1.0);
        assert_eq!(fast_agent_factor(1.0, 1.0), 2.0);
        assert_eq!(fast_agent_factor(-1.0, 1.0), 2.0);
        assert_eq!(fast_agent_factor(0.5, 0.0), 1.0);
    }

    #[test]
    fn price_update_examples() {
        assert_eq!(apply_price_update(100.0, 0.0, 1.0, 0.3, 0.0).unwrap(), 100.0);
        let p = apply_price_update(100.0, 0.0, 1.0, 0.1, 0.5).unwrap();
        assert!((p - 105.127_109_637_602_4).abs() < 1e-9);
        let p = apply_price_update(1.0, 0.001998, 1.0, 0.0, 0.7).unwrap();
        assert!((p - 0.001998_f64.exp()).abs() < 1e-15);
        assert!(apply_price_update(f64::NAN, 0.0, 1.0, 0.1, 0.0).is_err());
        assert!(apply_price_update(1.0, f64::INFINITY, 1.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn majority_without_noise_is_static() {
        let a = Agent { herding: 80.0, ..agent(Holding::In, 90.0, 110.0) };
        let mut s = RandomStream::new(0, 0);
        assert_eq!(drift_thresholds(&a, 100.0, 0.4, 4e-6, &mut s), (90.0, 110.0));
    }

    #[test]
    fn minority_squeeze() {
        let a = Agent { herding: 100.0, ..agent(Holding::Out, 90.0, 110.0) };
        let mut s = RandomStream::new(0, 0);
        let (lo, hi) = drift_thresholds(&a, 100.0, 0.5, 4e-6, &mut s);
        assert!((lo - 90.02).abs() < 1e-12);
        assert!((hi - 109.98).abs() < 1e-12);
        let b = Agent { state: Holding::In, ..a };
        let (lo, hi) = drift_thresholds(&b, 100.0, -0.5, 4e-6, &mut s);
        assert!((lo - 90.02).abs() < 1e-12);
        assert!((hi - 109.98).abs() < 1e-12);
    }

    #[test]
    fn zero_sigma_has_no_drift() {
        let a = Agent {
            herding: 100.0,
            threshold_volatility: 0.2,
            ..agent(Holding::Out, 90.0, 110.0)
        };
        let b = Agent { state: Holding::In, ..a.clone() };
        let mut s1 = RandomStream::new(8, 0);
        let mut s2 = RandomStream::new(8, 0);
        assert_eq!(
            drift_thresholds(&a, 100.0, 0.0, 4e-6, &mut s1),
            drift_thresholds(&b, 100.0, 0.0, 4e-6, &mut s2)
        );
    }

    #[test]
    fn noise_uses_variance_h_delta() {
        let a = Agent { threshold_volatility: 0.2, ..agent(Holding::In, 90.0, 110.0) };
        let mut s = Scripted { gaussians: vec![1.0, -2.0], units: vec![] };
        let (lo, hi) = drift_thresholds(&a, 100.0, 0.3, 4e-6, &mut s);
        let sd = (4e-6_f64 * 0.2).sqrt();
        assert!((lo - (90.0 + 100.0 * sd)).abs() < 1e-12);
        assert!((hi - (110.0 - 200.0 * sd)).abs() < 1e-12);
    }

    #[test]
    fn switch_examples() {
        assert!(!needs_switch(&agent(Holding::In, 95.0, 105.0), 100.0));
        assert!(needs_switch(&agent(Holding::In, 95.0, 105.0), 105.2));
        assert!(needs_switch(&agent(Holding::In, 95.0, 105.0), 94.9));
        assert!(needs_switch(&agent(Holding::In, 101.0, 99.0), 100.0));
        // boundary is not a crossing
        assert!(!needs_switch(&agent(Holding::In, 95.0, 105.0), 105.0));
    }

    #[test]
    fn reset_examples() {
        let mut s = Scripted { gaussians: vec![], units: vec![0.0, 0.0, 1.0, 1.0] };
        let (lo, hi) = reset_thresholds(100.0, 0.05, 0.25, &mut s).unwrap();
        assert!((lo - 95.238_095_238_095_24).abs() < 1e-10);
        assert!((hi - 105.0).abs() < 1e-12);
        let (lo, hi) = reset_thresholds(100.0, 0.05, 0.25, &mut s).unwrap();
        assert!((lo - 80.0).abs() < 1e-12);
        assert!((hi - 125.0).abs() < 1e-12);
        let mut r = RandomStream::new(1, 1);
        for p in [1e-3, 0.7, 1.0, 42.0, 1e6] {
            let (lo, hi) = reset_thresholds(p, 0.05, 0.25, &mut r).unwrap();
            assert!(lo < p && p < hi);
        }
        assert!(reset_thresholds(1.0, 0.3, 0.2, &mut r).is_err());
    }

    fn quiet_params(m: usize) -> ModelParams {
        ModelParams {
            num_agents: m,
            delta: 0.0,
            herding_lo: 0.0,
            herding_hi: 0.0,
            ..ModelParams::default()
        }
    }

    #[test]
    fn quiescent_step() {
        let params = ModelParams { alpha: 1.0, ..quiet_params(2) };
        let agents = vec![agent(Holding::In, 0.5, 2.0), agent(Holding::In, 0.5, 2.0)];
        let mut m = MarketState::from_agents(1.0, agents).unwrap();
        m.agents[1].state = Holding::Out;
        m.sigma = compute_sigma(&m.agents).unwrap();
        let mut s = RandomStream::new(0, 0);
        let out = resolve_timestep(&mut m, 0.7, &params, &mut s).unwrap();
        assert_eq!(out.switch_count, 0);
        assert_eq!(out.cascade_iterations, 0);
        assert_eq!(m.sigma, 0.0);
        let expected = (information_shock(0.7, params.h).unwrap()).exp();
        assert!((m.price - expected).abs() < 1e-15);
        assert_eq!(m.step, 1);
    }

    #[test]
    fn single_agent_hand_trace() {
        // h chosen so that sqrt(h) * eta - h/2 = 0.3 exactly enough: use h=0.04, eta solving it.
        let h: f64 = 0.04;
        let eta = (0.3 + h / 2.0) / h.sqrt();
        let params = ModelParams { h, kappa: 0.1, alpha: 0.0, ..quiet_params(1) };
        let mut m = MarketState::from_agents(1.0, vec![agent(Holding::In, 0.8, 1.2)]).unwrap();
        assert_eq!(m.sigma, 1.0);
        let mut s = Scripted { gaussians: vec![0.0, 0.0], units: vec![0.5, 0.5] };
        let out = resolve_timestep(&mut m, eta, &params, &mut s).unwrap();
        assert_eq!(out.switch_count, 1);
        assert_eq!(out.cascade_iterations, 1);
        assert_eq!(m.agents[0].state, Holding::Out);
        assert_eq!(m.sigma, -1.0);
        assert!((m.price - 0.1_f64.exp()).abs() < 1e-12);
        assert!((m.log_price - 0.1).abs() < 1e-12);
        // interval reset around the post-switch price with Z = 0.15
        assert!((m.agents[0].lower - m.price / 1.15).abs() < 1e-12);
        assert!((m.agents[0].upper - m.price * 1.15).abs() < 1e-12);
    }

    #[test]
    fn two_agent_chain() {
        // A (holding) has U just below the shocked price; its exit pushes the
        // price down by 2 * kappa / W = 0.1 in log terms, through B's lower threshold.
        let h: f64 = 0.04;
        let eta = (0.05 + h / 2.0) / h.sqrt();
        let params = ModelParams { h, kappa: 0.1, alpha: 0.0, ..quiet_params(2) };
        let agents = vec![agent(Holding::In, 0.5, 1.04), agent(Holding::In, 0.99, 1.5)];
        let mut m = MarketState::from_agents(1.0, agents).unwrap();
        let mut s = Scripted { gaussians: vec![0.0; 4], units: vec![0.5; 8] };
        let out = resolve_timestep(&mut m, eta, &params, &mut s).unwrap();
        assert_eq!(out.cascade_iterations, 2);
        assert_eq!(out.switch_count, 2);
        assert_eq!(m.sigma, -1.0);
        assert!((m.log_price - (0.05 - 0.2)).abs() < 1e-12);
        assert_eq!(m.uncontained(), 0);
    }

    #[test]
    fn init_split() {
        let mut s = RandomStream::new(3, 0);
        let p = ModelParams { num_agents: 1000, ..ModelParams::default() };
        let m = init_market(&p, &mut s).unwrap();
        assert_eq!(m.agents.iter().filter(|a| a.state == Holding::In).count(), 500);
        let p = ModelParams { initial_sigma: 0.05, ..p };
        let m = init_market(&p, &mut s).unwrap();
        assert_eq!(m.agents.iter().filter(|a| a.state == Holding::In).count(), 525);
        assert!((m.sigma - 0.05).abs() <= 2.0 / 1000.0);
        assert!(m.agents.iter().all(|a| (25.0..=100.0).contains(&a.herding)));
        assert_eq!(m.uncontained(), 0);
        let bad = ModelParams { initial_sigma: 1.5, ..p };
        assert!(init_market(&bad, &mut s).is_err());
    }

    #[test]
    fn explicit_weights() {
        let mut s = RandomStream::new(3, 0);
        let p = ModelParams {
            num_agents: 3,
            weights: WeightScheme::Explicit(vec![1.0, 2.0, 3.0]),
            ..ModelParams::default()
        };
        let m = init_market(&p, &mut s).unwrap();
        assert_eq!(m.total_weight, 6.0);
        let short = ModelParams { weights: WeightScheme::Explicit(vec![1.0]), ..p };
        assert!(init_market(&short, &mut s).is_err());
    }
}
