//! C ABI over the `herdsim` simulator.
//!
//! Conventions:
//! * every fallible call returns an [`HsStatus`]; on failure a message is
//!   available from [`hs_last_error_message`] on the same thread;
//! * simulations are opaque [`HsSimulation`] handles released with
//!   [`hs_simulation_free`];
//! * strings returned through `out_json` parameters are owned by the caller
//!   and must be released with [`hs_string_free`];
//! * a NULL `config_json` means the default configuration.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::c_char;

use herdsim::cli_io::files::{summarize, PriceSeries};
use herdsim::cli_io::{parse_config_str, RunConfig};
use herdsim::experiments::{bifurcation_sweep, run_scenario, Simulation};
use herdsim::market::Holding;
use herdsim::stats;
use herdsim::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConfigError = 3,
    NumericError = 4,
    IoError = 5,
    Panic = 6,
}

impl From<&Error> for HsStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Config(_) | Error::Format { .. } => HsStatus::ConfigError,
            Error::NonFinite(_) => HsStatus::NumericError,
            Error::Io { .. } => HsStatus::IoError,
            _ => HsStatus::InvalidArgument,
        }
    }
}

/// Opaque simulation handle.
pub struct HsSimulation {
    sim: Simulation,
}

/// Scalar view of a simulation's current state.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HsMarketState {
    pub step: u64,
    pub num_agents: u64,
    pub price: f64,
    pub log_price: f64,
    pub baseline_log_price: f64,
    pub sigma: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(msg));
}

fn fail(status: HsStatus, msg: impl Into<String>) -> HsStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> Result<(), HsStatus>) -> HsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HsStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(HsStatus::Panic, "internal panic"),
    }
}

fn check(e: Error) -> HsStatus {
    fail(HsStatus::from(&e), e.to_string())
}

unsafe fn config_from(json: *const c_char) -> Result<RunConfig, HsStatus> {
    if json.is_null() {
        return Ok(RunConfig::default());
    }
    let text = CStr::from_ptr(json)
        .to_str()
        .map_err(|_| fail(HsStatus::ConfigError, "config is not valid UTF-8"))?;
    parse_config_str(text).map_err(check)
}

unsafe fn slice<'a>(values: *const f64, len: usize) -> Result<&'a [f64], HsStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if values.is_null() {
        return Err(fail(HsStatus::NullPointer, "values is NULL"));
    }
    Ok(std::slice::from_raw_parts(values, len))
}

fn null_check<T>(p: *const T, name: &str) -> Result<(), HsStatus> {
    if p.is_null() {
        Err(fail(HsStatus::NullPointer, format!("{name} is NULL")))
    } else {
        Ok(())
    }
}

unsafe fn emit_json(value: &impl serde::Serialize, out: *mut *mut c_char) -> Result<(), HsStatus> {
    let text = serde_json::to_string(value).map_err(|e| fail(HsStatus::NumericError, e.to_string()))?;
    let c = CString::new(text).map_err(|e| fail(HsStatus::NumericError, e.to_string()))?;
    *out = c.into_raw();
    Ok(())
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Creates a simulation from a JSON config (see the CLI config schema).
///
/// # Safety
/// `config_json` must be NULL or a NUL-terminated string; `out` must be a
/// valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn hs_simulation_new(
    config_json: *const c_char,
    seed: u64,
    substream: u64,
    out: *mut *mut HsSimulation,
) -> HsStatus {
    guard(|| {
        null_check(out, "out")?;
        *out = ptr::null_mut();
        let cfg = config_from(config_json)?;
        let sim = Simulation::new(cfg.model_params(), seed, substream).map_err(check)?;
        *out = Box::into_raw(Box::new(HsSimulation { sim }));
        Ok(())
    })
}

/// # Safety
/// `sim` must be NULL or a handle from [`hs_simulation_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hs_simulation_free(sim: *mut HsSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Advances `steps` timesteps; the summed switch count is written to
/// `out_switches` when it is not NULL.
///
/// # Safety
/// `sim` must be a live handle; `out_switches` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn hs_simulation_step(
    sim: *mut HsSimulation,
    steps: u64,
    out_switches: *mut u64,
) -> HsStatus {
    guard(|| {
        null_check(sim, "sim")?;
        let sim = &mut (*sim).sim;
        let mut total = 0u64;
        for _ in 0..steps {
            total += sim.step().map_err(check)?.switch_count as u64;
        }
        if !out_switches.is_null() {
            *out_switches = total;
        }
        Ok(())
    })
}

/// # Safety
/// `sim` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hs_simulation_state(
    sim: *const HsSimulation,
    out: *mut HsMarketState,
) -> HsStatus {
    guard(|| {
        null_check(sim, "sim")?;
        null_check(out, "out")?;
        let sim = &(*sim).sim;
        let m = sim.market();
        *out = HsMarketState {
            step: m.step,
            num_agents: m.num_agents() as u64,
            price: m.price,
            log_price: m.log_price,
            baseline_log_price: sim.baseline_log_price(),
            sigma: m.sigma,
        };
        Ok(())
    })
}

/// Copies per-agent thresholds and states (0 or 1) into caller buffers of
/// exactly `len == num_agents` entries. Any buffer may be NULL to skip it.
///
/// # Safety
/// `sim` must be a live handle; non-NULL buffers must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn hs_simulation_agents(
    sim: *const HsSimulation,
    lower: *mut f64,
    upper: *mut f64,
    states: *mut u8,
    len: usize,
) -> HsStatus {
    guard(|| {
        null_check(sim, "sim")?;
        let agents = &(*sim).sim.market().agents;
        if len != agents.len() {
            return Err(fail(
                HsStatus::InvalidArgument,
                format!("buffer length {len} != population {}", agents.len()),
            ));
        }
        for (i, a) in agents.iter().enumerate() {
            if !lower.is_null() {
                *lower.add(i) = a.lower;
            }
            if !upper.is_null() {
                *upper.add(i) = a.upper;
            }
            if !states.is_null() {
                *states.add(i) = u8::from(a.state == Holding::In);
            }
        }
        Ok(())
    })
}

/// Runs one scenario in memory and returns its summary as JSON (the same
/// document the CLI writes to `summary.json`).
///
/// # Safety
/// `config_json` NULL or NUL-terminated; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn hs_simulate_summary_json(
    config_json: *const c_char,
    out_json: *mut *mut c_char,
) -> HsStatus {
    guard(|| {
        null_check(out_json, "out_json")?;
        *out_json = ptr::null_mut();
        let cfg = config_from(config_json)?;
        let output = run_scenario(&cfg.model_params(), cfg.seed, cfg.substream, &cfg.scenario_options())
            .map_err(check)?;
        let summary = summarize(&PriceSeries::from(&output), &cfg).map_err(check)?;
        emit_json(&summary, out_json)
    })
}

/// Runs the `C_max` sweep described by the config; returns the result as JSON.
///
/// # Safety
/// `config_json` NULL or NUL-terminated; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn hs_sweep_json(
    config_json: *const c_char,
    out_json: *mut *mut c_char,
) -> HsStatus {
    guard(|| {
        null_check(out_json, "out_json")?;
        *out_json = ptr::null_mut();
        let cfg = config_from(config_json)?;
        let result = bifurcation_sweep(&cfg.model_params(), &cfg.sweep_config()).map_err(check)?;
        emit_json(&result, out_json)
    })
}

/// # Safety
/// `values` must hold `len` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hs_excess_kurtosis(values: *const f64, len: usize, out: *mut f64) -> HsStatus {
    guard(|| {
        null_check(out, "out")?;
        *out = stats::excess_kurtosis(slice(values, len)?).map_err(check)?;
        Ok(())
    })
}

/// # Safety
/// `values` must hold `len` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hs_autocorrelation(
    values: *const f64,
    len: usize,
    lag: usize,
    out: *mut f64,
) -> HsStatus {
    guard(|| {
        null_check(out, "out")?;
        *out = stats::autocorrelation(slice(values, len)?, lag).map_err(check)?;
        Ok(())
    })
}

/// # Safety
/// `values` must hold `len` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hs_tail_exponent(
    values: *const f64,
    len: usize,
    tail_fraction: f64,
    out: *mut f64,
) -> HsStatus {
    guard(|| {
        null_check(out, "out")?;
        *out = stats::tail_exponent(slice(values, len)?, tail_fraction).map_err(check)?;
        Ok(())
    })
}

/// Daily log returns from per-step log prices. Writes at most `capacity`
/// values to `out` and the full count to `out_len`; pass `out = NULL` to
/// query the count only.
///
/// # Safety
/// `log_prices` must hold `len` doubles; `out` NULL or `capacity` doubles;
/// `out_len` writable.
#[no_mangle]
pub unsafe extern "C" fn hs_daily_returns(
    log_prices: *const f64,
    len: usize,
    steps_per_day: usize,
    out: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> HsStatus {
    guard(|| {
        null_check(out_len, "out_len")?;
        let r = stats::daily_returns(slice(log_prices, len)?, steps_per_day).map_err(check)?;
        *out_len = r.len();
        if !out.is_null() {
            let n = r.len().min(capacity);
            ptr::copy_nonoverlapping(r.values.as_ptr(), out, n);
        }
        Ok(())
    })
}
