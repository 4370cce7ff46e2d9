#ifndef HERDSIM_H
#define HERDSIM_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HsStatus {
  HS_STATUS_OK = 0,
  HS_STATUS_NULL_POINTER = 1,
  HS_STATUS_INVALID_ARGUMENT = 2,
  HS_STATUS_CONFIG_ERROR = 3,
  HS_STATUS_NUMERIC_ERROR = 4,
  HS_STATUS_IO_ERROR = 5,
  HS_STATUS_PANIC = 6,
} HsStatus;

/**
 * Opaque simulation handle.
 */
typedef struct HsSimulation HsSimulation;

/**
 * Scalar view of a simulation's current state.
 */
typedef struct HsMarketState {
  uint64_t step;
  uint64_t num_agents;
  double price;
  double log_price;
  double baseline_log_price;
  double sigma;
} HsMarketState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *hs_last_error_message(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library and not yet freed.
 */
void hs_string_free(char *s);

/**
 * Creates a simulation from a JSON config (see the CLI config schema).
 *
 * # Safety
 * `config_json` must be NULL or a NUL-terminated string; `out` must be a
 * valid pointer to writable storage for one handle.
 */
enum HsStatus hs_simulation_new(const char *config_json,
                                uint64_t seed,
                                uint64_t substream,
                                struct HsSimulation **out);

/**
 * # Safety
 * `sim` must be NULL or a handle from [`hs_simulation_new`] not yet freed.
 */
void hs_simulation_free(struct HsSimulation *sim);

/**
 * Advances `steps` timesteps; the summed switch count is written to
 * `out_switches` when it is not NULL.
 *
 * # Safety
 * `sim` must be a live handle; `out_switches` NULL or writable.
 */
enum HsStatus hs_simulation_step(struct HsSimulation *sim, uint64_t steps, uint64_t *out_switches);

/**
 * # Safety
 * `sim` must be a live handle; `out` writable.
 */
enum HsStatus hs_simulation_state(const struct HsSimulation *sim, struct HsMarketState *out);

/**
 * Copies per-agent thresholds and states (0 or 1) into caller buffers of
 * exactly `len == num_agents` entries. Any buffer may be NULL to skip it.
 *
 * # Safety
 * `sim` must be a live handle; non-NULL buffers must hold `len` elements.
 */
enum HsStatus hs_simulation_agents(const struct HsSimulation *sim,
                                   double *lower,
                                   double *upper,
                                   uint8_t *states,
                                   size_t len);

/**
 * Runs one scenario in memory and returns its summary as JSON (the same
 * document the CLI writes to `summary.json`).
 *
 * # Safety
 * `config_json` NULL or NUL-terminated; `out_json` writable.
 */
enum HsStatus hs_simulate_summary_json(const char *config_json, char **out_json);

/**
 * Runs the `C_max` sweep described by the config; returns the result as JSON.
 *
 * # Safety
 * `config_json` NULL or NUL-terminated; `out_json` writable.
 */
enum HsStatus hs_sweep_json(const char *config_json, char **out_json);

/**
 * # Safety
 * `values` must hold `len` doubles; `out` writable.
 */
enum HsStatus hs_excess_kurtosis(const double *values, size_t len, double *out);

/**
 * # Safety
 * `values` must hold `len` doubles; `out` writable.
 */
enum HsStatus hs_autocorrelation(const double *values, size_t len, size_t lag, double *out);

/**
 * # Safety
 * `values` must hold `len` doubles; `out` writable.
 */
enum HsStatus hs_tail_exponent(const double *values, size_t len, double tail_fraction, double *out);

/**
 * Daily log returns from per-step log prices. Writes at most `capacity`
 * values to `out` and the full count to `out_len`; pass `out = NULL` to
 * query the count only.
 *
 * # Safety
 * `log_prices` must hold `len` doubles; `out` NULL or `capacity` doubles;
 * `out_len` writable.
 */
enum HsStatus hs_daily_returns(const double *log_prices,
                               size_t len,
                               size_t steps_per_day,
                               double *out,
                               size_t capacity,
                               size_t *out_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HERDSIM_H */
