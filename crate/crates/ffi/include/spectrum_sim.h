#ifndef SPECTRUM_SIM_H
#define SPECTRUM_SIM_H

/* Generated by cbindgen from spectrum-sim-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every API function.
 */
typedef enum SpectrumStatus {
  /**
   * Success.
   */
  SpectrumOk = 0,
  /**
   * A required pointer argument was null.
   */
  SpectrumNullArgument = -1,
  /**
   * An input string was not valid UTF-8.
   */
  SpectrumInvalidUtf8 = -2,
  /**
   * JSON or value parsing failed.
   */
  SpectrumParseError = -3,
  /**
   * The transaction was applied and reverted; a receipt is still returned.
   */
  SpectrumReverted = -4,
  /**
   * Engine rejected the request (unknown account, token, and so on).
   */
  SpectrumEngineError = -5,
  /**
   * The caller-provided buffer is too small.
   */
  SpectrumBufferTooSmall = -6,
  /**
   * Internal panic; state of the handle is unspecified.
   */
  SpectrumInternalError = -7,
} SpectrumStatus;

/**
 * Opaque engine handle.
 */
typedef struct SpectrumEngine SpectrumEngine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread. The pointer
 * stays valid until the next API call from the same thread.
 */
const char *spectrum_last_error_message(void);

/**
 * Creates an engine with the default gas schedule. Never null.
 */
struct SpectrumEngine *spectrum_engine_new(void);

/**
 * Releases an engine handle. A null pointer is ignored.
 *
 * # Safety
 * `engine` must come from [`spectrum_engine_new`] and not be freed twice.
 */
void spectrum_engine_free(struct SpectrumEngine *engine);

/**
 * Frees a string allocated by this library. A null pointer is ignored.
 *
 * # Safety
 * `s` must have been returned through one of this library's out-pointers
 * and not freed before.
 */
void spectrum_string_free(char *s);

/**
 * Creates a funded account. Writes the 0x-prefixed address (42 chars plus
 * NUL) into `out_address`.
 *
 * # Safety
 * Pointer arguments must satisfy the usual C contract: `engine` is a live
 * handle, `balance_wei` a NUL-terminated string, `out_address` writable
 * for `out_len` bytes.
 */
enum SpectrumStatus spectrum_engine_create_account(struct SpectrumEngine *engine,
                                                   const char *balance_wei,
                                                   char *out_address,
                                                   size_t out_len);

/**
 * Creates an account at a pinned address.
 *
 * # Safety
 * See [`spectrum_engine_create_account`].
 */
enum SpectrumStatus spectrum_engine_create_account_at(struct SpectrumEngine *engine,
                                                      const char *address,
                                                      const char *balance_wei);

/**
 * Advances the logical clock by `delta_seconds`; writes the new time.
 *
 * # Safety
 * `engine` must be a live handle; `out_now` may be null when the new value
 * is not needed.
 */
enum SpectrumStatus spectrum_engine_advance_time(struct SpectrumEngine *engine,
                                                 uint64_t delta_seconds,
                                                 uint64_t *out_now);

/**
 * Writes an account balance as a decimal wei string.
 *
 * # Safety
 * See [`spectrum_engine_create_account`].
 */
enum SpectrumStatus spectrum_engine_balance(struct SpectrumEngine *engine,
                                            const char *address,
                                            char *out_wei,
                                            size_t out_len);

/**
 * Writes the 0x-prefixed address holding the token at `at` (the zero
 * address when unassigned).
 *
 * # Safety
 * See [`spectrum_engine_create_account`].
 */
enum SpectrumStatus spectrum_engine_user_of(struct SpectrumEngine *engine,
                                            uint64_t token_id,
                                            uint64_t at,
                                            char *out_address,
                                            size_t out_len);

/**
 * Writes the hex digest of the full engine state.
 *
 * # Safety
 * See [`spectrum_engine_create_account`].
 */
enum SpectrumStatus spectrum_engine_state_digest(struct SpectrumEngine *engine,
                                                 char *out_digest,
                                                 size_t out_len);

/**
 * Applies one transaction. `call_json` uses the documented call shapes,
 * `value_wei` is the attached currency (bids). On success or revert a
 * receipt JSON is written to `out_receipt_json`; a revert also returns
 * [`SpectrumReverted`].
 *
 * # Safety
 * See [`spectrum_engine_create_account`]; `out_receipt_json` must be a
 * valid pointer to receive an owned string.
 */
enum SpectrumStatus spectrum_engine_execute_call_json(struct SpectrumEngine *engine,
                                                      const char *caller,
                                                      const char *value_wei,
                                                      const char *call_json,
                                                      char **out_receipt_json);

/**
 * Parses, validates and runs a scenario document. Writes a JSON report
 * with pass/fail lines, transaction counts and the full event log.
 *
 * # Safety
 * `scenario_json` must be a NUL-terminated string and `out_report_json` a
 * valid pointer to receive an owned string.
 */
enum SpectrumStatus spectrum_run_scenario_json(const char *scenario_json, char **out_report_json);

/**
 * Tabulates both authorization flows for 1..=max_slots as RFC 4180 CSV.
 * `schedule_json` may be null for the default schedule or carry partial
 * overrides.
 *
 * # Safety
 * `out_csv` must be a valid pointer to receive an owned string;
 * `schedule_json` may be null.
 */
enum SpectrumStatus spectrum_gas_sweep_csv(uint64_t max_slots,
                                           const char *schedule_json,
                                           char **out_csv);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* SPECTRUM_SIM_H */
