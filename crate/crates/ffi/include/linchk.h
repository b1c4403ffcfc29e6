/* SPDX-License-Identifier: Apache-2.0 */

#ifndef LINCHK_H
#define LINCHK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LinchkStatus {
  LINCHK_STATUS_OK = 0,
  LINCHK_STATUS_NULL_ARGUMENT = 1,
  LINCHK_STATUS_INVALID_UTF8 = 2,
  /**
   * The history text is not valid JSONL or does not pair up.
   */
  LINCHK_STATUS_INVALID_HISTORY = 3,
  /**
   * Unknown specification, or operations it does not accept.
   */
  LINCHK_STATUS_SPEC_ERROR = 4,
  LINCHK_STATUS_INVALID_ARGUMENT = 5,
  /**
   * The history is too large for the brute-force oracle.
   */
  LINCHK_STATUS_ORACLE_LIMIT = 6,
  LINCHK_STATUS_INTERNAL = 7,
} LinchkStatus;

/**
 * Numbered like the command-line exit codes.
 */
typedef enum LinchkVerdict {
  LINCHK_VERDICT_LINEARIZABLE = 0,
  LINCHK_VERDICT_NOT_LINEARIZABLE = 1,
  LINCHK_VERDICT_TIMEOUT = 3,
} LinchkVerdict;

/**
 * A validated, complete history.
 */
typedef struct LinchkHistory LinchkHistory;

/**
 * The outcome of one check.
 */
typedef struct LinchkReport LinchkReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failed call on this thread, or null. Valid
 * until the next call into the library from this thread.
 */
const char *linchk_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *linchk_version(void);

/**
 * Parses and validates `len` bytes of JSONL. Calls without a return are
 * rejected when `drop_pending` is false and discarded otherwise.
 *
 * # Safety
 * `data` must point to `len` readable bytes and `out` must be writable.
 */
enum LinchkStatus linchk_history_parse(const uint8_t *data,
                                       size_t len,
                                       bool drop_pending,
                                       struct LinchkHistory **out);

/**
 * Records a history from a multi-threaded set workload. `implementation`
 * is one of `coarse`, `striped`, `nonatomic` or `stale`.
 *
 * # Safety
 * `implementation` must be a NUL-terminated string and `out` writable.
 */
enum LinchkStatus linchk_history_generate(size_t threads,
                                          size_t ops_per_thread,
                                          int64_t key_range,
                                          const char *implementation,
                                          uint64_t seed,
                                          struct LinchkHistory **out);

/**
 * # Safety
 * `history` must be null or a handle from this library not yet freed.
 */
void linchk_history_free(struct LinchkHistory *history);

/**
 * Number of operations, or 0 for a null handle.
 *
 * # Safety
 * `history` must be null or a live handle.
 */
size_t linchk_history_operations(const struct LinchkHistory *history);

/**
 * Canonical JSONL text of the history; free with [`linchk_string_free`].
 *
 * # Safety
 * `history` must be a live handle and `out` writable.
 */
enum LinchkStatus linchk_history_to_jsonl(const struct LinchkHistory *history, char **out);

/**
 * Checks `history` against `spec` (`set`, `map` or `array:N`) with
 * `algorithm` (`wg`, `wgl`, `wgl-lru`, `wgl-p`, or null for the default).
 * `cache_capacity` applies to `wgl-lru` only and 0 selects the default.
 * `timeout_ms` of 0 means no limit. `parallel` caps `wgl-p` workers, 0 for
 * all cores.
 *
 * # Safety
 * Pointers must be valid as described; `out` must be writable.
 */
enum LinchkStatus linchk_check(const struct LinchkHistory *history,
                               const char *spec,
                               const char *algorithm,
                               size_t cache_capacity,
                               uint64_t timeout_ms,
                               size_t parallel,
                               bool witness,
                               struct LinchkReport **out);

/**
 * # Safety
 * `report` must be a live handle and `out` writable.
 */
enum LinchkStatus linchk_report_verdict(const struct LinchkReport *report, enum LinchkVerdict *out);

/**
 * The report as JSON; free with [`linchk_string_free`].
 *
 * # Safety
 * `report` must be a live handle and `out` writable.
 */
enum LinchkStatus linchk_report_json(const struct LinchkReport *report, char **out);

/**
 * # Safety
 * `report` must be null or a live handle.
 */
void linchk_report_free(struct LinchkReport *report);

/**
 * Brute-force check of a small history. Fails with
 * [`LinchkStatus::OracleLimit`] above `max_operations` operations.
 *
 * # Safety
 * Pointers must be valid; `out` must be writable.
 */
enum LinchkStatus linchk_oracle_check(const struct LinchkHistory *history,
                                      const char *spec,
                                      size_t max_operations,
                                      enum LinchkVerdict *out);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void linchk_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LINCHK_H */
