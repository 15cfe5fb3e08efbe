/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef QUANTAUTO_H
#define QUANTAUTO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum QaStatus {
  QA_STATUS_OK = 0,
  QA_STATUS_NULL_ARGUMENT = 1,
  QA_STATUS_USAGE = 2,
  QA_STATUS_PARSE = 3,
  QA_STATUS_STRUCTURAL = 4,
  QA_STATUS_VALIDATION = 5,
  QA_STATUS_UNSUPPORTED = 6,
  QA_STATUS_DEGENERATE = 7,
  QA_STATUS_ACCURACY = 8,
  QA_STATUS_BUDGET = 9,
  QA_STATUS_INVALID_UTF8 = 10,
  QA_STATUS_PANIC = 11,
} QaStatus;

/**
 * Opaque machine handle.
 */
typedef struct QaMachine QaMachine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread; empty after success.
 * The pointer stays valid until the next library call on this thread.
 */
const char *qa_last_error(void);

/**
 * Releases a string returned by the library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void qa_string_free(char *s);

/**
 * Parses a machine definition (JSON text).
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum QaStatus qa_machine_parse(const char *json, struct QaMachine **out);

/**
 * Releases a machine handle. Null is ignored.
 *
 * # Safety
 * `m` must come from this library and not be freed twice.
 */
void qa_machine_free(struct QaMachine *m);

/**
 * Model name ("nfa", "ta", "pa", "pta", "tapd" or "sta"), statically allocated.
 *
 * # Safety
 * `m` must be a live handle or null (which yields an empty string).
 */
const char *qa_machine_kind(const struct QaMachine *m);

/**
 * # Safety
 * `m` must be a live handle; the out pointers must be writable.
 */
enum QaStatus qa_machine_size(const struct QaMachine *m, size_t *states, size_t *edges);

/**
 * Sets `*valid`; the violations, if any, are in `qa_last_error`.
 *
 * # Safety
 * `m` must be a live handle; `valid` must be writable.
 */
enum QaStatus qa_machine_validate(const struct QaMachine *m, bool *valid);

/**
 * Machine definition text; free with `qa_string_free`.
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
enum QaStatus qa_machine_serialize(const struct QaMachine *m, char **out);

/**
 * Number of runs with exactly `depth` steps. `grid` is a comma-separated
 * list of time points (null or empty for untimed machines).
 *
 * # Safety
 * `m` must be a live handle; `grid` null or NUL-terminated; `out` writable.
 */
enum QaStatus qa_count_runs(const struct QaMachine *m,
                            size_t depth,
                            const char *grid_csv,
                            size_t *out);

/**
 * Measure of the run taking `edges[0..n]` at the given times. `weights`
 * is a slack such as "1/10" or "uniform" (NFA and TA only). The value is
 * written as text ("1/12", or "value ± error" when numeric).
 *
 * # Safety
 * `edges` must hold `n` values; string arguments null or NUL-terminated;
 * `out` writable.
 */
enum QaStatus qa_measure_path(const struct QaMachine *m,
                              const size_t *edges,
                              size_t n,
                              const char *times_csv,
                              const char *weights_spec,
                              char **out);

/**
 * Translation into another class. `target` is one of "ta", "pa", "pta",
 * "tapd", "sta", "region", "nfa-gcd". The witness (with weights, when the
 * target needs them) is written as JSON text.
 *
 * # Safety
 * `m` must be a live handle; strings null or NUL-terminated; outs writable.
 */
enum QaStatus qa_translate(const struct QaMachine *m,
                           const char *target,
                           uint32_t degree,
                           const char *weights_spec,
                           struct QaMachine **out,
                           char **witness_json);

/**
 * Runs the built-in counterexample suite; the report is JSON text.
 *
 * # Safety
 * Out pointers must be writable; `report_json` may be null.
 */
enum QaStatus qa_repro(bool *all_passed, char **report_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QUANTAUTO_H */
