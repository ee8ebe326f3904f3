#ifndef UNIVOQUE_H
#define UNIVOQUE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes; 2, 3 and 4 match the command-line exit codes.
 */
typedef enum UvStatus {
  UV_STATUS_OK = 0,
  UV_STATUS_INTERNAL = 1,
  UV_STATUS_CONFIG = 2,
  UV_STATUS_INVARIANT_BOX = 3,
  UV_STATUS_BUDGET = 4,
  UV_STATUS_NULL_POINTER = 5,
  UV_STATUS_INVALID_UTF8 = 6,
  UV_STATUS_PANIC = 7,
} UvStatus;

typedef enum UvFormat {
  UV_FORMAT_JSON = 0,
  UV_FORMAT_MARKDOWN = 1,
  UV_FORMAT_CSV_COUNTS = 2,
} UvFormat;

typedef enum UvVerdict {
  UV_VERDICT_EQUALITY_CERTIFIED = 0,
  UV_VERDICT_BRACKET_ONLY = 1,
  UV_VERDICT_INCONCLUSIVE = 2,
} UvVerdict;

/**
 * Opaque analysis handle.
 */
typedef struct UvAnalysis UvAnalysis;

/**
 * Headline numbers of an analysis. `has_*` flags mark optional fields.
 */
typedef struct UvDimensions {
  double similarity_dim;
  /**
   * Best available value of `s`: exact when `has_s_exact`, else truncated.
   */
  double s_best;
  bool has_s_exact;
  double dv_upper;
  bool has_dv_upper;
  double spectral_lower;
  double spectral_upper;
  bool has_spectral;
  bool automaton_closed;
  bool partial;
} UvDimensions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Runs an analysis of a JSON configuration document.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum UvStatus uv_analysis_from_json(const char *json, struct UvAnalysis **out);

/**
 * Runs one of the built-in systems: `ex1`, `ex2`, `ex4` or `cantor`.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a writable pointer.
 */
enum UvStatus uv_analysis_from_builtin(const char *name, struct UvAnalysis **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `a` must be null or a handle from this library that was not freed yet.
 */
void uv_analysis_free(struct UvAnalysis *a);

/**
 * Renders the report; the string must be released with [`uv_string_free`].
 *
 * # Safety
 * `a` must be a live handle and `out` a writable pointer.
 */
enum UvStatus uv_analysis_render(const struct UvAnalysis *a, enum UvFormat format, char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string from this library that was not freed yet.
 */
void uv_string_free(char *s);

/**
 * # Safety
 * `a` must be a live handle and `out` a writable pointer.
 */
enum UvStatus uv_analysis_verdict(const struct UvAnalysis *a, enum UvVerdict *out);

/**
 * # Safety
 * `a` must be a live handle and `out` a writable pointer.
 */
enum UvStatus uv_analysis_dimensions(const struct UvAnalysis *a, struct UvDimensions *out);

/**
 * Number of enumerated levels, or 0 for a null handle.
 *
 * # Safety
 * `a` must be null or a live handle.
 */
size_t uv_analysis_depth(const struct UvAnalysis *a);

/**
 * Copies `|S_k|`, `|T_k|` and pruned counts for `k = 1..=len` into the
 * arrays (any may be null). Writes at most `uv_analysis_depth` entries and
 * stores the number written in `written`.
 *
 * # Safety
 * Non-null arrays must have room for `len` values; `a` must be a live handle.
 */
enum UvStatus uv_analysis_level_counts(const struct UvAnalysis *a,
                                       uint64_t *s,
                                       uint64_t *t,
                                       uint64_t *pruned,
                                       size_t len,
                                       size_t *written);

/**
 * Runs the self-check of a built-in system and reports passed/total checks.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `passed` and `total` writable or null.
 */
enum UvStatus uv_verify_builtin(const char *name, uint32_t *passed, uint32_t *total);

/**
 * Message of the last failure on this thread, or null. Valid until the
 * next call into this library from the same thread.
 */
const char *uv_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *uv_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UNIVOQUE_H */
