#ifndef TAUSAT_H
#define TAUSAT_H

/* Generated by cbindgen from the tausat-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a C API call. Anything other than `OK` leaves the out
 * parameters untouched except for the error string.
 */
typedef enum TausatStatus {
  TAUSAT_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  TAUSAT_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  TAUSAT_STATUS_INVALID_UTF8 = 2,
  /**
   * The document, options or partition JSON failed to parse or validate.
   */
  TAUSAT_STATUS_PARSE_ERROR = 3,
  /**
   * The engines rejected the request (shape mismatch, non-exact verdict
   * where exactness is required, ...).
   */
  TAUSAT_STATUS_EVAL_ERROR = 4,
} TausatStatus;

/**
 * An opaque parsed system (weighted or convex), created by
 * [`tausat_system_parse_json`] and released by [`tausat_system_free`].
 */
typedef struct TausatSystem TausatSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The crate version as a static NUL-terminated string; do not free.
 */
const char *tausat_version(void);

/**
 * Releases a string returned by any of the other calls.
 *
 * # Safety
 * `s` must be a pointer previously returned by this library in an out
 * parameter, not yet freed; null is ignored.
 */
void tausat_string_free(char *s);

/**
 * Parses a system document (the CLI's JSON format) into a handle.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out_system` must be a valid
 * location to store the handle; `out_error` may be null.
 */
enum TausatStatus tausat_system_parse_json(const char *json,
                                           struct TausatSystem **out_system,
                                           char **out_error);

/**
 * Releases a system handle.
 *
 * # Safety
 * `sys` must come from [`tausat_system_parse_json`] or
 * [`tausat_system_clone`] and not be used afterwards; null is ignored.
 */
void tausat_system_free(struct TausatSystem *sys);

/**
 * Deep-copies a system handle.
 *
 * # Safety
 * `sys` must be a live handle from this library.
 */
struct TausatSystem *tausat_system_clone(const struct TausatSystem *sys);

/**
 * Number of states of the system.
 *
 * # Safety
 * `sys` must be a live handle from this library.
 */
uintptr_t tausat_system_state_count(const struct TausatSystem *sys);

/**
 * Serializes the system back to its JSON document form.
 *
 * # Safety
 * `sys` must be a live handle; `out_json` a valid out location.
 */
enum TausatStatus tausat_system_to_json(const struct TausatSystem *sys, char **out_json);

/**
 * Renders the system as a DOT digraph (τ edges dashed).
 *
 * # Safety
 * `sys` must be a live handle; `out_dot` a valid out location.
 */
enum TausatStatus tausat_system_to_dot(const struct TausatSystem *sys, char **out_dot);

/**
 * Greatest weak bisimulation; the report carries the partition.
 *
 * # Safety
 * `sys` must be a live handle; `options_json` may be null; the out
 * pointers may be null when the caller does not need them.
 */
enum TausatStatus tausat_weak_bisim(const struct TausatSystem *sys,
                                    const char *options_json,
                                    char **out_report,
                                    int *out_code,
                                    char **out_error);

/**
 * Greatest strong bisimulation (no saturation).
 *
 * # Safety
 * As for [`tausat_weak_bisim`].
 */
enum TausatStatus tausat_strong_bisim(const struct TausatSystem *sys,
                                      const char *options_json,
                                      char **out_report,
                                      int *out_code,
                                      char **out_error);

/**
 * Quotient by the greatest weak bisimulation; refuses non-exact verdicts
 * with `EVAL_ERROR`.
 *
 * # Safety
 * As for [`tausat_weak_bisim`].
 */
enum TausatStatus tausat_minimize(const struct TausatSystem *sys,
                                  const char *options_json,
                                  char **out_report,
                                  int *out_code,
                                  char **out_error);

/**
 * τ-saturation; the report embeds the saturated system document.
 *
 * # Safety
 * As for [`tausat_weak_bisim`].
 */
enum TausatStatus tausat_saturate(const struct TausatSystem *sys,
                                  const char *options_json,
                                  char **out_report,
                                  int *out_code,
                                  char **out_error);

/**
 * Compares the initial states of two systems on their disjoint union.
 * `out_code`: 0 bisimilar, 1 not, 2 unknown.
 *
 * # Safety
 * `left` and `right` must be live handles; `options_json` may be null; the
 * out pointers may be null.
 */
enum TausatStatus tausat_compare(const struct TausatSystem *left,
                                 const struct TausatSystem *right,
                                 const char *options_json,
                                 char **out_report,
                                 int *out_code,
                                 char **out_error);

/**
 * Checks a partition document (JSON blocks of state names) against the
 * system. `out_code`: 0 accepted, 1 rejected.
 *
 * # Safety
 * `sys` must be a live handle; `partition_json` must be NUL-terminated;
 * `options_json` may be null; the out pointers may be null.
 */
enum TausatStatus tausat_check_partition(const struct TausatSystem *sys,
                                         const char *partition_json,
                                         const char *options_json,
                                         char **out_report,
                                         int *out_code,
                                         char **out_error);

/**
 * Runs the semiring and label-algebra law reports for a raw document.
 * Unlike the other entry points this takes JSON directly, because a
 * document whose algebra fails its laws cannot become a system handle.
 * `out_code`: 0 all laws pass, 2 otherwise.
 *
 * # Safety
 * `doc_json` must be NUL-terminated; the out pointers may be null.
 */
enum TausatStatus tausat_validate_json(const char *doc_json,
                                       char **out_report,
                                       int *out_code,
                                       char **out_error);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TAUSAT_H */
