#ifndef PREDIM_H
#define PREDIM_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result code of every fallible call.
typedef enum PredimStatus {
  PREDIM_STATUS_OK = 0,
  // A required pointer argument was null.
  PREDIM_STATUS_NULL_POINTER = 1,
  // A string argument was not valid UTF-8.
  PREDIM_STATUS_INVALID_UTF8 = 2,
  // Malformed input: JSON, labels, specs, bindings.
  PREDIM_STATUS_INPUT = 3,
  // An enumeration budget or time limit was exceeded.
  PREDIM_STATUS_BUDGET = 4,
  // Well-formed input outside the operation's domain.
  PREDIM_STATUS_DOMAIN = 5,
  // Internal consistency failure or panic.
  PREDIM_STATUS_INTERNAL = 6,
} PredimStatus;

// A torsion coset of a subtorus.
typedef struct PredimCoset PredimCoset;

// A structure together with the predimension evaluated on it.
typedef struct PredimStructure PredimStructure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next call into this library on the same thread; do not free.
const char *predim_last_error(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void predim_string_free(char *s);

// Parses a structure from JSON. `spec` may be null, in which case the
// structure's declared predimension is used.
//
// # Safety
// `json` and non-null `spec` must be NUL-terminated strings; `out` must be
// writable.
enum PredimStatus predim_structure_load(const char *json,
                                        const char *spec,
                                        struct PredimStructure **out);

// # Safety
// `h` must be null or a handle from [`predim_structure_load`], not yet freed.
void predim_structure_free(struct PredimStructure *h);

// Sets the enumeration limits used by later calls on `h`. A zero
// `timeout_ms` disables the time limit.
//
// # Safety
// `h` must be a live structure handle.
enum PredimStatus predim_structure_set_budget(struct PredimStructure *h,
                                              size_t max_points,
                                              uint64_t max_subsets,
                                              uint64_t timeout_ms);

// # Safety
// `h` must be a live structure handle; `out` must be writable.
enum PredimStatus predim_structure_point_count(const struct PredimStructure *h, size_t *out);

// Predimension of the comma-separated label set `set`.
//
// # Safety
// `h` must be a live structure handle, `set` a NUL-terminated string, and
// `out` writable.
enum PredimStatus predim_delta(const struct PredimStructure *h, const char *set, int64_t *out);

// Dimension `∂` of the comma-separated label set `set`.
//
// # Safety
// As for [`predim_delta`].
enum PredimStatus predim_d_partial(const struct PredimStructure *h, const char *set, int64_t *out);

// # Safety
// As for [`predim_delta`].
enum PredimStatus predim_is_strong(const struct PredimStructure *h, const char *set, bool *out);

// Strong closure of `set`, written as a JSON array of labels.
//
// # Safety
// As for [`predim_delta`]; free `*out` with [`predim_string_free`].
enum PredimStatus predim_strong_closure(const struct PredimStructure *h,
                                        const char *set,
                                        char **out);

// Writes `true` when every set has non-negative predimension; otherwise
// `false` and, if `witness` is non-null, a JSON array with the labels of an
// inclusion-minimal negative set.
//
// # Safety
// `h` must be a live structure handle, `ok` writable, and `witness` null or
// writable; free `*witness` with [`predim_string_free`].
enum PredimStatus predim_gs_check(const struct PredimStructure *h, bool *ok, char **witness);

// Parses a coset from JSON.
//
// # Safety
// `json` must be a NUL-terminated string and `out` writable.
enum PredimStatus predim_coset_load(const char *json, struct PredimCoset **out);

// # Safety
// `c` must be null or a handle from [`predim_coset_load`], not yet freed.
void predim_coset_free(struct PredimCoset *c);

// # Safety
// `c` must be a live coset handle; `out` must be writable.
enum PredimStatus predim_coset_dim(const struct PredimCoset *c, size_t *out);

// Intersection of two cosets as JSON `{"dim": d, "components": "k"}`,
// with `dim = -1` when empty.
//
// # Safety
// `a` and `b` must be live coset handles; free `*out` with
// [`predim_string_free`].
enum PredimStatus predim_coset_intersect(const struct PredimCoset *a,
                                         const struct PredimCoset *b,
                                         char **out);

// Typicality of `w ∩ s` as JSON, or `null` when the intersection is empty.
//
// # Safety
// As for [`predim_coset_intersect`].
enum PredimStatus predim_coset_typicality(const struct PredimCoset *w,
                                          const struct PredimCoset *s,
                                          char **out);

// Runs the command-line interface in-process. `argv` excludes the program
// name. Captured output is written to `out_stdout` / `out_stderr` (each
// may be null to discard) and the exit code to `exit_code`.
//
// # Safety
// `argv` must point to `argc` NUL-terminated strings; out-pointers must be
// null or writable.
enum PredimStatus predim_cli_run(const char *const *argv,
                                 size_t argc,
                                 char **out_stdout,
                                 char **out_stderr,
                                 int32_t *exit_code);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* PREDIM_H */
