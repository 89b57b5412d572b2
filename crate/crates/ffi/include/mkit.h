#ifndef MKIT_H
#define MKIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. `MKIT_VERIFY_FAILED` and `MKIT_INVALID_INPUT` carry the same
 * meaning as the command-line exit codes 1 and 2.
 */
typedef enum MkitStatus {
  MKIT_OK = 0,
  MKIT_VERIFY_FAILED = 1,
  MKIT_INVALID_INPUT = 2,
  MKIT_NULL_POINTER = 3,
  MKIT_DEGENERATE_POINT = 4,
  MKIT_NOT_DARBOUX = 5,
  MKIT_INTERNAL = 6,
  MKIT_PANIC = 7,
} MkitStatus;

/**
 * Opaque germ handle.
 */
typedef struct MkitGerm MkitGerm;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a germ document. The germ must already be in normal form.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum MkitStatus mkit_germ_from_json(const char *json, struct MkitGerm **out);

/**
 * Releases a germ handle. NULL is ignored.
 *
 * # Safety
 * `germ` must come from [`mkit_germ_from_json`] and not be used afterwards.
 */
void mkit_germ_free(struct MkitGerm *germ);

/**
 * Number of tangent variables `n`.
 *
 * # Safety
 * `germ` must be a live handle; `out` must be writable.
 */
enum MkitStatus mkit_germ_dimension(const struct MkitGerm *germ, size_t *out);

/**
 * The germ as a document (JSON), suitable for [`mkit_germ_from_json`].
 *
 * # Safety
 * `germ` must be a live handle; `out` must be writable.
 */
enum MkitStatus mkit_germ_to_json(const struct MkitGerm *germ, char **out);

/**
 * Moutard parameter beta as text: `p/q` on exact germs, a decimal on float
 * germs.
 *
 * # Safety
 * `germ` must be a live handle; `out` must be writable.
 */
enum MkitStatus mkit_beta(const struct MkitGerm *germ, char **out);

/**
 * Germ tensors, pencil base, beta and the Moutard quadric (JSON).
 *
 * # Safety
 * `germ` must be a live handle; `out` must be writable.
 */
enum MkitStatus mkit_pencil_json(const struct MkitGerm *germ, char **out);

/**
 * Cubic form at the origin (JSON list of `{index, value}`).
 *
 * # Safety
 * `germ` must be a live handle; `out` must be writable.
 */
enum MkitStatus mkit_cubic_form_json(const struct MkitGerm *germ, char **out);

/**
 * Generalized Darboux test of the x1-axis; `threshold <= 0` selects the
 * default. `is_darboux` (may be NULL) receives 1 or 0; `out` (may be NULL)
 * receives the full report.
 *
 * # Safety
 * `germ` must be a live handle; non-NULL outputs must be writable.
 */
enum MkitStatus mkit_darboux(const struct MkitGerm *germ,
                             double threshold,
                             int *is_darboux,
                             char **out);

/**
 * E6/E7 classification of a surface germ whose x1-axis is a Darboux
 * direction, against the pencil member `beta` (text; NULL for the Moutard
 * member).
 *
 * # Safety
 * `germ` must be a live handle; `beta` NULL or NUL-terminated; `out` writable.
 */
enum MkitStatus mkit_classify_json(const struct MkitGerm *germ, const char *beta, char **out);

/**
 * Runs a verification suite. `count == 0` selects the suite's default.
 * Returns `MKIT_VERIFY_FAILED` when a counterexample was found; the report
 * (may be NULL) is written either way.
 *
 * # Safety
 * `suite` must be NUL-terminated; `out` NULL or writable.
 */
enum MkitStatus mkit_verify(const char *suite, uint64_t seed, size_t count, char **out);

/**
 * Message for the last failing call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *mkit_last_error_message(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void mkit_string_free(char *s);

/**
 * Library version, static storage.
 */
const char *mkit_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MKIT_H */
