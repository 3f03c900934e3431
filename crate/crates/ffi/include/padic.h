#ifndef PADIC_H
#define PADIC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible entry point.
 */
typedef enum PadicError {
  PADIC_ERROR_OK = 0,
  PADIC_ERROR_NULL_POINTER = 1,
  PADIC_ERROR_INVALID_UTF8 = 2,
  PADIC_ERROR_PARSE = 3,
  PADIC_ERROR_INVALID_INPUT = 4,
  PADIC_ERROR_GUARD_EXCEEDED = 5,
  PADIC_ERROR_INTERNAL = 6,
  PADIC_ERROR_PANIC = 7,
} PadicError;

/**
 * Outcome of a solve.
 */
typedef enum PadicStatus {
  PADIC_STATUS_SAT = 0,
  PADIC_STATUS_UNSAT = 1,
  PADIC_STATUS_UNKNOWN = 2,
} PadicStatus;

/**
 * Opaque parsed instance.
 */
typedef struct PadicInstance PadicInstance;

/**
 * Opaque solver verdict.
 */
typedef struct PadicVerdict PadicVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next library call on the same thread.
 */
const char *padic_last_error(void);

/**
 * Parses an instance in the text format accepted by the `padic` binary.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum PadicError padic_instance_parse(const char *text, struct PadicInstance **out);

/**
 * Number of variables of an instance, 0 for null.
 *
 * # Safety
 * `inst` must be null or a live handle from [`padic_instance_parse`].
 */
uintptr_t padic_instance_num_vars(const struct PadicInstance *inst);

/**
 * Releases an instance. Null is ignored.
 *
 * # Safety
 * `inst` must be null or a handle not yet freed.
 */
void padic_instance_free(struct PadicInstance *inst);

/**
 * Decides an instance. `threads` of 0 means 1.
 *
 * # Safety
 * `inst` must be a live instance handle and `out` a valid pointer.
 */
enum PadicError padic_solve(const struct PadicInstance *inst,
                            uintptr_t threads,
                            struct PadicVerdict **out);

/**
 * Status of a verdict; null reads as unknown.
 *
 * # Safety
 * `v` must be null or a live verdict handle.
 */
enum PadicStatus padic_verdict_status(const struct PadicVerdict *v);

/**
 * JSON rendering of a verdict, the same document `padic --json solve`
 * prints. Returns null on failure.
 *
 * # Safety
 * `inst` must be the instance the verdict was computed for; both handles live.
 */
char *padic_verdict_json(const struct PadicInstance *inst,
                         const struct PadicVerdict *v,
                         bool with_witness);

/**
 * Witness lines (`wit ...`) of a satisfiable verdict, or null when there is
 * no explicit witness.
 *
 * # Safety
 * `v` must be a live verdict handle.
 */
char *padic_verdict_witness(const struct PadicVerdict *v);

/**
 * Releases a verdict. Null is ignored.
 *
 * # Safety
 * `v` must be null or a handle not yet freed.
 */
void padic_verdict_free(struct PadicVerdict *v);

/**
 * Checks witness lines against an instance. On success `*valid` is 1 when
 * every constraint holds and 0 otherwise; the violation is then available
 * from [`padic_last_error`].
 *
 * # Safety
 * `inst` must be live, `witness` NUL-terminated and `valid` a valid pointer.
 */
enum PadicError padic_check_witness(const struct PadicInstance *inst,
                                    const char *witness,
                                    uint64_t guard,
                                    int32_t *valid);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string obtained from this library, not yet freed.
 */
void padic_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PADIC_H */
