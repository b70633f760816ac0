/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef ACDM_H
#define ACDM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Pass as `k` to pick the certified input length.
 */
#define ACDM_K_AUTO -1

/**
 * Flag: accept an explicit `k` above the certified length.
 */
#define ACDM_FLAG_UNCHECKED 1

/**
 * Result of every fallible call.
 */
typedef enum AcdmStatus {
  ACDM_STATUS_OK = 0,
  ACDM_STATUS_NULL_POINTER = 1,
  ACDM_STATUS_INVALID_INPUT = 2,
  ACDM_STATUS_CONFIG = 3,
  ACDM_STATUS_DECODE_OUTSIDE_IMAGE = 4,
  ACDM_STATUS_INSTANCE_TOO_LARGE = 5,
  ACDM_STATUS_BUFFER_TOO_SMALL = 6,
  ACDM_STATUS_INTERNAL = 7,
  ACDM_STATUS_PANIC = 8,
} AcdmStatus;

/**
 * Rate-loss estimate used by [`acdm_nmax_balanced`].
 */
typedef enum AcdmMethod {
  ACDM_METHOD_THEOREM1 = 0,
  ACDM_METHOD_RAMABADRAN = 1,
  ACDM_METHOD_LINEARIZED = 2,
} AcdmMethod;

/**
 * Opaque matcher handle.
 */
typedef struct AcdmMatcher AcdmMatcher;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a constant-composition matcher.
 *
 * `k` is [`ACDM_K_AUTO`] or an explicit length; see [`ACDM_FLAG_UNCHECKED`].
 *
 * # Safety
 * `counts` must point to `m` values; `out` must be writable.
 */
enum AcdmStatus acdm_ccdm_new(const uint64_t *counts,
                              size_t m,
                              uint32_t w,
                              int64_t k,
                              uint32_t flags,
                              struct AcdmMatcher **out);

/**
 * Creates an i.i.d. matcher for the distribution `probs` quantized to `theta`.
 *
 * With `k == ACDM_K_AUTO` the length is estimated from `samples` random
 * codewords drawn with `seed`.
 *
 * # Safety
 * `probs` must point to `m` values; `out` must be writable.
 */
enum AcdmStatus acdm_iid_new(const double *probs,
                             size_t m,
                             size_t n,
                             uint64_t theta,
                             uint32_t w,
                             int64_t k,
                             uint64_t samples,
                             uint64_t seed,
                             uint32_t flags,
                             struct AcdmMatcher **out);

/**
 * Releases a matcher. Null is ignored.
 *
 * # Safety
 * `matcher` must come from an `acdm_*_new` call and not be used afterwards.
 */
void acdm_matcher_free(struct AcdmMatcher *matcher);

/**
 * Input length in bits; 0 for null.
 *
 * # Safety
 * `matcher` must be null or a live handle.
 */
uint64_t acdm_matcher_k(const struct AcdmMatcher *matcher);

/**
 * Output length in symbols; 0 for null.
 *
 * # Safety
 * `matcher` must be null or a live handle.
 */
uint64_t acdm_matcher_n(const struct AcdmMatcher *matcher);

/**
 * Alphabet size; 0 for null.
 *
 * # Safety
 * `matcher` must be null or a live handle.
 */
uint64_t acdm_matcher_m(const struct AcdmMatcher *matcher);

/**
 * Encodes `k` bits into `n` symbol indices.
 *
 * # Safety
 * `bits` must hold `bits_len` bytes and `symbols_out` room for `symbols_cap` values.
 */
enum AcdmStatus acdm_encode(const struct AcdmMatcher *matcher,
                            const uint8_t *bits,
                            size_t bits_len,
                            uint32_t *symbols_out,
                            size_t symbols_cap);

/**
 * Decodes `n` symbol indices back into `k` bits.
 *
 * # Safety
 * `symbols` must hold `symbols_len` values and `bits_out` room for `bits_cap` bytes.
 */
enum AcdmStatus acdm_decode(const struct AcdmMatcher *matcher,
                            const uint32_t *symbols,
                            size_t symbols_len,
                            uint8_t *bits_out,
                            size_t bits_cap);

/**
 * Certified CCDM input length for `counts` at precision `w`.
 *
 * # Safety
 * `counts` must point to `m` values; `out` must be writable.
 */
enum AcdmStatus acdm_k_fpa_ccdm(const uint64_t *counts, size_t m, uint32_t w, uint64_t *out);

/**
 * Upper bound on the CCDM rate loss in bits for `counts` at precision `w`.
 *
 * # Safety
 * `counts` must point to `m` values; `out` must be writable.
 */
enum AcdmStatus acdm_rateloss_theorem1(const uint64_t *counts, size_t m, uint32_t w, double *out);

/**
 * Largest even `n <= n_limit` whose balanced binary composition has rate loss below one bit.
 *
 * # Safety
 * `out` must be writable.
 */
enum AcdmStatus acdm_nmax_balanced(uint32_t w,
                                   enum AcdmMethod method,
                                   uint64_t n_limit,
                                   uint64_t *out);

/**
 * Static description of a status code.
 */
const char *acdm_status_str(enum AcdmStatus status);

/**
 * Message of the last failure on this thread, or null if none.
 *
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *acdm_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ACDM_H */
