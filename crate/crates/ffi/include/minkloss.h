#ifndef MINKLOSS_H
#define MINKLOSS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum MinkStatus {
  MINK_STATUS_OK = 0,
  MINK_STATUS_NULL_POINTER = 1,
  MINK_STATUS_INVALID_UTF8 = 2,
  /**
   * Bad argument or malformed input data.
   */
  MINK_STATUS_VALIDATION = 3,
  MINK_STATUS_IO = 4,
  /**
   * The iterative solver did not converge.
   */
  MINK_STATUS_SOLVER = 5,
  /**
   * The output buffer is too small; the required length was written back.
   */
  MINK_STATUS_BUFFER_TOO_SMALL = 6,
  MINK_STATUS_PANIC = 7,
} MinkStatus;

/**
 * HMM used for decoding.
 */
typedef struct MinkHmm MinkHmm;

/**
 * Posterior matrix, frames by classes, row-major.
 */
typedef struct MinkMatrix MinkMatrix;

/**
 * Word error counts for one reference/hypothesis pair.
 */
typedef struct MinkWer {
  size_t substitutions;
  size_t deletions;
  size_t insertions;
  size_t ref_length;
  double wer;
} MinkWer;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL if none.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *mink_last_error(void);

/**
 * Closed-form transform of one posterior `mu` for an even `order` >= 2.
 *
 * # Safety
 * `result` must be NULL or point to writable memory for one double.
 */
enum MinkStatus mink_transform(double mu, uint32_t order, double *result);

/**
 * Same transform found by safeguarded Newton iteration.
 *
 * # Safety
 * `result` must be NULL or point to writable memory for one double.
 */
enum MinkStatus mink_transform_newton(double mu,
                                      uint32_t order,
                                      double tolerance,
                                      size_t max_iterations,
                                      double *result);

/**
 * Expected loss of reporting `y` when the posterior is `mu`.
 *
 * # Safety
 * `result` must be NULL or point to writable memory for one double.
 */
enum MinkStatus mink_expected_loss(double y, double mu, uint32_t order, double *result);

/**
 * Copy `frames * classes` row-major values into a new matrix.
 *
 * # Safety
 * `values` must point to `frames * classes` readable doubles and `matrix`
 * to writable memory for one pointer.
 */
enum MinkStatus mink_matrix_new(size_t frames,
                                size_t classes,
                                const double *values,
                                struct MinkMatrix **matrix);

/**
 * Read a posterior matrix file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `matrix` writable.
 */
enum MinkStatus mink_matrix_load(const char *path, struct MinkMatrix **matrix);

/**
 * Write a posterior matrix file.
 *
 * # Safety
 * `matrix` must come from this library and `path` must be NUL-terminated.
 */
enum MinkStatus mink_matrix_save(const struct MinkMatrix *matrix, const char *path);

/**
 * Apply the order-`order` transform to every entry, optionally renormalizing
 * each frame. The result is a new matrix.
 *
 * # Safety
 * `matrix` must come from this library and `result` must be writable.
 */
enum MinkStatus mink_matrix_transform(const struct MinkMatrix *matrix,
                                      uint32_t order,
                                      bool renormalize,
                                      struct MinkMatrix **result);

/**
 * Number of frames, or 0 for NULL.
 *
 * # Safety
 * `matrix` must be NULL or come from this library.
 */
size_t mink_matrix_frames(const struct MinkMatrix *matrix);

/**
 * Number of classes, or 0 for NULL.
 *
 * # Safety
 * `matrix` must be NULL or come from this library.
 */
size_t mink_matrix_classes(const struct MinkMatrix *matrix);

/**
 * Row-major values, valid until the matrix is freed. NULL for NULL.
 *
 * # Safety
 * `matrix` must be NULL or come from this library.
 */
const double *mink_matrix_values(const struct MinkMatrix *matrix);

/**
 * # Safety
 * `matrix` must be NULL or come from this library and not be used afterwards.
 */
void mink_matrix_free(struct MinkMatrix *matrix);

/**
 * Read an HMM from its JSON file.
 *
 * # Safety
 * `path` must be NUL-terminated and `hmm` writable.
 */
enum MinkStatus mink_hmm_load(const char *path, struct MinkHmm **hmm);

/**
 * Number of states, or 0 for NULL.
 *
 * # Safety
 * `hmm` must be NULL or come from this library.
 */
size_t mink_hmm_num_states(const struct MinkHmm *hmm);

/**
 * Label of `state`, valid until the HMM is freed. NULL if out of range.
 *
 * # Safety
 * `hmm` must be NULL or come from this library.
 */
const char *mink_hmm_state_label(const struct MinkHmm *hmm, size_t state);

/**
 * # Safety
 * `hmm` must be NULL or come from this library and not be used afterwards.
 */
void mink_hmm_free(struct MinkHmm *hmm);

/**
 * Transform, then Viterbi-decode. The best state path is written to
 * `path[0..frames]` and its log score to `log_score` (which may be NULL).
 *
 * `path_len` always receives the number of frames. When `capacity` is
 * smaller, nothing else is written and `BufferTooSmall` is returned.
 *
 * # Safety
 * `matrix` and `hmm` must come from this library, `path` must have room for
 * `capacity` entries and `path_len` must be writable.
 */
enum MinkStatus mink_decode(const struct MinkMatrix *matrix,
                            const struct MinkHmm *hmm,
                            uint32_t order,
                            bool renormalize,
                            size_t *path,
                            size_t capacity,
                            size_t *path_len,
                            double *log_score);

/**
 * Word error rate of `hypothesis` against a non-empty `reference`.
 *
 * # Safety
 * Each array must hold the given number of NUL-terminated strings and
 * `result` must be writable.
 */
enum MinkStatus mink_wer(const char *const *reference,
                         size_t reference_len,
                         const char *const *hypothesis,
                         size_t hypothesis_len,
                         struct MinkWer *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MINKLOSS_H */
