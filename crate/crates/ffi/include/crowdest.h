/* C interface to the crowdest estimation library. */

#ifndef CROWDEST_H
#define CROWDEST_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum CrowdestStatus {
  CROWDEST_STATUS_OK = 0,
  CROWDEST_STATUS_NULL_POINTER = 1,
  CROWDEST_STATUS_INVALID_UTF8 = 2,
  CROWDEST_STATUS_PARSE_ERROR = 3,
  CROWDEST_STATUS_COMPUTE_ERROR = 4,
  CROWDEST_STATUS_INVALID_ARGUMENT = 5,
  CROWDEST_STATUS_PANIC = 6,
} CrowdestStatus;

// Cardinality estimator selector.
typedef enum CrowdestEstimator {
  CROWDEST_ESTIMATOR_UNIFORM_MLE = 0,
  CROWDEST_ESTIMATOR_CHAO84 = 1,
  CROWDEST_ESTIMATOR_CHAO92 = 2,
} CrowdestEstimator;

// Streaker-correction transform selector.
typedef enum CrowdestHeuristic {
  CROWDEST_HEURISTIC_CLUSTER = 0,
  CROWDEST_HEURISTIC_F1 = 1,
} CrowdestHeuristic;

// Item distribution selector for [`crowdest_simulate`].
typedef enum CrowdestDistribution {
  // `shape` is ignored.
  CROWDEST_DISTRIBUTION_UNIFORM = 0,
  // `shape` is the Zipf exponent.
  CROWDEST_DISTRIBUTION_ZIPF = 1,
  // `shape` is the self-similar `h` parameter.
  CROWDEST_DISTRIBUTION_SELF_SIMILAR = 2,
} CrowdestDistribution;

// Opaque handle to an answer stream.
typedef struct crowdest_stream crowdest_stream;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the most recent failure on this thread. The pointer
// stays valid until the next failing call on the same thread.
const char *crowdest_last_error_message(void);

// Parses a CSV document (`hit_index,worker_id,answer`) into a stream
// handle.
//
// # Safety
// `data` must point to `len` readable bytes; `out` must be a valid
// pointer.
enum CrowdestStatus crowdest_stream_parse_csv(const uint8_t *data,
                                              size_t len,
                                              struct crowdest_stream **out);

// Releases a stream handle. Null is a no-op.
//
// # Safety
// `stream` must be a pointer previously returned by this library and not
// freed since.
void crowdest_stream_free(struct crowdest_stream *stream);

// Number of records; 0 for a null handle.
//
// # Safety
// `stream` must be a live handle or null.
size_t crowdest_stream_len(const struct crowdest_stream *stream);

// Number of distinct answers; 0 for a null handle.
//
// # Safety
// `stream` must be a live handle or null.
size_t crowdest_stream_unique(const struct crowdest_stream *stream);

// Serializes the stream back to CSV.
//
// # Safety
// `stream` must be a live handle; `out` a valid pointer. Free the string
// with [`crowdest_string_free`].
enum CrowdestStatus crowdest_stream_to_csv(const struct crowdest_stream *stream, char **out);

// Runs a cardinality estimator; divergent estimates come back as
// `INFINITY`.
//
// # Safety
// `stream` must be a live handle; `out_value` a valid pointer.
enum CrowdestStatus crowdest_estimate(const struct crowdest_stream *stream,
                                      enum CrowdestEstimator estimator,
                                      double *out_value);

// Chao92 with diagnostics: coverage and the squared CV estimate.
//
// # Safety
// `stream` must be a live handle; out-pointers must be valid.
enum CrowdestStatus crowdest_chao92_diagnostics(const struct crowdest_stream *stream,
                                                double *out_value,
                                                double *out_coverage,
                                                double *out_cv_squared);

// Completeness (unique / estimate) under the chosen estimator; 0 when the
// estimate diverges.
//
// # Safety
// `stream` must be a live handle; `out_value` a valid pointer.
enum CrowdestStatus crowdest_completeness(const struct crowdest_stream *stream,
                                          enum CrowdestEstimator estimator,
                                          double *out_value);

// Fraction of singletons among the distinct answers.
//
// # Safety
// `stream` must be a live handle; `out_value` a valid pointer.
enum CrowdestStatus crowdest_f1_ratio(const struct crowdest_stream *stream, double *out_value);

// Applies a streaker-correction transform, producing a new stream handle.
//
// # Safety
// `stream` must be a live handle; `out` a valid pointer.
enum CrowdestStatus crowdest_truncate(const struct crowdest_stream *stream,
                                      enum CrowdestHeuristic heuristic,
                                      size_t t,
                                      double r,
                                      uint64_t seed,
                                      struct crowdest_stream **out);

// Expected new unique answers from `m` more HITs via the coverage method.
//
// # Safety
// `stream` must be a live handle; `out_value` a valid pointer.
enum CrowdestStatus crowdest_shen_predict(const struct crowdest_stream *stream,
                                          size_t m,
                                          double *out_value);

// Expected new unique answers from `m` more HITs via spline extrapolation
// of the permutation-averaged accumulation curve.
//
// # Safety
// `stream` must be a live handle; `out_value` a valid pointer.
enum CrowdestStatus crowdest_spline_predict(const struct crowdest_stream *stream,
                                            size_t m,
                                            size_t permutations,
                                            uint64_t seed,
                                            double *out_value);

// Scans for list walking and returns the report as a JSON document. With
// `step > 0` the report also carries the per-prefix affected series.
//
// # Safety
// `stream` must be a live handle; `out_json` a valid pointer. Free the
// string with [`crowdest_string_free`].
enum CrowdestStatus crowdest_detect_lists_json(const struct crowdest_stream *stream,
                                               size_t s_min,
                                               double beta,
                                               double h,
                                               double threshold,
                                               size_t step,
                                               char **out_json);

// Per-prefix estimate series as a CSV document (columns: hits, unique,
// f1_ratio, uniform_mle, chao84, chao92, coverage, cv_squared).
//
// # Safety
// `stream` must be a live handle; `out_csv` a valid pointer. Free the
// string with [`crowdest_string_free`].
enum CrowdestStatus crowdest_estimate_series_csv(const struct crowdest_stream *stream,
                                                 size_t step,
                                                 char **out_csv);

// Generates a ground-truth simulation: a stream handle plus the truth
// sidecar as JSON (`N`, item weights, list-walk record indices).
//
// Workers draw without replacement with power-law contribution skew
// (exponent 1.5) and random interleaving; `list_walkers` extra workers
// each copy `list_items` consecutive items of the label-ordered list from
// offset 0.
//
// # Safety
// `out_stream` and `out_truth_json` must be valid pointers.
enum CrowdestStatus crowdest_simulate(enum CrowdestDistribution dist,
                                      size_t n_items,
                                      double shape,
                                      size_t workers,
                                      size_t hits,
                                      size_t list_walkers,
                                      size_t list_items,
                                      uint64_t seed,
                                      struct crowdest_stream **out_stream,
                                      char **out_truth_json);

// Releases a string returned by this library. Null is a no-op.
//
// # Safety
// `s` must be a pointer previously returned through a `char**`
// out-parameter and not freed since.
void crowdest_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CROWDEST_H */
