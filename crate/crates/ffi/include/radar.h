/* SPDX-License-Identifier: MIT OR Apache-2.0 */

#ifndef RADAR_H
#define RADAR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define RADAR_NUM_MEMBERS 4

typedef enum RadarStatus {
  RADAR_STATUS_OK = 0,
  RADAR_STATUS_NULL_POINTER = 1,
  RADAR_STATUS_INVALID_UTF8 = 2,
  RADAR_STATUS_IO = 3,
  RADAR_STATUS_MALFORMED = 4,
  RADAR_STATUS_INVALID_TRACE = 5,
  RADAR_STATUS_FEATURE_MISMATCH = 6,
  RADAR_STATUS_INVALID_INPUT = 7,
  RADAR_STATUS_BUFFER_TOO_SMALL = 8,
  RADAR_STATUS_PANIC = 9,
} RadarStatus;

typedef enum RadarLabel {
  RADAR_LABEL_RECALL = 0,
  RADAR_LABEL_REASONING = 1,
} RadarLabel;

// Opaque trained ensemble.
typedef struct RadarModel RadarModel;

// Opaque validated trace.
typedef struct RadarTrace RadarTrace;

// Ensemble output. Members are ordered random forest, gradient boosting,
// SVM, logistic regression.
typedef struct RadarPrediction {
  enum RadarLabel label;
  double confidence;
  double mean_probability;
  enum RadarLabel member_votes[RADAR_NUM_MEMBERS];
  double member_probabilities[RADAR_NUM_MEMBERS];
  double rds;
  double rci;
  double mechanistic;
  double circuit;
} RadarPrediction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version, static NUL-terminated string.
const char *radar_version(void);

// Message of the last failed call on this thread; empty if none. Valid
// until the next failing call on the same thread.
const char *radar_last_error_message(void);

// Length of a feature vector (37).
size_t radar_feature_count(void);

// Canonical name of feature `index`, or null when out of range.
const char *radar_feature_name(size_t index);

// Parses and validates trace JSON (uncompressed).
//
// # Safety
// `data` must point to `len` readable bytes; `out` must be writable.
enum RadarStatus radar_trace_parse(const uint8_t *data, size_t len, struct RadarTrace **out);

// Reads a `.radar.json` or `.radar.json.gz` file.
//
// # Safety
// `file` must be a NUL-terminated string; `out` must be writable.
enum RadarStatus radar_trace_load(const char *file, struct RadarTrace **out);

// # Safety
// `trace` must be null or a handle from this library, freed at most once.
void radar_trace_free(struct RadarTrace *trace);

// Number of layers in the trace.
//
// # Safety
// `trace` must be a live handle.
size_t radar_trace_num_layers(const struct RadarTrace *trace);

// Writes the 37 features with default analysis settings into `out`, which
// must hold at least `radar_feature_count()` values.
//
// # Safety
// `trace` must be a live handle; `out` must point to `len` writable doubles.
enum RadarStatus radar_extract_features(const struct RadarTrace *trace, double *out, size_t len);

// Parses a model file's contents.
//
// # Safety
// `data` must point to `len` readable bytes; `out` must be writable.
enum RadarStatus radar_model_parse(const uint8_t *data, size_t len, struct RadarModel **out);

// # Safety
// `file` must be a NUL-terminated string; `out` must be writable.
enum RadarStatus radar_model_load(const char *file, struct RadarModel **out);

// # Safety
// `model` must be null or a handle from this library, freed at most once.
void radar_model_free(struct RadarModel *model);

// Classifies a feature vector in canonical order; `len` must be 37.
//
// # Safety
// `model` must be a live handle, `features` must point to `len` doubles and
// `out` must be writable.
enum RadarStatus radar_model_predict(const struct RadarModel *model,
                                     const double *features,
                                     size_t len,
                                     struct RadarPrediction *out);

// Extracts features with the model's analysis settings and classifies them.
//
// # Safety
// `model` and `trace` must be live handles; `out` must be writable.
enum RadarStatus radar_model_predict_trace(const struct RadarModel *model,
                                           const struct RadarTrace *trace,
                                           struct RadarPrediction *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RADAR_H */
