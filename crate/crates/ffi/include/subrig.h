#ifndef SUBRIG_H
#define SUBRIG_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SubrigStatus {
  SUBRIG_STATUS_OK = 0,
  SUBRIG_STATUS_NULL_POINTER = 1,
  SUBRIG_STATUS_INVALID_UTF8 = 2,
  /**
   * The input was rejected; the report, if requested, describes why.
   */
  SUBRIG_STATUS_INPUT_ERROR = 3,
  /**
   * The analysis finished without a decision within its layer cap.
   */
  SUBRIG_STATUS_UNDETERMINED = 4,
  SUBRIG_STATUS_INTERNAL = 5,
} SubrigStatus;

/**
 * A parsed metric pair.
 */
typedef struct SubrigFrame SubrigFrame;

/**
 * The skew forms of a pencil document.
 */
typedef struct SubrigPencil SubrigPencil;

/**
 * A JSON report.
 */
typedef struct SubrigReport SubrigReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *subrig_version(void);

/**
 * Run a CLI command (`"analyze"`, `"pencil"`, ...) on one JSON document with default flags
 * and the given seed. `max_layers = 0` keeps the default cap.
 *
 * # Safety
 * `command` and `json` must be NUL-terminated strings; `out` may be null.
 */
enum SubrigStatus subrig_run(const char *command,
                             const char *json,
                             uint32_t max_layers,
                             uint64_t seed,
                             struct SubrigReport **out);

/**
 * Parse a frame document, a Carnot document with `alpha_sq`, or an lc-build report.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `frame` must be non-null; `err` may be null.
 */
enum SubrigStatus subrig_frame_from_json(const char *json,
                                         struct SubrigFrame **frame,
                                         struct SubrigReport **err);

/**
 * # Safety
 * `frame` must come from [`subrig_frame_from_json`] and not be freed twice.
 */
void subrig_frame_free(struct SubrigFrame *frame);

/**
 * Dimension and rank of a frame.
 *
 * # Safety
 * `frame` must be a live handle; `n` and `m` may be null.
 */
enum SubrigStatus subrig_frame_dims(const struct SubrigFrame *frame, uint32_t *n, uint32_t *m);

/**
 * Decide the pair. `max_layers = 0` keeps the default cap of `2n`.
 *
 * # Safety
 * `frame` must be a live handle; `out` may be null.
 */
enum SubrigStatus subrig_analyze(const struct SubrigFrame *frame,
                                 uint32_t max_layers,
                                 uint64_t seed,
                                 struct SubrigReport **out);

/**
 * # Safety
 * `json` must be a NUL-terminated string; `pencil` must be non-null; `err` may be null.
 */
enum SubrigStatus subrig_pencil_from_json(const char *json,
                                          struct SubrigPencil **pencil,
                                          struct SubrigReport **err);

/**
 * # Safety
 * `pencil` must come from [`subrig_pencil_from_json`] and not be freed twice.
 */
void subrig_pencil_free(struct SubrigPencil *pencil);

/**
 * Invariants (for exactly two forms) and the decomposability verdict.
 *
 * # Safety
 * `pencil` must be a live handle; `out` may be null.
 */
enum SubrigStatus subrig_pencil_decompose(const struct SubrigPencil *pencil,
                                          uint32_t plane_budget,
                                          uint64_t seed,
                                          struct SubrigReport **out);

/**
 * The report text; valid until the report is freed.
 *
 * # Safety
 * `report` must be a live handle or null.
 */
const char *subrig_report_json(const struct SubrigReport *report);

/**
 * # Safety
 * `report` must come from this library and not be freed twice.
 */
void subrig_report_free(struct SubrigReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUBRIG_H */
