#ifndef GSM_H
#define GSM_H

/* Generated by cbindgen from crates/ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GsmStatus {
  GSM_STATUS_OK = 0,
  GSM_STATUS_NULL_POINTER = 1,
  GSM_STATUS_INVALID_ARGUMENT = 2,
  GSM_STATUS_DIMENSION_MISMATCH = 3,
  GSM_STATUS_TOO_FEW_FRAMES = 4,
  GSM_STATUS_NOT_TRAINED = 5,
  GSM_STATUS_NO_VALID_SUPPORT = 6,
  GSM_STATUS_INTERNAL = 7,
  GSM_STATUS_PANIC = 8,
} GsmStatus;

typedef enum GsmPolicy {
  /**
   * Undefined pixels count as background.
   */
  GSM_POLICY_UB = 0,
  /**
   * Undefined pixels count as foreground.
   */
  GSM_POLICY_UF = 1,
} GsmPolicy;

typedef enum GsmLabel {
  GSM_LABEL_BACKGROUND = 0,
  GSM_LABEL_FOREGROUND = 1,
  GSM_LABEL_UNDEFINED = 2,
} GsmLabel;

/**
 * Trained scene model; opaque to C.
 */
typedef struct GsmModel GsmModel;

/**
 * Training state; opaque to C.
 */
typedef struct GsmTrainer GsmTrainer;

typedef struct GsmConfig {
  uint32_t n;
  double gamma;
  double theta;
  double xi;
  double alpha;
  double gamma_update;
  enum GsmPolicy undefined_policy;
  uint16_t depth_min;
  uint16_t depth_max;
  double floor_r;
  double floor_g;
  double floor_d;
} GsmConfig;

/**
 * The seven change-detection measures plus foreground similarity.
 */
typedef struct GsmMetrics {
  double recall;
  double specificity;
  double fpr;
  double fnr;
  double pwc;
  double precision;
  double fmeasure;
  double s;
} GsmMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the message of the last failed call on this thread into `buf`
 * (NUL-terminated, truncated to `len - 1` bytes). Returns the full message
 * length, excluding the terminator.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t gsm_last_error_message(char *buf, size_t len);

/**
 * Writes the default configuration to `out`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum GsmStatus gsm_config_default(struct GsmConfig *out);

/**
 * Creates a trainer for `width x height` frames.
 *
 * # Safety
 * `config` must be null (defaults) or valid for reads; `out` must be valid
 * for writes.
 */
enum GsmStatus gsm_trainer_new(uint32_t width,
                               uint32_t height,
                               const struct GsmConfig *config,
                               struct GsmTrainer **out);

/**
 * Adds one training frame.
 *
 * # Safety
 * `trainer` must come from [`gsm_trainer_new`]; `rgb` and `depth` must
 * hold a full frame each.
 */
enum GsmStatus gsm_trainer_push(struct GsmTrainer *trainer,
                                const uint8_t *rgb,
                                const uint16_t *depth);

/**
 * Fits the model. Always consumes `trainer`, even on failure.
 *
 * # Safety
 * `trainer` must come from [`gsm_trainer_new`] and not be used afterwards;
 * `out` must be valid for writes.
 */
enum GsmStatus gsm_trainer_finish(struct GsmTrainer *trainer, struct GsmModel **out);

/**
 * # Safety
 * `trainer` must be null or come from [`gsm_trainer_new`].
 */
void gsm_trainer_free(struct GsmTrainer *trainer);

/**
 * Frame size of a trained model.
 *
 * # Safety
 * `model` must come from [`gsm_trainer_finish`]; `width`/`height` must be
 * valid for writes.
 */
enum GsmStatus gsm_model_dims(const struct GsmModel *model, uint32_t *width, uint32_t *height);

/**
 * Segments one frame and updates the model. `labels_out` receives one
 * [`GsmLabel`] value per pixel.
 *
 * # Safety
 * `model` must come from [`gsm_trainer_finish`]; `rgb`, `depth` and
 * `labels_out` must hold a full frame each.
 */
enum GsmStatus gsm_model_segment(struct GsmModel *model,
                                 const uint8_t *rgb,
                                 const uint16_t *depth,
                                 uint8_t *labels_out);

/**
 * # Safety
 * `model` must be null or come from [`gsm_trainer_finish`].
 */
void gsm_model_free(struct GsmModel *model);

/**
 * Folds `len` label values into a 0/1 foreground mask.
 *
 * # Safety
 * `labels` and `mask_out` must each hold `len` bytes.
 */
enum GsmStatus gsm_collapse(const uint8_t *labels,
                            size_t len,
                            enum GsmPolicy policy,
                            uint8_t *mask_out);

/**
 * Change-detection measures from confusion counts.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum GsmStatus gsm_metrics(uint64_t tp,
                           uint64_t fp,
                           uint64_t tn,
                           uint64_t fn_,
                           struct GsmMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GSM_H */
