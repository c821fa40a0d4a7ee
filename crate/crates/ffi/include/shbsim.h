#ifndef SHBSIM_H
#define SHBSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ShbStatus {
  SHB_STATUS_OK = 0,
  SHB_STATUS_NULL_POINTER = 1,
  SHB_STATUS_INVALID_PARAMS = 2,
  SHB_STATUS_DOMAIN = 3,
  SHB_STATUS_NOT_DOMINATED = 4,
  SHB_STATUS_GRID = 5,
  SHB_STATUS_MISMATCH = 6,
  SHB_STATUS_CONFIG = 7,
  SHB_STATUS_IO = 8,
  /**
   * A metric or result is requested before it exists.
   */
  SHB_STATUS_NOT_READY = 9,
  SHB_STATUS_UNKNOWN_FIELD = 10,
  SHB_STATUS_PANIC = 99,
} ShbStatus;

typedef enum ShbScheduleLabel {
  SHB_SCHEDULE_LABEL_POOLING = 0,
  SHB_SCHEDULE_LABEL_SEPARATING = 1,
  SHB_SCHEDULE_LABEL_HIRE_HIGH_ONLY = 2,
  SHB_SCHEDULE_LABEL_HIRE_LOW_ONLY = 3,
  SHB_SCHEDULE_LABEL_HIRE_NONE = 4,
} ShbScheduleLabel;

typedef enum ShbStage {
  SHB_STAGE_PRE = 0,
  SHB_STAGE_POST = 1,
  SHB_STAGE_DELTA = 2,
} ShbStage;

/**
 * Opaque population handle.
 */
typedef struct ShbPopulation ShbPopulation;

/**
 * A single two-type match.
 */
typedef struct ShbTwoTypeParams {
  double eta;
  double w_low;
  double w_high;
  double z;
  double c;
  double z_new;
  /**
   * Cost of disclosing.
   */
  double c_disclose;
  /**
   * Cost of withholding under the enquiry status of interest.
   */
  double c_withhold;
  /**
   * Firm's probability of facing a low earner.
   */
  double f_low;
} ShbTwoTypeParams;

typedef struct ShbWageSchedule {
  double w_nondisclose;
  double w_disclose_low;
  double w_disclose_high;
  enum ShbScheduleLabel label;
  double expected_profit;
} ShbWageSchedule;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next call into this library on the same thread.
 */
const char *shb_last_error_message(void);

/**
 * Static, NUL-terminated name of a status code.
 */
const char *shb_status_name(enum ShbStatus status);

/**
 * Profit-maximizing schedule of the two-type game.
 *
 * # Safety
 * `params` must point to a readable `ShbTwoTypeParams` and `out` to a
 * writable `ShbWageSchedule`.
 */
enum ShbStatus shb_two_type_solve(const struct ShbTwoTypeParams *params,
                                  struct ShbWageSchedule *out);

/**
 * Low-earner share above which separating beats pooling. `f_low` is
 * ignored. `degenerate` is set when the two menus never differ.
 *
 * # Safety
 * `params` must be readable; `threshold` and `degenerate` writable.
 */
enum ShbStatus shb_threshold(const struct ShbTwoTypeParams *params,
                             double *threshold,
                             bool *degenerate);

/**
 * New population with default parameters. Returns NULL only on panic.
 */
struct ShbPopulation *shb_population_new(void);

/**
 * # Safety
 * `pop` must come from [`shb_population_new`] and not be used afterwards.
 * NULL is ignored.
 */
void shb_population_free(struct ShbPopulation *pop);

/**
 * Sets the low-earner shares; clears any previous result.
 *
 * # Safety
 * `pop` must be a live handle.
 */
enum ShbStatus shb_population_set_f_low(struct ShbPopulation *pop, double female, double male);

/**
 * # Safety
 * `pop` must be a live handle.
 */
enum ShbStatus shb_population_set_size(struct ShbPopulation *pop,
                                       size_t n_per_gender,
                                       uint64_t seed);

/**
 * Simulates both scenarios and keeps their metrics on the handle.
 *
 * # Safety
 * `pop` must be a live handle.
 */
enum ShbStatus shb_population_run(struct ShbPopulation *pop);

/**
 * Reads one metric, by CSV column name without the stage prefix (for
 * example `"female_premium"`). `defined` is false for undefined metrics.
 *
 * # Safety
 * `pop` must be a live handle, `field` a NUL-terminated string, and
 * `value` and `defined` writable.
 */
enum ShbStatus shb_population_metric(struct ShbPopulation *pop,
                                     enum ShbStage stage,
                                     const char *field,
                                     double *value,
                                     bool *defined);

/**
 * Writes the six observation flags of the last run into `out[0..6]`.
 *
 * # Safety
 * `pop` must be a live handle and `out` writable for six `bool`s.
 */
enum ShbStatus shb_population_observations(struct ShbPopulation *pop, bool *out);

/**
 * Runs a TOML configuration (or manifest) and writes its artifacts into
 * `out_dir`. A failed proposition check returns `Ok` with `checks_failed`
 * set.
 *
 * # Safety
 * `config_path` and `out_dir` must be NUL-terminated strings and
 * `checks_failed` writable.
 */
enum ShbStatus shb_run_config(const char *config_path, const char *out_dir, bool *checks_failed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SHBSIM_H */
