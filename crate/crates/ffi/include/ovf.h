#ifndef OVF_H
#define OVF_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OvfStatus {
  OVF_STATUS_OK = 0,
  OVF_STATUS_NULL_POINTER = 1,
  OVF_STATUS_VALIDATION = 2,
  OVF_STATUS_JAM = 3,
  OVF_STATUS_IO = 4,
  OVF_STATUS_PARSE = 5,
  OVF_STATUS_PANIC = 6,
} OvfStatus;

typedef enum OvfMode {
  OVF_MODE_HF = 0,
  OVF_MODE_LF = 1,
} OvfMode;

typedef enum OvfPlanKind {
  OVF_PLAN_KIND_TRANSLATE = 0,
  OVF_PLAN_KIND_ROTATE = 1,
} OvfPlanKind;

typedef enum OvfDirection {
  OVF_DIRECTION_DISTAL = 0,
  OVF_DIRECTION_PROXIMAL = 1,
  OVF_DIRECTION_CLOCKWISE = 2,
  OVF_DIRECTION_COUNTERCLOCKWISE = 3,
} OvfDirection;

/**
 * Fold pattern parameters.
 */
typedef struct OvfFold OvfFold;

/**
 * Parsed simulation scenario.
 */
typedef struct OvfScenario OvfScenario;

/**
 * Logged simulation run.
 */
typedef struct OvfTrajectory OvfTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *ovf_last_error(void);

/**
 * Creates fold parameters with face lengths `l`, `k` (mm), fold angle
 * `alpha` (rad) and `n_units` units; `t` and `m` take their defaults.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum OvfStatus ovf_fold_new(double l,
                            double k,
                            double alpha,
                            uint32_t n_units,
                            struct OvfFold **out);

/**
 * Creates fold parameters from every field: `ratio` is k / l.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum OvfStatus ovf_fold_new_full(double l,
                                 double ratio,
                                 double alpha,
                                 double t,
                                 double m,
                                 uint32_t n_units,
                                 struct OvfFold **out);

/**
 * # Safety
 * `fold` must come from `ovf_fold_new*` and not be freed twice.
 */
void ovf_fold_free(struct OvfFold *fold);

/**
 * Structure thickness in `mode` (mm).
 *
 * # Safety
 * `fold` and `out` must be valid pointers.
 */
enum OvfStatus ovf_fold_thickness(const struct OvfFold *fold, enum OvfMode mode, double *out);

/**
 * Thickness change between modes (mm).
 *
 * # Safety
 * `fold` and `out` must be valid pointers.
 */
enum OvfStatus ovf_fold_delta_h(const struct OvfFold *fold, double *out);

/**
 * Opening between consecutive exposed faces in `mode` (mm).
 *
 * # Safety
 * `fold` and `out` must be valid pointers.
 */
enum OvfStatus ovf_fold_valley_gap(const struct OvfFold *fold, enum OvfMode mode, double *out);

/**
 * Actuation travel of a full fold (mm).
 *
 * # Safety
 * `fold` and `out` must be valid pointers.
 */
enum OvfStatus ovf_fold_travel(const struct OvfFold *fold, double *out);

/**
 * Peak folding force with the default hinge stiffness (N).
 *
 * # Safety
 * `fold` and `out` must be valid pointers.
 */
enum OvfStatus ovf_fold_peak_force(const struct OvfFold *fold, double *out);

/**
 * Parses a scenario from TOML text.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum OvfStatus ovf_scenario_from_toml(const char *text, struct OvfScenario **out);

/**
 * Reads a scenario file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum OvfStatus ovf_scenario_load(const char *path, struct OvfScenario **out);

/**
 * # Safety
 * `scenario` must come from `ovf_scenario_*` and not be freed twice.
 */
void ovf_scenario_free(struct OvfScenario *scenario);

/**
 * Runs a plan on the scenario. On `OVF_STATUS_JAM` `*out` still receives
 * the trajectory logged before the jam; on other failures it is NULL.
 *
 * # Safety
 * `scenario` and `out` must be valid pointers.
 */
enum OvfStatus ovf_sim_run(const struct OvfScenario *scenario,
                           enum OvfPlanKind plan,
                           enum OvfDirection direction,
                           uint32_t cycles,
                           struct OvfTrajectory **out);

/**
 * # Safety
 * `traj` must come from `ovf_sim_run` and not be freed twice.
 */
void ovf_trajectory_free(struct OvfTrajectory *traj);

/**
 * Number of logged states, or 0 for NULL.
 *
 * # Safety
 * `traj` must be NULL or a valid trajectory.
 */
size_t ovf_trajectory_len(const struct OvfTrajectory *traj);

/**
 * Object pose at state `index`: x, y (mm) and yaw (rad).
 *
 * # Safety
 * All pointers must be valid.
 */
enum OvfStatus ovf_trajectory_pose(const struct OvfTrajectory *traj,
                                   size_t index,
                                   double *x,
                                   double *y,
                                   double *yaw);

/**
 * Net translation along the starting finger axis (mm) and net rotation
 * (deg).
 *
 * # Safety
 * All pointers must be valid.
 */
enum OvfStatus ovf_trajectory_metrics(const struct OvfTrajectory *traj,
                                      double *translation,
                                      double *rotation);

/**
 * Writes the trajectory as CSV.
 *
 * # Safety
 * `traj` must be valid and `path` a NUL-terminated string.
 */
enum OvfStatus ovf_trajectory_write_csv(const struct OvfTrajectory *traj, const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OVF_H */
