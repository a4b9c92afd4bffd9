#ifndef RAMSEY_FORGE_H
#define RAMSEY_FORGE_H

/* Generated by cbindgen from ramsey-forge-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Success.
#define RF_OK 0

// A required pointer argument was null.
#define RF_ERR_NULL -1

// The configuration was rejected (n too small, epsilon out of range, …).
#define RF_ERR_CONFIG -2

// The call does not apply to the process's current stage.
#define RF_ERR_STAGE -3

// Phase-2 resampling exhausted its budget.
#define RF_ERR_BUDGET -4

// The finished coloring failed verification.
#define RF_ERR_INVALID -5

// A file could not be read or written.
#define RF_ERR_IO -6

// A string argument was not valid UTF-8.
#define RF_ERR_UTF8 -7

// A vertex or color index was out of range.
#define RF_ERR_BOUNDS -8

// An internal panic was caught; the handle may be poisoned and should be
// freed.
#define RF_ERR_PANIC -9

// Verification mode selectors for [`rf_process_validate`].
#define RF_MODE_AUTO -1

#define RF_MODE_EXHAUSTIVE 0

#define RF_MODE_PAIRWISE 1

#define RF_MODE_SAMPLED 2

// Trajectory selectors for [`rf_traj_eval`].
#define RF_TRAJ_Q 0

#define RF_TRAJ_Y 1

#define RF_TRAJ_A 2

#define RF_TRAJ_B 3

#define RF_TRAJ_C1 4

#define RF_TRAJ_C2 5

#define RF_TRAJ_C 6

#define RF_TRAJ_D 7

#define RF_TRAJ_E 8

#define RF_TRAJ_F 9

#define RF_TRAJ_Z0 10

#define RF_TRAJ_Z1 11

#define RF_TRAJ_Z2 12

// Sentinel returned by [`rf_process_edge_color`] for uncolored edges.
#define RF_EDGE_UNCOLORED -10

// Opaque process handle.
typedef struct RfProcess RfProcess;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Create a process for `K_n` with palette slack `epsilon` and the given
// master seed. Returns null if the configuration is invalid (check
// stderr-free: call with a valid config to distinguish; null means
// rejected config or allocation panic).
//
// # Safety
// The returned pointer must be released with [`rf_process_free`].
RfProcess *rf_process_new(uint32_t n, double epsilon, uint64_t seed);

// Release a handle. Null is a no-op.
//
// # Safety
// `p` must be a pointer returned by [`rf_process_new`] that has not
// already been freed.
void rf_process_free(RfProcess *p);

// Run phase 1 to its natural end. Valid once, on a fresh handle.
//
// # Safety
// `p` must be a live handle from [`rf_process_new`] (or null).
int rf_process_run_phase1(RfProcess *p);

// Color the leftover edges with reserved colors and resample until no bad
// event remains. Valid once, after phase 1.
//
// # Safety
// `p` must be a live handle from [`rf_process_new`] (or null).
int rf_process_complete(RfProcess *p);

// Verify the finished coloring; mode is one of the `RF_MODE_*` constants.
// Returns the number of violating 4-cliques found (0 for a valid
// coloring), or a negative error code.
//
// # Safety
// `p` must be a live handle from [`rf_process_new`] (or null).
int64_t rf_process_validate(RfProcess *p, int mode);

// Number of distinct colors on edges so far.
//
// # Safety
// `p` must be a live handle from [`rf_process_new`] (or null).
int64_t rf_process_colors_used(const RfProcess *p);

// Color of edge `{u, v}`: a color index, `-10` if the edge is still
// uncolored, or a negative error code for bad arguments.
//
// # Safety
// `p` must be a live handle from [`rf_process_new`] (or null).
int64_t rf_process_edge_color(const RfProcess *p, uint32_t u, uint32_t v);

// Write the current (possibly partial) coloring to `path` in the engine's
// text format.
//
// # Safety
// `p` must be a live handle (or null); `path` must be a valid
// null-terminated string (or null).
int rf_process_write_coloring(const RfProcess *p, const char *path);

// Evaluate a predicted trajectory (an `RF_TRAJ_*` selector) at rescaled
// time `t ∈ [0, 1/6]` with special fraction `s`. Returns NaN for an
// unknown selector or out-of-domain `t`.
double rf_traj_eval(int id, double t, double s);

// Static description of an `RF_*` status code.
const char *rf_error_message(int code);

// Crate version as a static string.
const char *rf_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RAMSEY_FORGE_H */
