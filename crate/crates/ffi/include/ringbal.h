#ifndef RINGBAL_H
#define RINGBAL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

#define RB_TOPOLOGY_CYCLE 0

#define RB_TOPOLOGY_HARARY2 1

#define RB_PROCESS_AVERAGING 0

#define RB_PROCESS_TWO_CHOICE 1

#define RB_PROCESS_HYBRID 2

#define RB_WEIGHTS_UNIT 0

#define RB_WEIGHTS_UNIFORM 1

#define RB_WEIGHTS_EXPONENTIAL 2

typedef enum RbStatus {
  RB_STATUS_OK = 0,
  RB_STATUS_NULL_POINTER = 1,
  RB_STATUS_INVALID_ARGUMENT = 2,
  RB_STATUS_BUFFER_TOO_SMALL = 3,
  RB_STATUS_PANIC = 4,
} RbStatus;

/**
 * Opaque simulation handle.
 */
typedef struct RbSimulation RbSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failed call on this thread, or an empty
 * string. Valid until the next call on the same thread.
 */
const char *rb_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rb_version(void);

/**
 * Creates a simulation on `n` nodes with all loads zero. The random stream
 * is `(seed, run_id)`, the same one run `run_id` of an experiment uses.
 * `beta` is read only for the hybrid process.
 *
 * # Safety
 * `out` must be null or valid for one pointer write.
 */
enum RbStatus rb_simulation_new(uint32_t topology,
                                size_t n,
                                uint32_t process,
                                double beta,
                                uint32_t weights,
                                uint64_t seed,
                                uint64_t run_id,
                                struct RbSimulation **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `sim` must be null or a handle from [`rb_simulation_new`] not yet freed.
 */
void rb_simulation_free(struct RbSimulation *sim);

/**
 * Advances the simulation by `steps` steps.
 *
 * # Safety
 * `sim` must be null or a live handle.
 */
enum RbStatus rb_simulation_step(struct RbSimulation *sim, uint64_t steps);

/**
 * Node count.
 *
 * # Safety
 * `sim` must be null or a live handle; `out` null or writable.
 */
enum RbStatus rb_simulation_n(const struct RbSimulation *sim, size_t *out);

/**
 * Steps taken so far.
 *
 * # Safety
 * `sim` must be null or a live handle; `out` null or writable.
 */
enum RbStatus rb_simulation_time(const struct RbSimulation *sim, uint64_t *out);

/**
 * Current max-minus-min load.
 *
 * # Safety
 * `sim` must be null or a live handle; `out` null or writable.
 */
enum RbStatus rb_simulation_gap(const struct RbSimulation *sim, double *out);

/**
 * Current `φ_k`, `1 ≤ k < n`.
 *
 * # Safety
 * `sim` must be null or a live handle; `out` null or writable.
 */
enum RbStatus rb_simulation_hop_potential(const struct RbSimulation *sim, size_t k, double *out);

/**
 * Copies the `n` loads into `buf`, which must hold at least `n` values.
 *
 * # Safety
 * `sim` must be null or a live handle; `buf` null or valid for `len` writes.
 */
enum RbStatus rb_simulation_loads(const struct RbSimulation *sim, double *buf, size_t len);

/**
 * `(k(n−k) − 1)·ew2`, the stationary upper bound on `E[φ_k]` for the cycle.
 *
 * # Safety
 * `out` must be null or writable.
 */
enum RbStatus rb_stationary_bound(size_t n, size_t k, double ew2, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RINGBAL_H */
