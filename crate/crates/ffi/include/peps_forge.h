#ifndef PEPS_FORGE_H
#define PEPS_FORGE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

/*
 Status codes. 1 to 3 match the CLI exit codes.
 */
typedef enum PfStatus {
  PF_STATUS_OK = 0,
  PF_STATUS_VERIFICATION = 1,
  PF_STATUS_INVALID_INPUT = 2,
  PF_STATUS_CAPACITY = 3,
  PF_STATUS_NULL_POINTER = 4,
  PF_STATUS_NUMERICAL = 5,
  PF_STATUS_PANIC = 6,
} PfStatus;

typedef enum PfMode {
  PF_MODE_BOUNDED = 0,
  PF_MODE_UNTIL_SUCCESS = 1,
} PfMode;

/*
 Opaque handle: a validated instance with every intermediate Hamiltonian
 analyzed.
 */
typedef struct PfInstance PfInstance;

typedef struct PfCostBounds {
  double measurement_bound;
  double runtime_bound;
} PfCostBounds;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null. Valid until the
 next failing call on the same thread.
 */
const char *pf_last_error_message(void);

/*
 Library version as a static string.
 */
const char *pf_version(void);

/*
 Parses a JSON instance config and prepares it for runs.

 # Safety
 `config_json` must be a valid NUL-terminated string and `out` valid for writes.
 */
enum PfStatus pf_instance_new(const char *config_json, struct PfInstance **out);

/*
 Releases an instance. Null is ignored.

 # Safety
 `instance` must come from [`pf_instance_new`] and not be freed twice.
 */
void pf_instance_free(struct PfInstance *instance);

/*
 Number of vertices, or 0 for a null handle.

 # Safety
 `instance` must be null or a live handle.
 */
size_t pf_instance_vertex_count(const struct PfInstance *instance);

/*
 Largest tensor condition number of the instance.

 # Safety
 `instance` must be a live handle and `out` valid for writes.
 */
enum PfStatus pf_instance_kappa(const struct PfInstance *instance, double *out);

/*
 Runs the algorithm once and returns the report as a JSON string.
 `eps <= 0` uses the config's value.

 # Safety
 `instance` must be a live handle and `out_json` valid for writes.
 */
enum PfStatus pf_run(const struct PfInstance *instance,
                     uint64_t seed,
                     double eps,
                     enum PfMode mode,
                     char **out_json);

/*
 Releases a string returned by this library. Null is ignored.

 # Safety
 `s` must come from this library and not be freed twice.
 */
void pf_string_free(char *s);

/*
 Termination probability of the repair loop with at most `m` repairs.

 # Safety
 `out` must be valid for writes.
 */
enum PfStatus pf_p_term(double p, uint64_t m, double *out);

/*
 Exponential upper bound on the failure probability.

 # Safety
 `out` must be valid for writes.
 */
enum PfStatus pf_p_fail_bound(double p, double m, double *out);

/*
 Repair budget `s` and `m` for a target error `eps`.

 # Safety
 `out_s` and `out_m` must be valid for writes.
 */
enum PfStatus pf_required_alternations(double kappa,
                                       size_t vertices,
                                       double eps,
                                       uint64_t *out_s,
                                       uint64_t *out_m);

/*
 Measurement-count and runtime bounds.

 # Safety
 `out` must be valid for writes.
 */
enum PfStatus pf_cost_model(size_t vertices,
                            size_t edges,
                            double kappa,
                            double eps,
                            double gap,
                            size_t physical_dim,
                            size_t degree,
                            struct PfCostBounds *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PEPS_FORGE_H */
