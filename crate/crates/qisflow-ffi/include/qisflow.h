/* C interface for the qisflow library. */

#ifndef QISFLOW_H
#define QISFLOW_H

/* Generated by cbindgen from qisflow-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Integration scheme selector.
typedef enum QisflowMethod {
  QISFLOW_METHOD_EULER = 0,
  QISFLOW_METHOD_RK4 = 1,
} QisflowMethod;

// Stochastic update rule selector.
typedef enum QisflowRule {
  QISFLOW_RULE_NORMALIZED = 0,
  QISFLOW_RULE_TRUNCATED = 1,
} QisflowRule;

// Outcome of an API call. Zero is success; everything else names the
// reason the inputs were rejected or the computation stopped.
typedef enum QisflowStatus {
  QISFLOW_STATUS_OK = 0,
  QISFLOW_STATUS_NULL_POINTER = 1,
  QISFLOW_STATUS_BAD_DIMENSION = 2,
  QISFLOW_STATUS_NOT_HERMITIAN = 3,
  QISFLOW_STATUS_NOT_DENSITY = 4,
  QISFLOW_STATUS_INVALID_TANGENT = 5,
  QISFLOW_STATUS_INVALID_SPHERE_POINT = 6,
  QISFLOW_STATUS_DEGENERATE_UPDATE = 7,
  QISFLOW_STATUS_BAD_ARGUMENT = 8,
  QISFLOW_STATUS_NUMERICAL_FAILURE = 9,
  QISFLOW_STATUS_INDEX_OUT_OF_RANGE = 10,
} QisflowStatus;

typedef struct QisflowDensity QisflowDensity;

typedef struct QisflowDensityTrajectory QisflowDensityTrajectory;

typedef struct QisflowSphereTrajectory QisflowSphereTrajectory;

typedef struct QisflowTangent QisflowTangent;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Static description of a status code.
//
// # Safety
// Always safe; the returned pointer is a NUL-terminated static string and
// must not be freed.
const char *qisflow_status_message(enum QisflowStatus status);

// Builds a density matrix from `2 * dim * dim` interleaved doubles.
//
// # Safety
// `entries` must point to `2 * dim * dim` readable doubles and `out` to a
// writable handle slot. On success the caller owns the handle and must
// release it with [`qisflow_density_free`].
enum QisflowStatus qisflow_density_new(size_t dim,
                                       const double *entries,
                                       struct QisflowDensity **out);

// Draws a random density matrix in the interior of the manifold.
//
// # Safety
// `out` must point to a writable handle slot. On success the caller owns
// the handle and must release it with [`qisflow_density_free`].
enum QisflowStatus qisflow_density_random(size_t dim, uint64_t seed, struct QisflowDensity **out);

// Reports the dimension of a density handle.
//
// # Safety
// `density` must be a live handle from this library; `out` must be
// writable.
enum QisflowStatus qisflow_density_dim(const struct QisflowDensity *density, size_t *out);

// Copies the matrix behind a density handle into `2 * dim * dim`
// interleaved doubles.
//
// # Safety
// `density` must be a live handle; `out` must have room for
// `2 * dim * dim` doubles.
enum QisflowStatus qisflow_density_entries(const struct QisflowDensity *density, double *out);

// Releases a density handle. Accepts null.
//
// # Safety
// `density` must be null or a handle produced by this library that has
// not been freed already.
void qisflow_density_free(struct QisflowDensity *density);

// Builds a tangent (Hermitian, trace-free) matrix from interleaved
// doubles.
//
// # Safety
// `entries` must point to `2 * dim * dim` readable doubles and `out` to a
// writable handle slot. On success the caller owns the handle and must
// release it with [`qisflow_tangent_free`].
enum QisflowStatus qisflow_tangent_new(size_t dim,
                                       const double *entries,
                                       struct QisflowTangent **out);

// Draws a random tangent matrix.
//
// # Safety
// `out` must point to a writable handle slot. On success the caller owns
// the handle and must release it with [`qisflow_tangent_free`].
enum QisflowStatus qisflow_tangent_random(size_t dim, uint64_t seed, struct QisflowTangent **out);

// Releases a tangent handle. Accepts null.
//
// # Safety
// `tangent` must be null or a handle produced by this library that has
// not been freed already.
void qisflow_tangent_free(struct QisflowTangent *tangent);

// Solves the symmetric logarithmic derivative equation
// `(rho L + L rho) / 2 = xi` and writes `L` as interleaved doubles.
//
// # Safety
// `density` and `tangent` must be live handles of equal dimension; `out`
// must have room for `2 * dim * dim` doubles.
enum QisflowStatus qisflow_sld(const struct QisflowDensity *density,
                               const struct QisflowTangent *tangent,
                               double *out);

// Evaluates the Fisher pairing of two tangents at a density.
//
// # Safety
// `density`, `first`, and `second` must be live handles of equal
// dimension; `out` must be writable.
enum QisflowStatus qisflow_fisher_metric(const struct QisflowDensity *density,
                                         const struct QisflowTangent *first,
                                         const struct QisflowTangent *second,
                                         double *out);

// Squares a fully supported unit vector into simplex weights,
// `theta_j = w_j * w_j`.
//
// # Safety
// `w` must point to `dim` readable doubles and `out_theta` to `dim`
// writable doubles.
enum QisflowStatus qisflow_square_map(const double *w, size_t dim, double *out_theta);

// Evaluates the closed-form simplex flow at time `t` from the weights in
// `theta0`.
//
// # Safety
// `theta0` and `c` must point to `dim` readable doubles; `out_theta` must
// have room for `dim` doubles.
enum QisflowStatus qisflow_replicator(const double *theta0,
                                      const double *c,
                                      size_t dim,
                                      double t,
                                      double *out_theta);

// Integrates the sphere flow `w' = C w - (w . C w) w` from `w0` and
// returns a trajectory handle.
//
// # Safety
// `w0` and `c` must point to `dim` readable doubles; `out` must be a
// writable handle slot. On success the caller owns the handle and must
// release it with [`qisflow_sphere_trajectory_free`].
enum QisflowStatus qisflow_sphere_flow(const double *w0,
                                       const double *c,
                                       size_t dim,
                                       enum QisflowMethod method,
                                       double dt,
                                       double t_max,
                                       bool renormalize,
                                       size_t sample_stride,
                                       struct QisflowSphereTrajectory **out);

// Reports the number of samples in a sphere trajectory.
//
// # Safety
// `trajectory` must be a live handle; `out` must be writable.
enum QisflowStatus qisflow_sphere_trajectory_len(const struct QisflowSphereTrajectory *trajectory,
                                                 size_t *out);

// Copies sample `index` of a sphere trajectory: its time and its `dim`
// coordinates.
//
// # Safety
// `trajectory` must be a live handle; `out_time` must be writable and
// `out_state` must have room for the trajectory's dimension.
enum QisflowStatus qisflow_sphere_trajectory_sample(const struct QisflowSphereTrajectory *trajectory,
                                                    size_t index,
                                                    double *out_time,
                                                    double *out_state);

// Releases a sphere trajectory handle. Accepts null.
//
// # Safety
// `trajectory` must be null or a handle produced by this library that has
// not been freed already.
void qisflow_sphere_trajectory_free(struct QisflowSphereTrajectory *trajectory);

// Integrates the density flow `rho' = rho C + C rho - 2 tr(rho C) rho`
// from the density behind `rho0` and returns a trajectory handle. The run
// stops early if an eigenvalue reaches the positivity floor.
//
// # Safety
// `rho0` must be a live handle and `c` must point to `dim` readable
// doubles matching its dimension; `out` must be a writable handle slot.
// On success the caller owns the handle and must release it with
// [`qisflow_density_trajectory_free`].
enum QisflowStatus qisflow_density_flow(const struct QisflowDensity *rho0,
                                        const double *c,
                                        size_t dim,
                                        enum QisflowMethod method,
                                        double dt,
                                        double t_max,
                                        bool renormalize,
                                        size_t sample_stride,
                                        struct QisflowDensityTrajectory **out);

// Reports the number of samples in a density trajectory.
//
// # Safety
// `trajectory` must be a live handle; `out` must be writable.
enum QisflowStatus qisflow_density_trajectory_len(const struct QisflowDensityTrajectory *trajectory,
                                                  size_t *out);

// Copies sample `index` of a density trajectory: its time and the state
// matrix as `2 * dim * dim` interleaved doubles.
//
// # Safety
// `trajectory` must be a live handle; `out_time` must be writable and
// `out_entries` must have room for `2 * dim * dim` doubles.
enum QisflowStatus qisflow_density_trajectory_sample(const struct QisflowDensityTrajectory *trajectory,
                                                     size_t index,
                                                     double *out_time,
                                                     double *out_entries);

// Reports whether a density run stopped at the positivity boundary. When
// it did, writes the hit time and the offending eigenvalue; otherwise
// both outputs are set to NaN.
//
// # Safety
// `trajectory` must be a live handle; all outputs must be writable.
enum QisflowStatus qisflow_density_trajectory_truncated(const struct QisflowDensityTrajectory *trajectory,
                                                        bool *out_truncated,
                                                        double *out_time,
                                                        double *out_min_eigenvalue);

// Releases a density trajectory handle. Accepts null.
//
// # Safety
// `trajectory` must be null or a handle produced by this library that has
// not been freed already.
void qisflow_density_trajectory_free(struct QisflowDensityTrajectory *trajectory);

// Integrates the sphere flow and the density flow from matched starting
// points and writes the largest deviation between the squared sphere
// trajectory and the density diagonal.
//
// # Safety
// `w0` and `c` must point to `dim` readable doubles; `out_sup` must be
// writable.
enum QisflowStatus qisflow_conjugacy_sup(const double *w0,
                                         const double *c,
                                         size_t dim,
                                         enum QisflowMethod method,
                                         double dt,
                                         double t_max,
                                         size_t sample_stride,
                                         double *out_sup);

// Applies one stochastic learning update to the coupling vector `w` for
// the signal `x` and writes the new coupling vector.
//
// # Safety
// `w` and `x` must point to `dim` readable doubles; `out_w` must have
// room for `dim` doubles.
enum QisflowStatus qisflow_oja_step(enum QisflowRule rule,
                                    size_t dim,
                                    const double *w,
                                    const double *x,
                                    double eta,
                                    double *out_w);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QISFLOW_H */
