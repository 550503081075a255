/* C interface of the nsmild pseudo-spectral Navier-Stokes toolkit. */

#ifndef NSMILD_H
#define NSMILD_H

/* Generated from the Rust sources; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define NSMILD_OK 0

// A required pointer argument was null.
#define NSMILD_ERR_NULL -1

// An argument was rejected (bad grid, exponent out of range, parse error).
#define NSMILD_ERR_INVALID -2

// The fixed-point iteration refused the data as too large.
#define NSMILD_ERR_SMALLNESS -3

// The iteration budget ran out before the tolerance was met.
#define NSMILD_ERR_NO_CONVERGENCE -4

// The time integration left the trusted regime.
#define NSMILD_ERR_BLOWUP -5

// Operating-system I/O failure.
#define NSMILD_ERR_IO -6

// A file was readable but not in the expected format.
#define NSMILD_ERR_FORMAT -7

// An internal invariant failed; the handle states are still valid.
#define NSMILD_ERR_PANIC -8

// Opaque divergence-free velocity field.
typedef struct NsmildField NsmildField;

// Opaque periodic grid description.
typedef struct NsmildGrid NsmildGrid;

// Opaque scalar field (for example a recovered pressure).
typedef struct NsmildScalar NsmildScalar;

// Opaque time-stamped sequence of velocity fields.
typedef struct NsmildTrajectory NsmildTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *nsmild_version(void);

// Copy the current thread's last error message into `buf` (truncated to
// `cap - 1` bytes, always NUL-terminated when `cap > 0`). Returns the
// full message length in bytes, excluding the terminator, so callers can
// retry with a larger buffer.
//
// # Safety
// `buf` must be valid for writes of `cap` bytes, or `cap` must be 0.
size_t nsmild_last_error(char *buf, size_t cap);

// Create a periodic grid: dimension `d` (2 or 3), `n` modes per axis
// (even), box side `l`.
//
// # Safety
// `out` must be valid for writes.
int32_t nsmild_grid_new(size_t d, size_t n, double l, struct NsmildGrid **out);

// # Safety
// `grid` must be a handle from this library or null; it is invalid after.
void nsmild_grid_free(struct NsmildGrid *grid);

// Read back the grid parameters. Null outputs are skipped.
//
// # Safety
// `grid` must be a valid handle; non-null outputs valid for writes.
int32_t nsmild_grid_info(const struct NsmildGrid *grid, size_t *d, size_t *n, double *l);

// Exact single-mode solution data with the given amplitude.
//
// # Safety
// `grid` must be a valid handle; `out` valid for writes.
int32_t nsmild_taylor_green(const struct NsmildGrid *grid,
                            double amplitude,
                            struct NsmildField **out);

// Random-phase data with spectral slope `beta`, deterministic in `seed`,
// scaled to the given `L^2` norm.
//
// # Safety
// `grid` must be a valid handle; `out` valid for writes.
int32_t nsmild_random_slope(const struct NsmildGrid *grid,
                            double beta,
                            uint64_t seed,
                            double amplitude,
                            struct NsmildField **out);

// Columnar vortex with Gaussian stream function of the given width.
//
// # Safety
// `grid` must be a valid handle; `out` valid for writes.
int32_t nsmild_gaussian_vortex(const struct NsmildGrid *grid,
                               double width,
                               double amplitude,
                               struct NsmildField **out);

// # Safety
// `field` must be a handle from this library or null; invalid after.
void nsmild_field_free(struct NsmildField *field);

// # Safety
// `field` must be a valid handle; `out` valid for writes.
int32_t nsmild_field_clone(const struct NsmildField *field, struct NsmildField **out);

// Apply the heat semigroup for time `t >= 0`.
//
// # Safety
// `field` must be a valid handle; `out` valid for writes.
int32_t nsmild_field_heat_evolve(const struct NsmildField *field,
                                 double t,
                                 struct NsmildField **out);

// Project onto divergence-free fields.
//
// # Safety
// `field` must be a valid handle; `out` valid for writes.
int32_t nsmild_field_leray_project(const struct NsmildField *field, struct NsmildField **out);

// Lebesgue norm of the velocity, `1 <= q <= inf` (pass `INFINITY` for the
// sup norm).
//
// # Safety
// `field` must be a valid handle; `out` valid for writes.
int32_t nsmild_field_lq_norm(const struct NsmildField *field, double q, double *out);

// Homogeneous Sobolev norm `||Lambda^s u||_q`.
//
// # Safety
// `field` must be a valid handle; `out` valid for writes.
int32_t nsmild_field_sobolev_norm(const struct NsmildField *field, double s, double q, double *out);

// Heat-characterization Besov norm with negative smoothness `s < 0`,
// evaluated on the grid's resolved time window.
//
// # Safety
// `field` must be a valid handle; `out` valid for writes.
int32_t nsmild_field_besov_norm(const struct NsmildField *field, double s, double q, double *out);

// Write the velocity in the binary container format.
//
// # Safety
// `field` must be a valid handle; `path` a NUL-terminated string.
int32_t nsmild_field_save(const struct NsmildField *field, const char *path);

// Read a velocity written by [`nsmild_field_save`].
//
// # Safety
// `path` must be a NUL-terminated string; `out` valid for writes.
int32_t nsmild_field_load(const char *path, struct NsmildField **out);

// Integrate the full nonlinear equations from `u0` over `[0, t_final]`
// with a uniform mesh of `n_steps` intervals.
//
// # Safety
// `u0` must be a valid handle; `out` valid for writes.
int32_t nsmild_integrate(const struct NsmildField *u0,
                         double t_final,
                         size_t n_steps,
                         struct NsmildTrajectory **out);

// Solve the fixed-point formulation by Picard iteration. On success the
// iteration count is written to `iterations` (when non-null). Data that
// is too large for the contraction returns `NSMILD_ERR_SMALLNESS`.
//
// # Safety
// `u0` must be a valid handle; `out` valid for writes; `iterations`
// null or valid for writes.
int32_t nsmild_picard_solve(const struct NsmildField *u0,
                            double t_final,
                            size_t n_steps,
                            double tol,
                            size_t max_iter,
                            struct NsmildTrajectory **out,
                            size_t *iterations);

// # Safety
// `traj` must be a handle from this library or null; invalid after.
void nsmild_trajectory_free(struct NsmildTrajectory *traj);

// Number of stored samples.
//
// # Safety
// `traj` must be a valid handle; `out` valid for writes.
int32_t nsmild_trajectory_len(const struct NsmildTrajectory *traj, size_t *out);

// Time of sample `index`.
//
// # Safety
// `traj` must be a valid handle; `out` valid for writes.
int32_t nsmild_trajectory_time(const struct NsmildTrajectory *traj, size_t index, double *out);

// Copy of the velocity at sample `index`.
//
// # Safety
// `traj` must be a valid handle; `out` valid for writes.
int32_t nsmild_trajectory_field(const struct NsmildTrajectory *traj,
                                size_t index,
                                struct NsmildField **out);

// Weighted supremum `sup_t t^{alpha/2} ||Lambda^s u(t)||_q` over the
// trajectory, with `alpha` the scaling weight of `(s, q)`.
//
// # Safety
// `traj` must be a valid handle; `out` valid for writes.
int32_t nsmild_trajectory_kato_norm(const struct NsmildTrajectory *traj,
                                    double s,
                                    double q,
                                    double *out);

// Write the trajectory in the binary container format.
//
// # Safety
// `traj` must be a valid handle; `path` a NUL-terminated string.
int32_t nsmild_trajectory_save(const struct NsmildTrajectory *traj, const char *path);

// Read a trajectory written by [`nsmild_trajectory_save`].
//
// # Safety
// `path` must be a NUL-terminated string; `out` valid for writes.
int32_t nsmild_trajectory_load(const char *path, struct NsmildTrajectory **out);

// Recover the pressure of a velocity field as a scalar handle.
//
// # Safety
// `field` must be a valid handle; `out` valid for writes.
int32_t nsmild_pressure(const struct NsmildField *field, struct NsmildScalar **out);

// # Safety
// `scalar` must be a handle from this library or null; invalid after.
void nsmild_scalar_free(struct NsmildScalar *scalar);

// Homogeneous Sobolev norm of a scalar field.
//
// # Safety
// `scalar` must be a valid handle; `out` valid for writes.
int32_t nsmild_scalar_sobolev_norm(const struct NsmildScalar *scalar,
                                   double s,
                                   double q,
                                   double *out);

// Predicted decay envelope exponent. `field_kind`: 0 velocity,
// 1 pressure; `n` is the velocity time-derivative order.
//
// # Safety
// `out` must be valid for writes.
int32_t nsmild_theoretical_exponent(int32_t field_kind,
                                    double s,
                                    double q,
                                    uint32_t n,
                                    size_t d,
                                    double *out);

// Least-squares power-law fit `values ~ amplitude * t^exponent` over
// `len >= 5` positive samples. Null result pointers are skipped.
//
// # Safety
// `times` and `values` must be valid for `len` reads; non-null result
// pointers valid for writes.
int32_t nsmild_fit_decay(const double *times,
                         const double *values,
                         size_t len,
                         double *exponent,
                         double *amplitude,
                         double *r_squared);

// One half of the singular kernel integral
// `int_0^1 (1 - tau)^{-gamma} tau^{-theta} dtau`, split at `tau = 1/2`.
// `half`: 0 lower, 1 upper. Divergent hypotheses return
// `NSMILD_ERR_INVALID`.
//
// # Safety
// `out` must be valid for writes.
int32_t nsmild_beta_integral(double gamma, double theta, int32_t half, double *out);

// Run a full experiment from a TOML configuration file, writing
// artifacts under `output_dir` (null defers to the environment and the
// file). Writes 1 to `all_pass` when every criterion passed, else 0.
//
// # Safety
// `config_path` must be a NUL-terminated string; `output_dir` null or
// NUL-terminated; `all_pass` null or valid for writes.
int32_t nsmild_run_experiment(const char *config_path, const char *output_dir, int32_t *all_pass);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* NSMILD_H */
