#ifndef TRAPFLUX_H
#define TRAPFLUX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define TF_METHOD_SERIES 0

#define TF_METHOD_INTEGRAL 1

#define TF_METHOD_CLOSED_FORM 2

#define TF_METHOD_PIECEWISE_LINEAR 3

#define TF_METHOD_ARCTAN 4

#define TF_METHOD_ARCTAN_ADJUSTED 5

typedef enum TfStatus {
  TF_STATUS_OK = 0,
  TF_STATUS_NULL_POINTER = 1,
  TF_STATUS_INVALID_ARGUMENT = 2,
  TF_STATUS_DOMAIN = 3,
  TF_STATUS_NUMERICAL = 4,
  TF_STATUS_IO = 5,
  TF_STATUS_PARSE = 6,
  TF_STATUS_PANIC = 7,
} TfStatus;

/**
 * Transfer curve handle.
 */
typedef struct TfCurve TfCurve;

/**
 * Fluxon population handle.
 */
typedef struct TfPopulation TfPopulation;

/**
 * Rotor and roll parameters. Frequencies in Hz, angles in radians. When
 * `inertia_ratio` is zero and `polhode_hz` positive, `ΔI/I` is chosen to
 * give that polhode frequency.
 */
typedef struct TfDynamics {
  double spin_hz;
  double roll_hz;
  double polhode_hz;
  double inertia_ratio;
  double gamma_b;
  double alpha;
  double beta0;
  double theta_s0;
  double theta_p0;
  double theta_r0;
} TfDynamics;

typedef struct TfCurveConstants {
  double delta;
  double f_delta;
  double kappa_delta;
  double delta_width;
  double a_delta;
} TfCurveConstants;

typedef struct TfFluxon {
  double xi;
  double eta;
  int32_t polarity;
} TfFluxon;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *tf_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tf_version(void);

/**
 * GP-B parameters: 100 Hz spin, 3 min roll, 43.6 min polhode period.
 *
 * # Safety
 *
 * `out` must be null or valid for writes.
 */
enum TfStatus tf_dynamics_gpb(struct TfDynamics *out);

/**
 * Creates a transfer curve for gap `delta` using one of the `TF_METHOD_*` codes.
 *
 * # Safety
 *
 * `out` must be null or valid for writes.
 */
enum TfStatus tf_curve_new(double delta, uint32_t method, struct TfCurve **out);

/**
 * Releases a curve handle.
 *
 * # Safety
 *
 * `curve` must be null or a handle from `tf_curve_new` not yet freed; it is invalid afterwards.
 */
void tf_curve_free(struct TfCurve *curve);

/**
 * Curve constants `f_δ`, `κ_δ`, `Δ_δ` and `A_δ`.
 *
 * # Safety
 *
 * `curve` must be null or a live curve handle; `out` must be null or valid for writes.
 */
enum TfStatus tf_curve_constants(const struct TfCurve *curve, struct TfCurveConstants *out);

/**
 * Evaluates `F_δ` at `n` points of `s` into `out`.
 *
 * # Safety
 *
 * `curve` must be null or a live curve handle; `s` and `out` must be null or valid for `n` doubles.
 */
enum TfStatus tf_curve_eval(const struct TfCurve *curve, const double *s, size_t n, double *out);

/**
 * Evaluates `F_δ'` at `n` points of `s` into `out`.
 *
 * # Safety
 *
 * `curve` must be null or a live curve handle; `s` and `out` must be null or valid for `n` doubles.
 */
enum TfStatus tf_curve_deriv(const struct TfCurve *curve, const double *s, size_t n, double *out);

/**
 * `2 n_pairs` fluxons uniform on the sphere with alternating polarity.
 *
 * # Safety
 *
 * `out` must be null or valid for writes.
 */
enum TfStatus tf_population_uniform(size_t n_pairs, uint64_t seed, struct TfPopulation **out);

/**
 * Dipole-biased population. `axis` (three doubles, body frame) may be null
 * for a random axis; `bias_pairs` of zero selects the default count.
 *
 * # Safety
 *
 * `axis` must be null or point to three doubles; `curve` must be null or a live curve handle; `out` must be null or valid for writes.
 */
enum TfStatus tf_population_dipole(size_t n_pairs,
                                   double bias_flux,
                                   const double *axis,
                                   size_t bias_pairs,
                                   const struct TfCurve *curve,
                                   uint64_t seed,
                                   struct TfPopulation **out);

/**
 * Reads a population file of `xi eta polarity` lines.
 *
 * # Safety
 *
 * `path` must be null or a NUL-terminated string; `out` must be null or valid for writes.
 */
enum TfStatus tf_population_read(const char *path, struct TfPopulation **out);

/**
 * Releases a population handle.
 *
 * # Safety
 *
 * `pop` must be null or a population handle not yet freed; it is invalid afterwards.
 */
void tf_population_free(struct TfPopulation *pop);

/**
 * Number of fluxons, or 0 for a null handle.
 *
 * # Safety
 *
 * `pop` must be null or a live population handle.
 */
size_t tf_population_len(const struct TfPopulation *pop);

/**
 * Copies fluxon `index` into `out`.
 *
 * # Safety
 *
 * `pop` must be null or a live population handle; `out` must be null or valid for writes.
 */
enum TfStatus tf_population_get(const struct TfPopulation *pop, size_t index, struct TfFluxon *out);

/**
 * Total flux in units of Φ₀ at time `t`.
 *
 * # Safety
 *
 * Handles must be null or live; `dynamics` must be null or point to a `TfDynamics`; `out` must be null or valid for writes.
 */
enum TfStatus tf_total_flux(const struct TfPopulation *pop,
                            const struct TfCurve *curve,
                            const struct TfDynamics *dynamics,
                            double t,
                            double *out);

/**
 * Fills `buffer` with `n_samples` flux samples at `t_start + i / sample_rate`.
 * A nonzero `first_order` selects the first-order kinematics.
 *
 * # Safety
 *
 * Handles must be null or live; `dynamics` must be null or point to a `TfDynamics`; `buffer` must be null or valid for `n_samples` doubles.
 */
enum TfStatus tf_generate(const struct TfPopulation *pop,
                          const struct TfCurve *curve,
                          const struct TfDynamics *dynamics,
                          double t_start,
                          double sample_rate,
                          size_t n_samples,
                          int32_t first_order,
                          double *buffer);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRAPFLUX_H */
