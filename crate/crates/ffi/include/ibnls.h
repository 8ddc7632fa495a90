#ifndef IBNLS_H
#define IBNLS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  IBNLS_STATUS_OK = 0,
  IBNLS_STATUS_NULL_POINTER = 1,
  IBNLS_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Parameters fail the well-posedness hypotheses.
   */
  IBNLS_STATUS_GATE = 3,
  /**
   * No feasible exponents were found.
   */
  IBNLS_STATUS_INFEASIBLE = 4,
  /**
   * The verifier rejected at least one row.
   */
  IBNLS_STATUS_VERIFY_FAILED = 5,
  IBNLS_STATUS_NUMERICAL = 6,
  IBNLS_STATUS_PANIC = 7,
} IbnlsStatus;

typedef struct IbnlsCertificate IbnlsCertificate;

/**
 * Validated parameter tuple `(d, s, b, σ)`.
 */
typedef struct IbnlsParams IbnlsParams;

/**
 * A field on a periodic grid together with its weight and nonlinearity.
 */
typedef struct IbnlsSimulation IbnlsSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message from the most recent failing call on this thread; empty after a success.
 * The pointer stays valid until the next library call on the same thread.
 */
const char *ibnls_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ibnls_version(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void ibnls_string_free(char *s);

/**
 * Parse exact rationals such as `"1/2"` or `"0.25"` into a parameter handle.
 *
 * # Safety
 * String arguments must be NUL-terminated; `out` must be writable.
 */
IbnlsStatus ibnls_params_new(uint32_t d,
                             const char *s,
                             const char *b,
                             const char *sigma,
                             IbnlsParams **out_params);

/**
 * # Safety
 * `p` must be null or a live handle from [`ibnls_params_new`].
 */
void ibnls_params_free(IbnlsParams *p);

/**
 * Whether all hypotheses hold. When they do not, the failing checks are in the last-error message.
 *
 * # Safety
 * `params` must be a live handle; `out_applies` must be writable.
 */
IbnlsStatus ibnls_classify(const IbnlsParams *params, bool *out_applies);

/**
 * Build the full exponent certificate.
 *
 * # Safety
 * `params` must be a live handle; `out_cert` must be writable.
 */
IbnlsStatus ibnls_certify(const IbnlsParams *params, IbnlsCertificate **out_cert);

/**
 * # Safety
 * `json` must be NUL-terminated; `out_cert` must be writable.
 */
IbnlsStatus ibnls_certificate_from_json(const char *json, IbnlsCertificate **out_cert);

/**
 * Pretty JSON; free with [`ibnls_string_free`]. Null on failure.
 *
 * # Safety
 * `cert` must be a live handle.
 */
char *ibnls_certificate_to_json(const IbnlsCertificate *cert);

/**
 * Exact global θ, e.g. `"5/8"` or `"1/2+1ε"`; free with [`ibnls_string_free`]. Null on failure.
 *
 * # Safety
 * `cert` must be a live handle.
 */
char *ibnls_certificate_theta(const IbnlsCertificate *cert);

/**
 * Re-derive every row of `cert` against its own stored parameters.
 * Returns `VerifyFailed` with the number of failing rows in `out_failed` when any row fails.
 *
 * # Safety
 * `cert` must be a live handle; `out_failed` must be null or writable.
 */
IbnlsStatus ibnls_verify(const IbnlsCertificate *cert, size_t *out_failed);

/**
 * # Safety
 * `cert` must be null or a live certificate handle.
 */
void ibnls_certificate_free(IbnlsCertificate *cert);

/**
 * Periodic grid `[-L, L)^d` with `n` points per axis, weight `|x|^{-b}` regularised
 * at radius `rho` (`rho <= 0` picks half a cell) and a zero field.
 *
 * # Safety
 * `out_sim` must be writable.
 */
IbnlsStatus ibnls_sim_new(uint32_t d,
                          size_t n,
                          double length,
                          double b,
                          double rho,
                          double lambda,
                          double sigma,
                          IbnlsSimulation **out_sim);

/**
 * Number of grid points, i.e. the length expected by the field accessors.
 *
 * # Safety
 * `sim` must be a live handle.
 */
size_t ibnls_sim_len(const IbnlsSimulation *sim);

/**
 * Replace the field by `amp · exp(-|x|²/width²)`.
 *
 * # Safety
 * `sim` must be a live handle.
 */
IbnlsStatus ibnls_sim_set_gaussian(IbnlsSimulation *sim, double amp, double width);

/**
 * Copy `len` nodal values (row-major, split into real and imaginary arrays) into the field.
 *
 * # Safety
 * `re` and `im` must each point to `len` readable doubles.
 */
IbnlsStatus ibnls_sim_set_field(IbnlsSimulation *sim,
                                const double *re,
                                const double *im,
                                size_t len);

/**
 * Copy the current field out into `re` and `im`, each of length `len`.
 *
 * # Safety
 * `re` and `im` must each point to `len` writable doubles.
 */
IbnlsStatus ibnls_sim_get_field(const IbnlsSimulation *sim, double *re, double *im, size_t len);

/**
 * Advance by `steps` Strang steps of size `dt` (negative runs backward).
 * Returns `Numerical` and leaves the field untouched if it stops being finite.
 *
 * # Safety
 * `sim` must be a live handle.
 */
IbnlsStatus ibnls_sim_step(IbnlsSimulation *sim, double dt, size_t steps);

/**
 * Discrete mass and energy of the current field.
 *
 * # Safety
 * `sim` must be a live handle; outputs must be null or writable.
 */
IbnlsStatus ibnls_sim_invariants(const IbnlsSimulation *sim, double *out_mass, double *out_energy);

/**
 * # Safety
 * `sim` must be null or a live simulation handle.
 */
void ibnls_sim_free(IbnlsSimulation *sim);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IBNLS_H */
