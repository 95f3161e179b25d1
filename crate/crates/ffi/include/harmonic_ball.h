#ifndef HARMONIC_BALL_H
#define HARMONIC_BALL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum HbStatus {
  HB_STATUS_OK = 0,
  HB_STATUS_NULL_POINTER = 1,
  HB_STATUS_INVALID_UTF8 = 2,
  HB_STATUS_PARSE = 3,
  HB_STATUS_DIMENSION = 4,
  HB_STATUS_DOMAIN = 5,
  HB_STATUS_REFUSED = 6,
  HB_STATUS_ZERO_ENERGY = 7,
  HB_STATUS_BUFFER_TOO_SMALL = 8,
  HB_STATUS_PANIC = 9,
} HbStatus;

/**
 * Polynomial map `R^n -> R^m` together with its harmonicity certificate.
 */
typedef struct HbMap HbMap;

/**
 * Sparse polynomial with exact rational coefficients.
 */
typedef struct HbPoly HbPoly;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *hb_version(void);

/**
 * Length in bytes, without the terminator, of this thread's last error
 * message; 0 when the last call succeeded.
 */
size_t hb_last_error_length(void);

/**
 * Copy this thread's last error message into `buf` (NUL-terminated).
 * Returns `HB_STATUS_BUFFER_TOO_SMALL` when `len` cannot hold it.
 */
enum HbStatus hb_last_error_message(char *buf, size_t len);

/**
 * Parse `text` as a polynomial in `n` variables `x1..xn`.
 */
enum HbStatus hb_poly_parse(const char *text_ptr, size_t n, struct HbPoly **out);

void hb_poly_free(struct HbPoly *p);

enum HbStatus hb_poly_dimension(const struct HbPoly *p, size_t *out);

/**
 * Canonical text of `p`. `needed` receives the size including the
 * terminator; call with `buf = NULL, len = 0` to query it.
 */
enum HbStatus hb_poly_format(const struct HbPoly *p, char *buf, size_t len, size_t *needed);

/**
 * Evaluate `p` at the point `x[0..n]`.
 */
enum HbStatus hb_poly_evaluate(const struct HbPoly *p, const double *x, size_t n, double *out);

enum HbStatus hb_poly_laplacian(const struct HbPoly *p, struct HbPoly **out);

/**
 * Exact test `Δp = 0`.
 */
enum HbStatus hb_poly_is_harmonic(const struct HbPoly *p, bool *out);

/**
 * `∫_{B_r} p` by exact moments.
 */
enum HbStatus hb_poly_integrate_ball(const struct HbPoly *p, double r, double *out);

/**
 * `∫_{∂B_r} p` by exact moments.
 */
enum HbStatus hb_poly_integrate_sphere(const struct HbPoly *p, double r, double *out);

/**
 * The identity map `x ↦ x` on `R^n`.
 */
enum HbStatus hb_map_identity(size_t n, struct HbMap **out);

/**
 * Degree-`k` zonal harmonic about the coordinate axis `axis` (zero-based).
 */
enum HbStatus hb_map_zonal(size_t n, uint32_t k, size_t axis, struct HbMap **out);

/**
 * Random homogeneous harmonic polynomial of degree `k`, fixed by `seed`.
 */
enum HbStatus hb_map_random(size_t n, uint32_t k, uint64_t seed, struct HbMap **out);

/**
 * Scalar map from a copy of `p`; harmonicity is certified, not assumed.
 */
enum HbStatus hb_map_from_poly(const struct HbPoly *p, struct HbMap **out);

void hb_map_free(struct HbMap *m);

enum HbStatus hb_map_dimension(const struct HbMap *m, size_t *out);

enum HbStatus hb_map_is_certified(const struct HbMap *m, bool *out);

/**
 * `∫_{B_r} |∇u|²`, exact.
 */
enum HbStatus hb_dirichlet_energy(const struct HbMap *m, double r, double *out);

/**
 * Normalized Pohozaev residual at radius `r`; refuses uncertified maps.
 */
enum HbStatus hb_pohozaev_residual(const struct HbMap *m, double r, double *out);

/**
 * Normalized Green residual at radius `r`; refuses uncertified maps.
 */
enum HbStatus hb_green_residual(const struct HbMap *m, double r, double *out);

/**
 * `ln V_n`, finite for every `n`.
 */
double hb_ln_unit_ball_volume(size_t n);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HARMONIC_BALL_H */
