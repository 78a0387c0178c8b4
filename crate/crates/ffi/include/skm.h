#ifndef SKM_H
#define SKM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SkmStatus {
  SKM_STATUS_OK = 0,
  SKM_STATUS_NULL_POINTER = 1,
  SKM_STATUS_INVALID_ARGUMENT = 2,
  SKM_STATUS_CONFIG_ERROR = 3,
  SKM_STATUS_NUMERICAL_ERROR = 4,
  SKM_STATUS_CHECK_FAILED = 5,
  SKM_STATUS_PANIC = 6,
} SkmStatus;

/**
 * Fixed-point actions accepted by [`skm_fixed_point_count`].
 */
typedef enum SkmAction {
  /**
   * `−1` on `C²`.
   */
  SKM_ACTION_INVOLUTION = 0,
  /**
   * `diag(e^{2πi/3}, e^{−2πi/3})`.
   */
  SKM_ACTION_GAMMA = 1,
} SkmAction;

/**
 * Opaque Gibbons–Hawking configuration.
 */
typedef struct SkmGhConfig SkmGhConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message on this thread, or null. Owned by the library.
 */
const char *skm_last_error(void);

/**
 * Parse a GH configuration from JSON, e.g.
 * `{"sources":[{"x":[0,0,0],"m":1}],"period":12.566370614359172}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SkmStatus skm_gh_config_from_json(const char *json, struct SkmGhConfig **out);

/**
 * # Safety
 * `cfg` must be null or a handle from [`skm_gh_config_from_json`] not yet freed.
 */
void skm_gh_config_free(struct SkmGhConfig *cfg);

/**
 * `U(x)` for `x` of length 3.
 *
 * # Safety
 * `cfg` must be a live handle, `x` point to 3 doubles and `out` to one.
 */
enum SkmStatus skm_gh_potential(const struct SkmGhConfig *cfg, const double *x, double *out);

/**
 * The GH metric at `(τ, x)` in coordinates `(τ, x₁, x₂, x₃)`, 16 doubles row-major.
 *
 * # Safety
 * `cfg` must be a live handle, `x` point to 3 doubles and `out` to 16.
 */
enum SkmStatus skm_gh_metric(const struct SkmGhConfig *cfg,
                             const double *x,
                             double tau,
                             double *out);

/**
 * The special Kähler metric of `T*CP¹(k,l)` at `(ρ, θ, ψ, φ)`, 16 doubles row-major.
 *
 * # Safety
 * `out` must point to 16 doubles.
 */
enum SkmStatus skm_metric2_eval(uint32_t k,
                                uint32_t l,
                                double rho,
                                double theta,
                                double psi,
                                double phi,
                                double *out);

/**
 * Ricci-flatness of the special Kähler metric on an `n × n` grid of `[0.5, 2] × [0.5, 2.6]`.
 * Writes 1 to `pass` iff every check passes; returns `CheckFailed` otherwise.
 *
 * # Safety
 * `pass` must be a valid pointer.
 */
enum SkmStatus skm_ricci_check(uint32_t k, uint32_t l, uint32_t n, double tol, uint8_t *pass);

/**
 * Metric of a positive 3-form on `R⁷`. `phi` holds 35 coefficients on `dy_{abc}`, `a < b < c`,
 * in lexicographic order; `out` receives 49 doubles row-major.
 *
 * # Safety
 * `phi` must point to 35 doubles and `out` to 49.
 */
enum SkmStatus skm_metric_from_phi(const double *phi, double *out);

/**
 * Number of fixed points of `action` on `C²/Λ`. `basis` holds four lattice vectors of `R⁴`
 * (16 doubles, one vector per row) or is null for the square lattice (involution) or the
 * hexagonal product lattice (γ).
 *
 * # Safety
 * `basis` must be null or point to 16 doubles; `out` must be valid.
 */
enum SkmStatus skm_fixed_point_count(enum SkmAction action, const double *basis, uintptr_t *out);

/**
 * Run a verification suite by name (e.g. `"verify-ricci"`) with a JSON config (or null for
 * defaults). `report` receives the JSON report, to be released with [`skm_string_free`].
 * Returns `CheckFailed` when the report was produced but some check failed.
 *
 * # Safety
 * `suite` must be a NUL-terminated string, `config_json` null or NUL-terminated, `report` valid.
 */
enum SkmStatus skm_run_suite(const char *suite, const char *config_json, char **report);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void skm_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SKM_H */
